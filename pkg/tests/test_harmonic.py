from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wreathwalk.errors import BoundaryTouched, ConfigError, RecurrentRegime, SupportEscapesWindow
from wreathwalk.groups.symz import SymZ
from wreathwalk.harmonic.appendix import ZWZ, theta_sum, zwz_cocycle, zwz_identity_residual
from wreathwalk.harmonic.graph import (ScalarField, SchreierGraph, ball_values, growth_profile,
                                       harmonicity_residual)
from wreathwalk.harmonic.symz import (SYMZ_WEIGHTS, cocycle_identity_residual, combine, h_symz, sq_norm,
                                      symz_cocycle, symz_field, symz_graph)
from wreathwalk.harmonic.tree import (ROOT, TreeVertex, act_f, act_t, da_build, da_energy, da_harmonic,
                                      direct_limit, direct_term, from_word, graph_energy, series_limit,
                                      series_limit_geometric, series_term, root_anomaly, shape_report,
                                      template_field, template_value)
from wreathwalk.harmonic.voltage import (eta_sum, interior_residual, pi_apply, voltage_solve,
                                         wreath_voltage_cocycle)

G = SymZ()
SW = symz_graph(60)


def line_graph(n):
    verts = list(range(-n, n + 1))
    idx = {v: i for i, v in enumerate(verts)}
    return SchreierGraph(verts, {"t": [idx.get(v + 1, -1) for v in verts], "T": [idx.get(v - 1, -1) for v in verts]},
                         {"t": "T", "T": "t"})


HALF = {"t": Fraction(1, 2), "T": Fraction(1, 2)}


def test_constant_and_linear_fields_harmonic():
    g = line_graph(20)
    assert harmonicity_residual(g, ScalarField(g, [Fraction(3)] * len(g)), HALF).max_abs == 0
    assert harmonicity_residual(g, ScalarField(g, [Fraction(v) for v in g.vertices]), HALF).max_abs == 0


def test_quadratic_field_not_harmonic():
    g = line_graph(5)
    rep = harmonicity_residual(g, ScalarField(g, [Fraction(v * v) for v in g.vertices]), HALF)
    assert rep.max_abs == 1 and len(rep.nonzero) == rep.checked


def test_boundary_touched():
    g = line_graph(5)
    with pytest.raises(BoundaryTouched):
        harmonicity_residual(g, ScalarField(g, [Fraction(0)] * len(g)), HALF, vertices=[5])


def test_graph_validation():
    with pytest.raises(ConfigError):
        SchreierGraph([0, 1], {"t": [1, 0], "T": [1, 1]}, {"t": "T", "T": "t"})


def test_symz_graph_actions():
    assert SW.act(5, "s") == 5 and SW.act(0, "s") == 1 and SW.act(0, "t") == 1
    assert len(SW.orbit(0)) == len(SW)


def test_symz_harmonic_exact():
    rep = harmonicity_residual(SW, symz_field(SW), SYMZ_WEIGHTS)
    assert rep.max_abs == 0 and rep.checked == 119


def test_symz_cocycle_values():
    bt = symz_cocycle(G.shift, 10)
    assert bt == {0: Fraction(-2, 3)} and sq_norm(bt) == Fraction(4, 9)
    assert symz_cocycle(G.identity, 10) == {}
    bT, bs = symz_cocycle(G.inv(G.shift), 10), symz_cocycle(G.transposition, 10)
    assert bT == {1: Fraction(2, 3)}
    assert bs == {0: Fraction(1, 3), 1: Fraction(-1, 3)}
    assert combine([(Fraction(1, 4), bt), (Fraction(1, 4), bT), (Fraction(1, 2), bs)]) == {}


def test_symz_cocycle_window():
    with pytest.raises(SupportEscapesWindow):
        symz_cocycle(G.word("t" * 12), 10)


@given(st.lists(st.sampled_from("tTs"), max_size=6), st.lists(st.sampled_from("tTs"), max_size=6))
@settings(max_examples=200, deadline=None)
def test_symz_cocycle_identity(w1, w2):
    g1, g2 = G.word(w1), G.word(w2)
    b = lambda g: symz_cocycle(g, 30)  # noqa: E731
    assert cocycle_identity_residual(b, G.act, g1, g2, G.mul, 30) == 0


def test_growth_profiles():
    g = line_graph(20)
    const = growth_profile(ball_values(g, ScalarField(g, [Fraction(2)] * len(g)), 0), [1, 4, 16])
    assert [r[1] for r in const] == [2.0, 2.0, 2.0]
    lin = growth_profile(ball_values(g, ScalarField(g, [Fraction(v) for v in g.vertices]), 0), [1, 4, 16])
    assert [r[2] for r in lin] == [1.0, 1.0, 1.0]
    sz = growth_profile(ball_values(SW, symz_field(SW), 0), [1, 2, 4, 8, 16, 32])
    assert max(r[2] for r in sz) <= 1.0


# tree

def test_tree_actions():
    v = from_word("101")
    assert act_t(v).word() == "0101" and act_t(v, -1) == TreeVertex(2, ((0, 1), (2, 1)))
    assert act_f(v, (1, 0)).word() == "001"
    assert act_f(ROOT, (1, 0)) == ROOT


def test_da_shape_q2_D3():
    rep = shape_report(da_build(2, 3))
    assert rep["core"] == 15 and rep["core_is_all_words"]
    assert rep["rays"] == 8 and rep["ray_bases_ok"] and rep["F_fixes_rays"]


def test_da_shape_q3():
    rep = shape_report(da_build(3, 2))
    assert rep["core"] == 13 and rep["core_is_all_words"] and rep["ray_bases_ok"]


def test_shift_bijective_on_orbit():
    g = da_build(2, 4)
    inner = g.actions["t"][g.actions["t"] >= 0]
    assert len(set(inner.tolist())) == len(inner)


def test_template_gradients():
    for v in ["", "1", "01", "110"]:
        assert template_value("0" + v, 2, 1) - template_value(v, 2, 1) == Fraction(1, 2 ** len(v))
        assert template_value("1" + v, 2, 1) - template_value("0" + v, 2, 1) == Fraction(1, 2 * 2 ** len(v))


def test_root_anomaly():
    g = da_build(2, 5)
    rep = root_anomaly(g, 1)
    assert rep["nonzero"] == {"()": Fraction(1, 4)}
    assert rep["energy_per_root_ray_edge"] == Fraction(1, 4)


def test_da_harmonic_zero():
    rep = da_harmonic(da_build(2, 4), 0)
    assert np.all(rep["values"] == 0) and rep["max_deviation"] == 0


def test_da_harmonic_q3():
    rep = da_harmonic(da_build(3, 5), 1)
    assert rep["max_deviation_off_root"] < 1e-8


def test_energy_series():
    assert series_limit(2, 1) == Fraction(17, 32) == series_limit_geometric(2, 1)
    assert series_term(2, 1, 0) == Fraction(17, 64)
    for q in (2, 3, 5):
        assert series_limit(q, 1) == series_limit_geometric(q, 1)
    assert series_limit(2, 0) == 0
    for a in (1, 2, 3):
        assert series_limit(2, a) == a * a * series_limit(2, 1)
    rows = da_energy(2, 1, 20)
    assert all(r2[1] > r1[1] for r1, r2 in zip(rows, rows[1:]))
    assert all(r[1] < r[2] for r in rows)


def test_graph_energy_matches_direct_series():
    for D in (2, 3, 4, 5):
        g = da_build(2, D)
        assert graph_energy(g, template_field(g, 1)) == sum(direct_term(2, 1, n) for n in range(D))
    assert direct_limit(2, 1) == Fraction(5, 8)


# voltage

@pytest.fixture(scope="module")
def volt():
    return voltage_solve(3, 21)


def test_voltage_residual(volt):
    assert np.abs(interior_residual(volt)).max() <= 1e-8
    shifted = volt.shifted(-0.5)
    r = interior_residual(shifted)
    assert np.abs(r).max() <= 1e-8


def test_voltage_green_symmetry(volt):
    v = volt.values
    assert np.abs(v - v[::-1, ::-1, ::-1]).max() < 1e-8
    assert np.abs(v - np.transpose(v, (1, 0, 2))).max() < 1e-8


def test_voltage_recurrent():
    for d in (1, 2):
        with pytest.raises(RecurrentRegime):
            voltage_solve(d, 21)
    with pytest.raises(ConfigError):
        voltage_solve(3, 20)


def test_voltage_lamp_cocycle(volt):
    for a in (-0.5, 0.0, 1.25):
        w = volt.shifted(a)
        b = wreath_voltage_cocycle(w, [(0, 0, 0)])
        assert b[(w.half,) * 3] == 2 * a
        b[(w.half,) * 3] = 0
        assert not b.any()
    assert not wreath_voltage_cocycle(volt).any()


def test_voltage_representation(volt):
    # pi(g1 g2) = pi(g1) pi(g2) for the wreath product law, away from the box edge
    from wreathwalk.groups.finite import cyclic_group
    from wreathwalk.groups.wreath import lamplighter
    W = lamplighter(cyclic_group(2), ("Z^d", 3))
    g1 = W.element({(0, 0, 0): 1, (1, 0, 0): 1}, (1, 0, 0))
    g2 = W.element({(0, 1, 0): 1}, (0, -1, 0))
    g12 = W.mul(g1, g2)
    lhs = pi_apply(volt, g12.support, g12.pos)
    tmp = type(volt)(volt.d, volt.L, pi_apply(volt, g2.support, g2.pos), 0, 0, "")
    rhs = pi_apply(tmp, g1.support, g1.pos)
    core = (slice(3, -3),) * 3
    assert np.array_equal(lhs[core], rhs[core])


def test_eta_sum(volt):
    _, n_good = eta_sum(volt.shifted(-0.5))
    _, n_bad = eta_sum(volt.shifted(0.0))
    assert n_good <= 1e-6
    assert abs(n_bad - 0.5) < 1e-6


def test_voltage_mc_small_box():
    d = voltage_solve(3, 11)
    m = voltage_solve(3, 11, "monte-carlo-visits", walks=40_000, seed=3)
    assert abs(d.origin() - m.origin()) < 4 * m.stderr


# appendix

def test_zwz_basics():
    assert zwz_cocycle(ZWZ.identity, 5) == {}
    assert theta_sum() == {}
    with pytest.raises(SupportEscapesWindow):
        zwz_cocycle(ZWZ.lamp_at(9, 1), 5)


@given(st.dictionaries(st.integers(-4, 4), st.integers(-3, 3), max_size=3), st.integers(-4, 4),
       st.dictionaries(st.integers(-4, 4), st.integers(-3, 3), max_size=3), st.integers(-4, 4))
@settings(max_examples=200, deadline=None)
def test_zwz_identity(f1, x1, f2, x2):
    g1, g2 = ZWZ.element(f1, x1), ZWZ.element(f2, x2)
    assert zwz_identity_residual(g1, g2, 20) == 0
