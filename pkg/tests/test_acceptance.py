"""Acceptance criteria 1-14; each test prints one PASS/FAIL line in the terminal summary.

Run alone with ``pytest -s tests/test_acceptance.py``.
"""
import math
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from wreathwalk.cli import _preset_measure, fc_preset_config, main
from wreathwalk.constructions import copy_check, d8_kernel_generator, fc_class, s3_embedding
from wreathwalk.coupling import (couple_main, fc_tau_sample, geometric_ks_pvalue, lamplighter_z2_config,
                                 tail_profile)
from wreathwalk.errors import CapExceeded, RecurrentRegime
from wreathwalk.groups.finite import cyclic_group
from wreathwalk.groups.line import IntegerLine
from wreathwalk.groups.metric import ball, lamplighter_generators, word_length_lamplighter_line
from wreathwalk.groups.symz import SymZ
from wreathwalk.groups.wreath import lamplighter
from wreathwalk.harmonic.appendix import random_word, theta_sum, zwz_identity_residual
from wreathwalk.harmonic.graph import harmonicity_residual
from wreathwalk.harmonic.symz import (SYMZ_WEIGHTS, cocycle_identity_residual, combine, sq_norm, symz_cocycle,
                                      symz_field, symz_graph)
from wreathwalk.harmonic.tree import da_build, da_energy, da_harmonic, series_limit, series_limit_geometric
from wreathwalk.harmonic.voltage import eta_sum, interior_residual, voltage_solve, wreath_voltage_cocycle
from wreathwalk.rng import make_rng
from wreathwalk.walks.measure import StepDistribution, mixture, uniform
from wreathwalk.walks.simulate import speed_estimate

# regression baseline for sup_n sqrt(n) P(tau > n), 10^5 trials, seed 0
TAIL_BASELINE = 2.34


def crit(n, title):
    return pytest.mark.criterion(n, title)


@crit(1, "SymZ harmonic function: exact zero residual on |x| <= 1000")
def test_c01_symz_harmonic(record_property):
    t0 = time.perf_counter()
    g = symz_graph(1001)
    verts = list(range(-1000, 1001))
    rep = harmonicity_residual(g, symz_field(g), SYMZ_WEIGHTS, vertices=verts)
    dt = time.perf_counter() - t0
    record_property("max_abs", rep.max_abs)
    record_property("seconds", f"{dt:.3f}")
    assert rep.checked == 2001 and rep.max_abs == 0
    assert dt < 1.0


@crit(2, "SymZ cocycle: values, harmonic combination, identity on 1000 pairs")
def test_c02_symz_cocycle(record_property):
    G = SymZ()
    bt, bT, bs = (symz_cocycle(g, 10) for g in (G.shift, G.inv(G.shift), G.transposition))
    assert bt == {0: Fraction(-2, 3)} and sq_norm(bt) == Fraction(4, 9)
    assert combine([(Fraction(1, 4), bt), (Fraction(1, 4), bT), (Fraction(1, 2), bs)]) == {}
    rng = make_rng(2024, 1)
    worst = 0
    for _ in range(1000):
        w1, w2 = ("".join("tTs"[k] for k in rng.integers(0, 3, rng.integers(0, 7))) for _ in range(2))
        g1, g2 = G.word(w1), G.word(w2)
        worst = max(worst, cocycle_identity_residual(lambda g: symz_cocycle(g, 30), G.act, g1, g2, G.mul, 30))
    record_property("identity_residual", worst)
    assert worst == 0


@crit(3, "DA energy series: limit 17/32, N=12 gap, q=3 closed form")
def test_c03_da_energy(record_property):
    rows = da_energy(2, 1, 40)
    lim = Fraction(17, 32)
    assert rows[0][2] == lim == series_limit(2, 1)
    gaps = [lim - s for _, s, _ in rows]
    assert all(g > 0 for g in gaps) and all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < Fraction(1, 2**40)
    assert gaps[12] <= Fraction(17, 16) / 2**12
    assert series_limit(3, 1) == series_limit_geometric(3, 1)
    record_property("gap_N12", gaps[12])
    record_property("q3_limit", series_limit(3, 1))


@crit(4, "DA harmonic solve: depth-8 gradients match the template off the root")
def test_c04_da_harmonic(record_property):
    rep = da_harmonic(da_build(2, 8), 1)
    record_property("max_dev_off_root", f"{rep['max_deviation_off_root']:.2e}")
    record_property("root_anomaly", rep["root_anomaly"]["nonzero"])
    assert rep["edges"]
    assert rep["max_deviation_off_root"] <= 1e-9
    assert rep["root_anomaly"]["nonzero"] == {"()": Fraction(1, 4)}


@crit(5, "Coupling invariants over 10^5 steps; mixture identity; chi-square marginals")
def test_c05_coupling_invariants(record_property):
    cfgs = {x: lamplighter_z2_config(x) for x in (0, 2)}
    cfg = cfgs[0]
    G = cfg.group
    uF = uniform(G, cfg.F)
    assert cfg.R == 2 and cfg.epsilon == Fraction(1, 4)
    assert mixture([(1 - cfg.epsilon, cfg.residual), (cfg.epsilon, uF)]) == cfg.mu_R
    atoms = list(cfg.mu_R.weights)
    probs = np.array([float(cfg.mu_R[a]) for a in atoms])
    cnt_x, cnt_xt, tags = Counter(), Counter(), Counter()
    steps = 0
    Fset = set(cfg.F)
    for i in range(50):
        c = cfgs[0 if i % 2 == 0 else 2]
        rec = couple_main(c, 2000, 77, (i,), keep_increments=True)
        # independent replay of the invariants from the stored increments
        D, lev, lev_t = c.gamma, 0, 0
        for k, (X, Xt) in enumerate(zip(rec.increments, rec.mirrored)):
            if rec.coupled and k >= rec.tau:
                break
            ly = G.shift(c.x - lev)
            assert G.mul(G.mul(G.inv(ly), D), ly) in Fset
            D = G.mul(G.mul(G.inv(Xt), D), X)
            lev, lev_t = lev + X.pos, lev_t + Xt.pos
            assert lev == lev_t and D == rec.difference_trace[k + 1]
        cnt_x.update(rec.increments)
        cnt_xt.update(rec.mirrored)
        tags.update(rec.case_tags)
        steps += len(rec.increments)
    assert steps == 100_000
    assert set(cnt_x) <= set(atoms) and set(cnt_xt) <= set(atoms)
    pvals = []
    for cnt in (cnt_x, cnt_xt):
        obs = np.array([cnt[a] for a in atoms])
        pvals.append(stats.chisquare(obs, probs * steps).pvalue)
    record_property("chi2_p", ",".join(f"{p:.3f}" for p in pvals))
    record_property("tags", dict(tags))
    assert tags["b"] > 0 and tags["c"] > 0
    assert min(pvals) > 0.01


@crit(6, "Coupling tail: sqrt(n) P(tau > n) bounded, P non-increasing")
def test_c06_coupling_tail(record_property):
    ns = [4**k for k in range(2, 8)]
    rows = tail_profile(lamplighter_z2_config(0), ns, 100_000, 0)
    scaled = [r[3] for r in rows]
    record_property("sqrt_n_p", ",".join(f"{s:.3f}" for s in scaled))
    record_property("baseline", TAIL_BASELINE)
    for n, p, se, s in rows:
        assert s <= TAIL_BASELINE + 3 * math.sqrt(n) * se
    for (_, p1, s1, _), (_, p2, s2, _) in zip(rows, rows[1:]):
        assert p2 <= p1 + 3 * math.hypot(s1, s2)


@crit(7, "FC coupling time is Geometric(eps)")
def test_c07_fc_geometric(record_property):
    cfg = fc_preset_config()
    eps = float(cfg.epsilon)
    taus = fc_tau_sample(cfg, cfg.group.identity, 10_000, 10_000, 0)
    pval = geometric_ks_pvalue(taus, cfg.epsilon, 0)
    record_property("epsilon", cfg.epsilon)
    record_property("ks_p", f"{pval:.3f}")
    assert pval > 0.01
    worst = 0.0
    for n in range(51):
        th = (1 - eps) ** n
        se = math.sqrt(th * (1 - th) / len(taus))
        diff = abs((taus > n).mean() - th)
        assert diff <= 3 * se
        worst = max(worst, diff / se if se else 0.0)
    record_property("max_z", f"{worst:.2f}")


@crit(8, "Voltage cocycle on (Z/2) wr Z^3")
def test_c08_voltage(record_property):
    v = voltage_solve(3, 41)
    res = float(np.abs(interior_residual(v)).max())
    record_property("residual", f"{res:.1e}")
    assert res <= 1e-8
    for a in (-0.5, 0.0, 0.75):
        w = v.shifted(a)
        b = wreath_voltage_cocycle(w, [(0, 0, 0)])
        o = (w.half,) * 3
        assert b[o] == 2 * a
        b[o] = 0
        assert not b.any()
    _, good = eta_sum(v.shifted(-0.5))
    _, bad = eta_sum(v.shifted(0.0))
    record_property("eta_norm", f"{good:.1e}/{bad:.3f}")
    assert good <= 1e-6 and bad >= 0.4
    mc = voltage_solve(3, 41, "monte-carlo-visits", walks=200_000, seed=8)
    record_property("origin", f"{v.origin():.5f} vs {mc.origin():.5f}+-{mc.stderr:.5f}")
    assert abs(v.origin() - mc.origin()) <= 3 * mc.stderr
    with pytest.raises(RecurrentRegime):
        voltage_solve(1, 41)


@crit(9, "Plateau TV series for F = Z/2, delta = 1/4, n <= 20")
def test_c09_plateau(tmp_path, record_property):
    bodies = []
    for k in range(2):
        out = tmp_path / str(k)
        assert main(["plateau", "--lamp-order", "2", "--delta", "1/4", "--n-max", "20", "--out", str(out)]) == 0
        bodies.append((out / "plateau.csv").read_bytes())
    assert bodies[0] == bodies[1]
    lines = bodies[0].decode().splitlines()
    rows = [line.split(",") for line in lines[2:]]
    tvs = [Fraction(r[2]) for r in rows]
    assert len(tvs) == 21 and all(0 <= t <= 1 for t in tvs)
    man = (tmp_path / "0" / "plateau.manifest").read_text()
    c_hat = Fraction(next(x for x in man.splitlines() if x.startswith("result.c_hat=")).split("=", 1)[1])
    record_property("c_hat", c_hat)
    assert c_hat > 0


@crit(10, "FC-center on delta-d8: finiteness iff kernel predicate on the radius-4 ball")
def test_c10_fc_center(record_property):
    cfg = fc_preset_config()
    D = cfg.group
    gens = D.generator_list()
    B4 = ball(D, gens, 4)
    k = D.kernel_element(1, 0, d8_kernel_generator(D, 1))
    cands = set(B4) | {D.mul(x, k) for x in B4}
    n_fin = 0
    for x in cands:
        try:
            fc_class(D, x, cap=300)
            finite = True
        except CapExceeded:
            finite = False
        assert finite == D.in_fc_kernel(x)
        n_fin += finite
    brute = {D.mul(D.mul(g, k), D.inv(g)) for g in ball(D, gens, 6)}
    cls = fc_class(D, k)
    record_property("ball", len(B4))
    record_property("finite_classes", f"{n_fin}/{len(cands)}")
    record_property("class_size", cls.size)
    assert n_fin > 1
    assert set(cls.members) == brute and cls.size == len(brute)


@crit(11, "Lamplighter line formula equals BFS on the radius-8 ball")
def test_c11_word_metric(record_property):
    L = lamplighter(cyclic_group(2))
    B = ball(L, lamplighter_generators(L), 8)
    bad = [x for x, d in B.items() if word_length_lamplighter_line(x) != d]
    record_property("ball", len(B))
    assert not bad


@crit(12, "Diffusive speed for SRW on Z and (Z/2) wr Z")
def test_c12_speed(record_property):
    Z = IntegerLine()
    srw = StepDistribution.from_fractions(Z, {1: Fraction(1, 2), -1: Fraction(1, 2)})
    n = 10_000
    r = speed_estimate(Z, srw, n, 100_000, 0, "abs")
    ratio = r["mean"] / math.sqrt(2 * n / math.pi)
    record_property("srw_ratio", f"{ratio:.4f}")
    assert abs(ratio - 1) <= 0.05
    # the walk whose steps are the metric's generators: t, t^-1, lamp flip, stay
    L, mu = _preset_measure("plateau-z2")
    speeds = []
    for k in range(10, 15):
        n = 2**k
        s = speed_estimate(L, mu, n, 1000, k, "lamplighter-line")["mean"] / math.sqrt(n)
        speeds.append(s)
        assert 0.3 <= s <= 3
    record_property("lamplighter_speed_over_sqrt_n", ",".join(f"{s:.3f}" for s in speeds))


@crit(13, "Z wr Z cocycle identity and theta-harmonicity")
def test_c13_zwz(record_property):
    rng = make_rng(13, 0)
    worst = 0
    for _ in range(1000):
        g1 = random_word(rng, int(rng.integers(0, 9)))
        g2 = random_word(rng, int(rng.integers(0, 9)))
        worst = max(worst, zwz_identity_residual(g1, g2, 20))
    record_property("identity_residual", worst)
    assert worst == 0
    assert theta_sum() == {}


@crit(14, "copy_check on Sym(3) and its doubling-violation control")
def test_c14_copy_check(record_property):
    spec = s3_embedding()
    F = spec.F
    rep = copy_check(spec, [(1, 2)])
    c = F.commutator(spec.involutions[0], spec.involutions[1])
    assert c != F.identity
    assert rep.ok and rep.support == (0,) and rep.value == spec.group.element({0: c}, 0)
    neg = copy_check(s3_embedding((1, 2, 3)), [(1, 2)])
    record_property("support", rep.support)
    record_property("control_support", neg.support)
    assert not neg.ok and len(neg.support) > 1
