"""The harmonic function and cocycle on the Schreier graph of Sym(Z) x| Z acting on Z."""
from __future__ import annotations

from fractions import Fraction

from ..errors import SupportEscapesWindow
from ..groups.symz import SymZ, SymZElement
from .graph import SchreierGraph, ScalarField

TWO_THIRDS = Fraction(2, 3)
SYMZ_WEIGHTS = {"t": Fraction(1, 4), "T": Fraction(1, 4), "s": Fraction(1, 2)}


def h_symz(x: int) -> Fraction:
    """x for x <= 0 and x - 2/3 for x >= 1."""
    return Fraction(x) if x <= 0 else x - TWO_THIRDS


def symz_graph(window: int) -> SchreierGraph:
    """Vertices -window..window; t: x -> x+1, T: x -> x-1, s swaps 0 and 1."""
    if window < 2:
        raise ValueError("window must be at least 2")
    G = SymZ()
    verts = list(range(-window, window + 1))
    gens = {"t": G.shift, "T": G.inv(G.shift), "s": G.transposition}
    idx = {v: i for i, v in enumerate(verts)}
    actions = {name: [idx.get(g.act(v), -1) for v in verts] for name, g in gens.items()}
    return SchreierGraph(verts, actions, {"t": "T", "T": "t", "s": "s"})


def symz_field(graph: SchreierGraph) -> ScalarField:
    return ScalarField(graph, [h_symz(v) for v in graph.vertices], exact=True)


def symz_cocycle(g: SymZElement, window: int) -> dict:
    """b(g)(x) = h(x.g) - h(x) - T_g on [-window, window], as a sparse map x -> value.

    h(y) - y is 0 for y <= 0 and -2/3 for y >= 1, so b(g) vanishes outside
    the moved points of g and the points whose side flips under the shift.
    """
    reach = max([abs(a) for a in g.support] + [0]) + abs(g.T) + 2
    if reach > window:
        raise SupportEscapesWindow(f"cocycle support may reach {reach} > window {window}")
    out = {}
    for x in range(-window, window + 1):
        v = h_symz(g.act(x)) - h_symz(x) - g.T
        if v:
            out[x] = v
    return out


def cocycle_identity_residual(b, act, g1, g2, mul, window: int) -> Fraction:
    """max_x |b(g1 g2)(x) - b(g1)(x) - b(g2)(x.g1)| over the window; sparse slices."""
    b12, b1, b2 = b(mul(g1, g2)), b(g1), b(g2)
    worst = Fraction(0)
    for x in range(-window, window + 1):
        r = b12.get(x, 0) - b1.get(x, 0) - b2.get(act(x, g1), 0)
        worst = max(worst, abs(Fraction(r)))
    return worst


def sq_norm(slice_: dict) -> Fraction:
    return sum((Fraction(v) ** 2 for v in slice_.values()), Fraction(0))


def combine(slices) -> dict:
    """sum_i c_i b_i for pairs (c_i, b_i)."""
    out = {}
    for c, b in slices:
        for x, v in b.items():
            out[x] = out.get(x, 0) + c * v
    return {x: v for x, v in out.items() if v}
