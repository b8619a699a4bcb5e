"""The discrete affine group of a (q+1)-regular tree acting on the tree.

Vertices carry horocyclic coordinates: a level (Busemann function, growing
away from the fixed end) and the child labels of the ancestors, stored for
the finitely many levels where they are nonzero.  The spine through the
marked vertex o = (0, {}) has label 0 everywhere.

Right action: ``t`` moves every vertex one level down the tree (towards
the leaves), ``T`` is its inverse, and f in F relabels the level-1 digit of
the descendants of o (the q subtrees hanging below o).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ConfigError
from ..groups.finite import FiniteGroupTable, table_from_permutations
from .graph import ScalarField, SchreierGraph, dirichlet_solve, harmonicity_residual


@dataclass(frozen=True)
class TreeVertex:
    level: int
    digits: tuple  # ((level m, digit), ...) with m <= level, digits nonzero, sorted

    @property
    def is_core(self) -> bool:
        """Descendant of o (including o): every nonzero label sits at level >= 1."""
        return self.level >= 0 and all(m >= 1 for m, _ in self.digits)

    def word(self) -> str:
        """Core vertex -> word w_1..w_n with w_k the label at level k."""
        d = dict(self.digits)
        return "".join(str(d.get(k, 0)) for k in range(1, self.level + 1))

    def ray_height(self) -> int:
        """Number of t-steps back to the core (0 on the core)."""
        if self.is_core:
            return 0
        if not self.digits:
            return -self.level
        return 1 - min(m for m, _ in self.digits)

    def key(self) -> str:
        if self.is_core:
            return self.word() or "()"
        return f"ray[{self.level};" + ",".join(f"{m}:{d}" for m, d in self.digits) + "]"


ROOT = TreeVertex(0, ())


def from_word(w: str) -> TreeVertex:
    return TreeVertex(len(w), tuple((k + 1, int(c)) for k, c in enumerate(w) if c != "0"))


def act_t(v: TreeVertex, k=1) -> TreeVertex:
    return TreeVertex(v.level + k, tuple((m + k, d) for m, d in v.digits))


def act_f(v: TreeVertex, perm) -> TreeVertex:
    if not v.is_core or v.level < 1:
        return v
    d = dict(v.digits)
    d[1] = perm[d.get(1, 0)]
    return TreeVertex(v.level, tuple(sorted((m, x) for m, x in d.items() if x)))


def transitive_group(q: int, F: FiniteGroupTable | None = None) -> FiniteGroupTable:
    """Default F: the cyclic group of rotations of the alphabet."""
    if F is None:
        F = table_from_permutations([tuple((i + 1) % q for i in range(q))], name=f"C{q}")
    perms = F.labels
    if any(len(p) != q for p in perms):
        raise ConfigError("F must act on {0..q-1}")
    orbit = {perms[x][0] for x in F.elements()}
    if len(orbit) != q:
        raise ConfigError("F must be transitive on the alphabet")
    return F


def da_build(q: int, D: int, F: FiniteGroupTable | None = None, ray_len=None) -> SchreierGraph:
    """Orbit of o under <t, F>, kept to core levels <= D and ray heights <= ray_len."""
    if q < 2:
        raise ConfigError("q must be at least 2")
    F = transitive_group(q, F)
    ray_len = D if ray_len is None else ray_len
    gens = {"t": lambda v: act_t(v, 1), "T": lambda v: act_t(v, -1)}
    inverse = {"t": "T", "T": "t"}
    for x in F.elements():
        p = F.labels[x]
        gens[f"f{x}"] = (lambda v, p=p: act_f(v, p))
        inverse[f"f{x}"] = f"f{F.inv(x)}"

    def keep(v):
        return v.level <= D if v.is_core else v.ray_height() <= ray_len

    seen = {ROOT: 0}
    order = [ROOT]
    dq = deque([ROOT])
    while dq:
        v = dq.popleft()
        for g in gens.values():
            w = g(v)
            if w not in seen and keep(w):
                seen[w] = len(order)
                order.append(w)
                dq.append(w)
    actions = {}
    for name, g in gens.items():
        actions[name] = [seen.get(g(v), -1) for v in order]
    graph = SchreierGraph(order, actions, inverse, keyfn=TreeVertex.key)
    graph.q, graph.D, graph.F, graph.ray_len = q, D, F, ray_len
    return graph


def da_weights(graph) -> dict:
    """mu = 1/4 t + 1/4 t^-1 + 1/2 u_F, identity of F included."""
    F = graph.F
    w = {"t": Fraction(1, 4), "T": Fraction(1, 4)}
    for x in F.elements():
        w[f"f{x}"] = Fraction(1, 2 * F.order)
    return w


def shape_report(graph) -> dict:
    """Counts used to compare against the expected core-plus-rays picture."""
    q, D = graph.q, graph.D
    core = [v for v in graph.vertices if v.is_core]
    rays = [v for v in graph.vertices if not v.is_core]
    words = {v.word() for v in core}
    expect_words = {""}
    frontier = [""]
    for _ in range(D):
        frontier = [str(c) + w for w in frontier for c in range(q)]
        expect_words.update(frontier)
    bases = {act_t(v, v.ray_height()) for v in rays}
    expected_bases = {ROOT} | {from_word(w) for w in expect_words if w and w[0] != "0"}
    f_fixes_rays = all(graph.actions[f"f{x}"][graph.index[v]] == graph.index[v]
                       for v in rays for x in graph.F.elements())
    return {"core": len(core), "core_is_all_words": words == expect_words,
            "ray_vertices": len(rays), "ray_bases_ok": bases == expected_bases,
            "rays": len(bases), "F_fixes_rays": f_fixes_rays}


def template_value(word: str, q: int, a, h0=0) -> Fraction:
    """h(0v) - h(v) = a/q^|v| and h(iv) - h(0v) = a/(2 q^|v|) for i != 0."""
    a = Fraction(a)
    h = Fraction(h0)
    for k in range(len(word) - 1, -1, -1):
        n = len(word) - 1 - k  # |v| for the suffix v below letter word[k]
        h += a / q**n
        if word[k] != "0":
            h += a / (2 * q**n)
    return h


def template_field(graph, a, h0=0) -> ScalarField:
    q = graph.q
    vals = []
    for v in graph.vertices:
        base = v if v.is_core else act_t(v, v.ray_height())
        vals.append(template_value(base.word(), q, a, h0))
    return ScalarField(graph, vals, exact=True)


def da_harmonic(graph, a, pin_root=True, tol=1e-12):
    """Dirichlet solve with template values on the truncation boundary.

    With ``pin_root`` the root and its ray are boundary as well; the template
    cannot be harmonic there (see ``root_anomaly``).  Returns a report with
    the solved field and per-edge gradient deviations on core edges whose
    endpoints lie at depth <= D - 2.
    """
    q, D = graph.q, graph.D
    w = da_weights(graph)
    tmpl = template_field(graph, a)
    boundary = {int(i): tmpl.values[i] for i in graph.boundary}
    if pin_root:
        for i, v in enumerate(graph.vertices):
            if v == ROOT or (not v.is_core and not v.digits):
                boundary[i] = tmpl.values[i]
    vals, its, rel = dirichlet_solve(graph, w, boundary, tol=tol)
    rows = []
    worst_off_root = 0.0
    scale = abs(float(a)) / q**D if a else 1.0
    for name in ("t", "f"):
        for g in [k for k in graph.actions if k.startswith(name) and k != "T"]:
            act = graph.actions[g]
            for i, v in enumerate(graph.vertices):
                j = act[i]
                if j < 0 or j == i or not v.is_core:
                    continue
                u = graph.vertices[j]
                if not u.is_core or max(v.level, u.level) > D - 2:
                    continue
                tg = tmpl.values[j] - tmpl.values[i]
                sg = vals[j] - vals[i]
                dev = abs(sg - float(tg)) / max(abs(float(tg)), scale)
                near_root = ROOT in (u, v)
                rows.append((v.key(), g, u.key(), tg, sg, dev, near_root))
                if not near_root:
                    worst_off_root = max(worst_off_root, dev)
    return {"values": vals, "iterations": its, "relative_residual": rel, "edges": rows,
            "max_deviation": max((r[5] for r in rows), default=0.0),
            "max_deviation_off_root": worst_off_root, "root_anomaly": root_anomaly(graph, a),
            "pinned_root": pin_root}


def root_anomaly(graph, a) -> dict:
    """Exact residuals of the template (constant on rays) at interior vertices.

    At the root the downward gradient a is not balanced: residual a/4.  A
    harmonic extension would need gradient -a along the root ray, which
    stays linear forever, so each ray edge adds a^2/4 of energy.
    """
    tmpl = template_field(graph, a)
    rep = harmonicity_residual(graph, tmpl, da_weights(graph))
    return {"nonzero": {k.key(): r for k, r in rep.nonzero.items()}, "max_abs": rep.max_abs,
            "forced_root_ray_gradient": -Fraction(a), "energy_per_root_ray_edge": Fraction(a) ** 2 / 4}


# energy

def series_term(q, a, n) -> Fraction:
    """(a/q^n)^2 q^n/4 + (a/(2 q^(n+1)))^2 (q^n/(2q)) (q(q-1)/2)."""
    a = Fraction(a)
    return (a / q**n) ** 2 * Fraction(q**n, 4) + (a / (2 * q ** (n + 1))) ** 2 \
        * Fraction(q**n, 2 * q) * Fraction(q * (q - 1), 2)


def series_limit(q, a) -> Fraction:
    a = Fraction(a)
    return a**2 * Fraction(q, q - 1) * (Fraction(1, 4) + Fraction(q - 1, 16 * q**2))


def series_limit_geometric(q, a) -> Fraction:
    """Same limit summed as two separate geometric series."""
    a = Fraction(a)
    r = Fraction(1, q)
    return a**2 / 4 / (1 - r) + a**2 * Fraction(q - 1, 16 * q**2) / (1 - r)


def direct_term(q, a, n) -> Fraction:
    """Energy of the template on edges hanging from words of length n, counted on the graph:
    q^n vertical edges of gradient a/q^n with mass 1/4 and, per word v, q - 1 nonzero
    horizontal edges of gradient a/(2 q^n) with mass 1/(2q)."""
    a = Fraction(a)
    return q**n * (a / q**n) ** 2 / 4 + q**n * (q - 1) * (a / (2 * q**n)) ** 2 / (2 * q)


def direct_limit(q, a) -> Fraction:
    a = Fraction(a)
    return a**2 * Fraction(q, q - 1) * (Fraction(1, 4) + Fraction(q - 1, 8 * q))


def da_energy(q: int, a, N: int):
    """Rows (N', partial sum of the series up to n = N', limit) for N' = 0..N."""
    lim = series_limit(q, a)
    s = Fraction(0)
    rows = []
    for n in range(N + 1):
        s += series_term(q, a, n)
        rows.append((n, s, lim))
    return rows


def graph_energy(graph, fld: ScalarField) -> Fraction:
    """1/2 sum_x sum_g mu(g) (f(x.g) - f(x))^2 over pairs inside the window."""
    w = da_weights(graph)
    tot = Fraction(0)
    for g, p in w.items():
        act = graph.actions[g]
        for i in range(len(graph)):
            j = act[i]
            if j >= 0 and j != i:
                tot += p * (fld.values[j] - fld.values[i]) ** 2
    return tot / 2


def core_depth(graph) -> np.ndarray:
    return np.array([v.level if v.is_core else -1 for v in graph.vertices])
