"""Schreier graphs as explicit action tables, scalar fields on them,
exact harmonicity residuals and a preconditioned CG Dirichlet solver."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import BoundaryTouched, ConfigError, SolverDiverged


class SchreierGraph:
    """Finite window of an orbit.

    ``actions[name][i]`` is the index of ``vertices[i] . name`` or -1 when
    the image falls outside the window.  ``inverse`` pairs generator names.
    """

    def __init__(self, vertices, actions: dict, inverse: dict, interior=None, keyfn=str):
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.actions = {g: np.asarray(a, dtype=np.int64) for g, a in actions.items()}
        self.inverse = dict(inverse)
        n = len(self.vertices)
        if interior is None:
            interior = np.ones(n, dtype=bool)
            for a in self.actions.values():
                interior &= a >= 0
        self.interior = np.asarray(interior, dtype=bool)
        self.keyfn = keyfn
        self._check()

    def _check(self):
        for g, a in self.actions.items():
            h = self.actions[self.inverse[g]]
            ok = a >= 0
            if not np.all(h[a[ok]] == np.flatnonzero(ok)):
                raise ConfigError(f"action of {self.inverse[g]} does not invert {g}")
            if len(set(a[ok].tolist())) != int(ok.sum()):
                raise ConfigError(f"action of {g} is not injective")
        for g, a in self.actions.items():
            if np.any(a[self.interior] < 0):
                raise ConfigError(f"interior vertex lacks its {g}-neighbour")

    def __len__(self):
        return len(self.vertices)

    @property
    def boundary(self):
        return np.flatnonzero(~self.interior)

    def act(self, v, g):
        j = self.actions[g][self.index[v]]
        return None if j < 0 else self.vertices[j]

    def orbit(self, start, gens=None):
        gens = list(self.actions) if gens is None else gens
        s = self.index[start]
        seen = {s}
        dq = deque([s])
        while dq:
            i = dq.popleft()
            for g in gens:
                j = int(self.actions[g][i])
                if j >= 0 and j not in seen:
                    seen.add(j)
                    dq.append(j)
        return [self.vertices[i] for i in sorted(seen)]

    def distances(self, start, gens=None):
        gens = list(self.actions) if gens is None else gens
        s = self.index[start]
        dist = {s: 0}
        dq = deque([s])
        while dq:
            i = dq.popleft()
            for g in gens:
                j = int(self.actions[g][i])
                if j >= 0 and j not in dist:
                    dist[j] = dist[i] + 1
                    dq.append(j)
        return dist

    def edge_lines(self):
        """Edge list text: vertex key, generator, image key."""
        k = self.keyfn
        for g, a in self.actions.items():
            for i, j in enumerate(a.tolist()):
                if j >= 0:
                    yield f"{k(self.vertices[i])}\t{g}\t{k(self.vertices[j])}"


@dataclass
class ScalarField:
    graph: SchreierGraph
    values: list  # per vertex index; Fraction in exact mode, float otherwise
    exact: bool = True

    def __post_init__(self):
        if len(self.values) != len(self.graph):
            raise ConfigError("field must be defined on every vertex")

    def __getitem__(self, v):
        return self.values[self.graph.index[v]]

    def shifted(self, c):
        return ScalarField(self.graph, [x + c for x in self.values], self.exact)


@dataclass
class ResidualReport:
    max_abs: object
    nonzero: dict = field(default_factory=dict)  # vertex -> residual
    checked: int = 0


def harmonicity_residual(graph: SchreierGraph, fld: ScalarField, weights: dict, vertices=None,
                         tol=0) -> ResidualReport:
    """max over interior x of |sum_g w(g) f(x.g) - f(x)|.

    ``weights`` maps generator names to probabilities (an identity entry may be
    given by any name whose action is the identity).  Exact when the field is.
    """
    tot = sum(weights.values())
    if (tot != 1) if fld.exact else abs(tot - 1) > 1e-12:
        raise ConfigError(f"weights sum to {tot}")
    idx = np.flatnonzero(graph.interior) if vertices is None else [graph.index[v] for v in vertices]
    vals = fld.values
    worst = Fraction(0) if fld.exact else 0.0
    bad = {}
    acts = [(graph.actions[g], w) for g, w in weights.items()]
    for i in idx:
        s = -vals[i]
        for a, w in acts:
            j = a[i]
            if j < 0:
                raise BoundaryTouched(f"vertex {graph.vertices[i]!r} lacks a neighbour", step=int(i))
            s += w * vals[j]
        r = abs(s)
        if r > tol:
            bad[graph.vertices[i]] = s
        if r > worst:
            worst = r
    return ResidualReport(worst, bad, len(idx))


def dirichlet_solve(graph: SchreierGraph, weights: dict, boundary: dict, rhs=None, tol=1e-10,
                    maxiter=100_000):
    """Solve sum_g w(g) (f(x) - f(x.g)) = rhs(x) off ``boundary`` (vertex index -> value).

    Conjugate gradient with a Jacobi preconditioner on the grounded graph
    Laplacian; symmetric weights and actions make the system SPD.
    Returns (values array, iterations, relative residual).
    """
    n = len(graph)
    fixed = np.zeros(n, dtype=bool)
    fixed[list(boundary)] = True
    val = np.zeros(n)
    for i, v in boundary.items():
        val[i] = float(v)
    unk = np.flatnonzero(~fixed)
    pos = -np.ones(n, dtype=np.int64)
    pos[unk] = np.arange(len(unk))
    rows, cols, data = [], [], []
    b = np.zeros(len(unk))
    if rhs:
        for i, v in rhs.items():
            if not fixed[i]:
                b[pos[i]] += float(v)
    diag = np.zeros(len(unk))
    for g, w in weights.items():
        w = float(w)
        a = graph.actions[g][unk]
        if np.any(a < 0):
            raise BoundaryTouched(f"unknown vertex lacks its {g}-neighbour")
        loop = a == unk
        diag += np.where(loop, 0.0, w)
        off = ~loop
        tgt = a[off]
        src = np.arange(len(unk))[off]
        inner = ~fixed[tgt]
        rows.append(src[inner])
        cols.append(pos[tgt[inner]])
        data.append(np.full(int(inner.sum()), -w))
        np.add.at(b, src[~inner], w * val[tgt[~inner]])
    rows.append(np.arange(len(unk)))
    cols.append(np.arange(len(unk)))
    data.append(diag)
    A = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(len(unk), len(unk)))
    if np.any(diag <= 0):
        raise SolverDiverged("a free vertex has no neighbours; system is singular")
    dinv = 1.0 / diag
    M = LinearOperator(A.shape, matvec=lambda x: dinv * x)
    its = [0]

    def cb(_):
        its[0] += 1
    x, info = cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
    if info != 0:
        raise SolverDiverged(f"CG did not converge (info={info})")
    out = val.copy()
    out[unk] = x
    rel = float(np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300))
    return out, its[0], rel


def growth_profile(values_at, radii, ball_sizes=None):
    """Rows (n, M(n), M(n)/n, log M(n)/n) with M(n) = max |value| over the ball of radius n.

    ``values_at(n)`` returns the values on the ball of radius n.
    """
    import math
    rows = []
    for n in radii:
        M = max(abs(float(v)) for v in values_at(n))
        rows.append((n, M, M / n if n else float("nan"),
                     math.log(M) / n if n and M > 0 else float("nan")))
    return rows


def ball_values(graph: SchreierGraph, fld: ScalarField, start):
    """Closure for :func:`growth_profile` using graph distance from ``start``."""
    dist = graph.distances(start)

    def at(n):
        return [fld.values[i] for i, d in dist.items() if d <= n]
    return at
