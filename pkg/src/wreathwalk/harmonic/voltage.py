"""Voltage of simple random walk on Z^d and the virtual coboundary it
induces on (Z/2) wr Z^d."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import ConfigError, RecurrentRegime, SolverDiverged, SupportEscapesWindow
from ..rng import blocks, make_rng


@dataclass
class VoltageField:
    d: int
    L: int
    values: np.ndarray  # shape (L,)*d, zero on the outer layer before shifting
    a_shift: float  # constant added so that the origin carries a
    raw_origin: float
    method: str
    stderr: float = 0.0
    iterations: int = 0
    residual: float = float("nan")

    @property
    def half(self):
        return (self.L - 1) // 2

    def at(self, x):
        h = self.half
        return self.values[tuple(int(c) + h for c in x)]

    def origin(self):
        return self.at((0,) * self.d)

    def shifted(self, a):
        c = a - self.origin()
        vals = self.values + c
        vals[(self.half,) * self.d] = a  # pinned exactly, float rounding aside
        return VoltageField(self.d, self.L, vals, self.a_shift + c, self.raw_origin,
                            self.method, self.stderr, self.iterations, self.residual)


def _laplacian(d, n):
    """I - P on the n^d grid of unknowns, zero Dirichlet data outside."""
    one = sp.identity(n, format="csr")
    T = sp.diags([np.ones(n - 1), np.ones(n - 1)], [-1, 1], format="csr")
    P = None
    for axis in range(d):
        mats = [T if k == axis else one for k in range(d)]
        term = mats[0]
        for m in mats[1:]:
            term = sp.kron(term, m, format="csr")
        P = term if P is None else P + term
    return (sp.identity(n**d, format="csr") - P / (2 * d)).tocsr()


def voltage_solve(d: int, L: int, method="direct-linear", tol=1e-8, walks=200_000, max_len=10_000,
                  seed=0, a=None, block=20_000) -> VoltageField:
    """Green's function column at the origin on the box [-(L-1)/2, (L-1)/2]^d,
    killed on the outer layer: (I - P) v = delta_0 inside, v = 0 on the layer.

    ``direct-linear`` uses CG on the sparse system; ``monte-carlo-visits``
    counts visits to the origin of walks killed at the layer (origin value
    only; the rest of the array is left at zero).
    """
    if d <= 2:
        raise RecurrentRegime(f"simple random walk on Z^{d} is recurrent; no unit flow of finite energy")
    if L % 2 == 0 or L < 5:
        raise ConfigError("L must be odd and at least 5")
    half = (L - 1) // 2
    if method == "direct-linear":
        n = L - 2
        A = _laplacian(d, n)
        b = np.zeros(n**d)
        b[np.ravel_multi_index((half - 1,) * d, (n,) * d)] = 1.0
        diag = A.diagonal()
        M = LinearOperator(A.shape, matvec=lambda x: x / diag)
        its = [0]

        def cb(_):
            its[0] += 1
        # the residual target is absolute; b has unit norm
        x, info = cg(A, b, rtol=tol * 1e-3, atol=0.0, maxiter=100_000, M=M, callback=cb)
        if info != 0:
            raise SolverDiverged(f"CG did not converge (info={info})")
        res = float(np.abs(A @ x - b).max())
        if res > tol:
            raise SolverDiverged(f"residual {res} above {tol}")
        vals = np.zeros((L,) * d)
        vals[(slice(1, L - 1),) * d] = x.reshape((n,) * d)
        fld = VoltageField(d, L, vals, 0.0, float(vals[(half,) * d]), method, 0.0, its[0], res)
    elif method == "monte-carlo-visits":
        mean, se = mc_origin_visits(d, L, walks, max_len, seed, block)
        vals = np.zeros((L,) * d)
        vals[(half,) * d] = mean
        fld = VoltageField(d, L, vals, 0.0, mean, method, se)
    else:
        raise ConfigError(f"unknown method {method!r}")
    return fld if a is None else fld.shifted(a)


def mc_origin_visits(d, L, walks, max_len, seed, block=20_000):
    """Mean and standard error of the number of visits to 0 (time 0 included)
    before hitting the layer |x|_inf = (L-1)/2; walks are cut at ``max_len``."""
    half = (L - 1) // 2
    tot = 0.0
    tot2 = 0.0
    for b, size in blocks(walks, block):
        rng = make_rng(seed, 40, b)
        pos = np.zeros((size, d), dtype=np.int64)
        visits = np.ones(size, dtype=np.int64)
        alive = np.arange(size)
        t = 0
        while len(alive) and t < max_len:
            k = len(alive)
            r = rng.integers(0, 2 * d, size=k)
            pos[alive, r // 2] += 2 * (r % 2) - 1
            p = pos[alive]
            visits[alive] += (p == 0).all(axis=1)
            alive = alive[np.abs(p).max(axis=1) < half]
            t += 1
        tot += float(visits.sum())
        tot2 += float((visits.astype(np.float64) ** 2).sum())
    mean = tot / walks
    var = tot2 / walks - mean**2
    return mean, math.sqrt(max(var, 0.0) / walks)


def interior_residual(v: VoltageField, margin=1):
    """(I - P) v - delta_0 on points with |x|_inf <= half - margin."""
    d = v.d
    vals = v.values
    core = (slice(margin, v.L - margin),) * d
    acc = np.zeros_like(vals[core])
    for ax in range(d):
        for s in (-1, 1):
            sl = [slice(margin, v.L - margin)] * d
            sl[ax] = slice(margin + s, v.L - margin + s)
            acc += vals[tuple(sl)]
    r = vals[core] - acc / (2 * d)
    c = (v.half - margin,) * d
    r[c] -= 1.0
    return r


# the cocycle on (Z/2) wr Z^d

def pi_apply(v: VoltageField, f_sites, h):
    """pi((f, h)) psi (x) = (-1)^{f(x)} psi(x - h), on the box (values outside the box
    are not needed as long as h stays inside the margin)."""
    d = v.d
    out = np.zeros_like(v.values)
    src = [slice(None)] * d
    dst = [slice(None)] * d
    for ax in range(d):
        s = int(h[ax])
        if s >= 0:
            dst[ax], src[ax] = slice(s, None), slice(0, v.L - s)
        else:
            dst[ax], src[ax] = slice(0, v.L + s), slice(-s, None)
    out[tuple(dst)] = v.values[tuple(src)]
    for site in f_sites:
        idx = tuple(int(c) + v.half for c in site)
        out[idx] = -out[idx]
    return out


def wreath_voltage_cocycle(v: VoltageField, f_sites=(), h=None, margin=2):
    """b((f, h)) = v - pi((f, h)) v as an array on the box; exact where pi is defined."""
    d = v.d
    h = (0,) * d if h is None else tuple(h)
    lim = v.half - margin
    if any(abs(c) > margin for c in h) or any(max(abs(int(c)) for c in s) > lim for s in f_sites):
        raise SupportEscapesWindow("element reaches the box margin")
    return v.values - pi_apply(v, f_sites, h)


def eta_sum(v: VoltageField, margin=2):
    """sum_g eta(g) b(g), eta = 1/2 mu + 1/2 delta(lamp at the origin), mu = SRW on Z^d.

    Returns the field on the interior |x|_inf <= half - margin and its l2 norm.
    """
    d = v.d
    acc = np.zeros_like(v.values)
    for ax in range(d):
        for s in (-1, 1):
            h = [0] * d
            h[ax] = s
            acc += wreath_voltage_cocycle(v, (), h, margin) / (4 * d)
    acc += wreath_voltage_cocycle(v, [(0,) * d], None, margin) / 2
    core = (slice(margin, v.L - margin),) * d
    part = acc[core]
    return part, float(np.sqrt((part**2).sum()))
