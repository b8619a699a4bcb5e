"""Monte Carlo simulation of random walks: traces, local times, speed."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, MetricUnavailable
from ..groups.line import IntegerLine
from ..groups.metric import Unreached, lamplighter_line_travel, word_length_bfs
from ..groups.wreath import IntegerBase, WreathProduct
from ..rng import blocks, make_rng
from .measure import Measure


class Sampler:
    """Exact sampling from a measure with integer weights over ``denom``."""

    def __init__(self, m: Measure):
        self.elements = list(m.weights)
        w = np.array([m.weights[g] for g in self.elements], dtype=object)
        self.cum = np.cumsum(w)
        self.denom = m.denom
        if self.denom < 2**62:
            self.cum_int = np.array([int(c) for c in self.cum], dtype=np.int64)
        else:
            self.cum_int = None
            self.p = np.array([float(x) / m.denom for x in w])

    def indices(self, rng, size):
        if self.cum_int is not None:
            u = rng.integers(0, self.denom, size=size, dtype=np.int64)
            return np.searchsorted(self.cum_int, u, side="right")
        return rng.choice(len(self.elements), size=size, p=self.p)

    def sample(self, rng):
        return self.elements[int(self.indices(rng, 1)[0])]


@dataclass
class WalkTrace:
    seed: int
    steps: list
    positions: list
    projections: list | None = field(default=None)

    @property
    def n(self):
        return len(self.steps)


def _phi_or_none(group):
    try:
        group.phi(group.identity)
        return group.phi
    except Exception:
        return None


def sample_walk(d: Measure, n: int, seed: int, stream=0) -> WalkTrace:
    """Reproducible trace Z_0 = e, Z_{m+1} = Z_m X_{m+1} with X i.i.d. of law d."""
    if n < 0:
        raise ConfigError("n must be non-negative")
    g = d.group
    rng = make_rng(seed, stream)
    sampler = Sampler(d)
    idx = sampler.indices(rng, n) if n else []
    steps = [sampler.elements[i] for i in idx]
    positions = [g.identity]
    for x in steps:
        positions.append(g.mul(positions[-1], x))
    phi = _phi_or_none(g)
    proj = [phi(p) for p in positions] if phi else None
    return WalkTrace(seed, steps, positions, proj)


def local_time(trace: WalkTrace, x: int) -> int:
    """L(x, n) = #{0 <= m <= n : phi(Z_m) = x}."""
    if trace.projections is None:
        raise ConfigError("walk has no projection to Z")
    return sum(1 for p in trace.projections if p == x)


def local_time_profile(trace: WalkTrace) -> dict:
    out = {}
    for p in trace.projections:
        out[p] = out.get(p, 0) + 1
    return out


def projected_law(d: Measure):
    """Law of phi(X) for X ~ d: (values, integer weights, denom)."""
    phi = d.group.phi
    acc = {}
    for g, w in d.weights.items():
        v = phi(g)
        acc[v] = acc.get(v, 0) + w
    vals = sorted(acc)
    return np.array(vals, dtype=np.int64), [acc[v] for v in vals], d.denom


def _projected_sampler(d: Measure):
    vals, w, denom = projected_law(d)
    return vals, Sampler(Measure(IntegerLine(), {int(v): c for v, c in zip(vals, w)}, denom))


def local_time_event_probability(d: Measure, n: int, c1, c2, delta, trials: int, seed: int,
                                 block=1000):
    """Monte Carlo estimate of P(for all |x| <= c1 sqrt(n): L(x, n) >= c2 n^(1/2 - delta))."""
    vals, sampler = _projected_sampler(d)
    step_vals = np.array(sampler.elements, dtype=np.int64)
    if not np.array_equal(np.sort(step_vals), np.sort(-step_vals)):
        raise ConfigError("projected walk must be symmetric")
    half = c1 * math.sqrt(n)
    lo, hi = math.ceil(-half), math.floor(half)
    threshold = c2 * n ** (0.5 - delta)
    W = hi - lo + 1
    hits = 0
    for b, size in blocks(trials, block):
        if threshold <= 0:
            hits += size
            continue
        rng = make_rng(seed, 1, b)
        steps = step_vals[sampler.indices(rng, (size, n))] if n else np.zeros((size, 0), dtype=np.int64)
        pos = np.zeros((size, n + 1), dtype=np.int64)
        np.cumsum(steps, axis=1, out=pos[:, 1:])
        mask = (pos >= lo) & (pos <= hi)
        rows = np.broadcast_to(np.arange(size)[:, None], pos.shape)[mask]
        counts = np.bincount(rows * W + (pos[mask] - lo), minlength=size * W).reshape(size, W)
        hits += int((counts >= threshold).all(axis=1).sum())
    p = hits / trials
    return {"n": n, "estimate": p, "stderr": math.sqrt(max(p * (1 - p), 0.0) / trials), "trials": trials,
            "window": (lo, hi), "threshold": threshold}


def segmented_product(seg, vals, table):
    """Ordered product of ``vals`` within each run of equal ``seg`` (seg sorted).

    Pairwise tree reduction, so only O(log run length) vectorised passes.
    """
    seg = np.asarray(seg)
    vals = np.asarray(vals)
    while len(seg):
        n = len(seg)
        new_run = np.empty(n, dtype=bool)
        new_run[0] = True
        new_run[1:] = seg[1:] != seg[:-1]
        starts = np.flatnonzero(new_run)
        if len(starts) == n:
            break
        run_start = starts[np.cumsum(new_run) - 1]
        rank = np.arange(n) - run_start
        even = np.flatnonzero(rank % 2 == 0)
        partner = even + 1
        ok = partner < n
        ok[ok] = seg[partner[ok]] == seg[even[ok]]
        out = vals[even].copy()
        out[ok] = table[vals[even[ok]], vals[partner[ok]]]
        seg, vals = seg[even], out
    return seg, vals


def lamplighter_endpoints(group: WreathProduct, d: Measure, n: int, rng, size: int):
    """Sample ``size`` endpoints Z_n of a walk on F wr Z.

    Lamp products are formed per (trial, site) in time order with a
    segmented reduction over the lamp table.  Returns a list of
    (lit sites array, cursor) per trial.
    """
    table = group.lamp.table
    e = group.lamp.identity
    elems = list(d.weights)
    moves = np.array([g.pos for g in elems], dtype=np.int64)
    width = max(1, max(len(g.lamps) for g in elems))
    offs = np.zeros((len(elems), width), dtype=np.int64)
    lampv = np.full((len(elems), width), e, dtype=np.int64)
    for i, g in enumerate(elems):
        for j, (c, v) in enumerate(g.lamps):
            offs[i, j], lampv[i, j] = c, v
    reach = int(max(np.abs(moves).max(), np.abs(offs).max()))
    sampler = Sampler(d)
    idx = sampler.indices(rng, (size, n))
    mv = moves[idx]
    before = np.zeros((size, n), dtype=np.int64)
    if n > 1:
        np.cumsum(mv[:, :-1], axis=1, out=before[:, 1:])
    final = mv.sum(axis=1)
    span = 2 * (n + 1) * reach + 3
    segs, times, vals = [], [], []
    for j in range(width):
        lv = lampv[idx, j]
        trial, time = np.nonzero(lv != e)
        site = before[trial, time] + offs[idx[trial, time], j]
        segs.append(trial * span + (site + (n + 1) * reach + 1))
        times.append(time * width + j)
        vals.append(lv[trial, time])
    seg, time, vals = np.concatenate(segs), np.concatenate(times), np.concatenate(vals)
    order = np.lexsort((time, seg))
    seg, vals = segmented_product(seg[order], vals[order], table)
    lit = seg[vals != e]
    out = []
    tr = lit // span
    st = lit % span - ((n + 1) * reach + 1)
    bounds = np.searchsorted(tr, np.arange(size + 1))
    for i in range(size):
        out.append((st[bounds[i]:bounds[i + 1]], int(final[i])))
    return out


METRICS = ("abs", "lamplighter-line", "bfs", "delta-lower-bound")


def speed_estimate(group, d: Measure, n: int, trials: int, seed: int, metric: str,
                   block=None, bfs_gens=None, bfs_cap=12, lower_bound=None):
    """Monte Carlo estimate of E d(e, Z_n) under an explicitly named metric.

    ``abs``: |phi(Z_n)| for walks on the integers (exact word metric for +-1).
    ``lamplighter-line``: closed-form word length on F wr Z.
    ``bfs``: breadth-first distance with ``bfs_gens`` up to ``bfs_cap``.
    ``delta-lower-bound``: callable ``lower_bound`` (diagonal products).
    """
    if metric not in METRICS:
        raise MetricUnavailable(f"unknown metric {metric!r}")
    if n == 0:
        return {"n": 0, "mean": 0.0, "stderr": 0.0, "trials": trials, "metric": metric}
    vals = np.empty(trials, dtype=np.float64)
    k = 0
    if metric == "abs":
        if not isinstance(group, IntegerLine):
            raise MetricUnavailable("metric 'abs' is defined for walks on the integers")
        _, sampler = _projected_sampler(d)
        step_vals = np.array(sampler.elements, dtype=np.int64)
        p = np.array([float(w) for w in np.diff(np.concatenate([[0], sampler.cum]))]) / sampler.denom
        for b, size in blocks(trials, block or 100_000):
            rng = make_rng(seed, 2, b)
            counts = rng.multinomial(n, p, size=size)
            vals[k:k + size] = np.abs(counts @ step_vals)
            k += size
    elif metric == "lamplighter-line":
        if not (isinstance(group, WreathProduct) and isinstance(group.base, IntegerBase)
                and hasattr(group.lamp, "table")):
            raise MetricUnavailable("lamplighter-line needs a finite lamp group over Z")
        bsize = block or max(1, min(trials, 4_000_000 // max(n, 1)))
        for b, size in blocks(trials, bsize):
            rng = make_rng(seed, 3, b)
            for lit, x in lamplighter_endpoints(group, d, n, rng, size):
                vals[k] = len(lit) + lamplighter_line_travel(lit.tolist(), x)
                k += 1
    else:
        for t in range(trials):
            z = sample_walk(d, n, seed, stream=t).positions[-1]
            if metric == "bfs":
                if bfs_gens is None:
                    raise MetricUnavailable("bfs metric needs a generating list")
                r = word_length_bfs(group, z, bfs_gens, bfs_cap)
                if isinstance(r, Unreached):
                    raise MetricUnavailable(f"BFS cap {bfs_cap} reached")
                vals[t] = r
            else:
                if lower_bound is None:
                    raise MetricUnavailable("delta-lower-bound needs a lower_bound callable")
                vals[t] = lower_bound(z)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return {"n": n, "mean": mean, "stderr": se, "trials": trials, "metric": metric}

