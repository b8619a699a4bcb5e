"""Vectorised exact convolution powers on F wr Z.

The generic dictionary convolution in :mod:`.measure` stalls once supports
reach millions of atoms, which happens after twenty-odd steps on a
lamplighter.  Here a measure is a set of rows (packed lamp digits, cursor)
with integer weights over the denominator ``D**n``; all arithmetic is on
int64 arrays, so results remain exact as long as ``D**n < 2**62``.

Steps may carry lamps at a few sites near the cursor, e.g. ``(gamma delta_0, s)``
or its inverse ``(gamma^-1 delta_{-s}, -s)``.
"""
from __future__ import annotations

from fractions import Fraction
from math import ceil, lcm, log2

import numpy as np

from ..errors import ConfigError, SupportOverflow
from .measure import Measure


class LampState:
    """Rows ``(words, pos)`` with weights ``counts / denom``, sorted and unique."""

    def __init__(self, engine, words, pos, counts, denom):
        self.engine = engine
        self.words = words
        self.pos = pos
        self.counts = counts
        self.denom = denom

    def __len__(self):
        return len(self.pos)

    def mass(self) -> Fraction:
        return Fraction(int(self.counts.sum()), self.denom)

    def to_measure(self, group) -> Measure:
        eng = self.engine
        weights = {}
        for row, x, c in zip(self.words.tolist(), self.pos.tolist(), self.counts.tolist()):
            lamps = {}
            for j in range(eng.width):
                w, o = divmod(j, eng.dpw)
                dgt = (row[w] // eng.pw[o]) % eng.base
                if dgt:
                    lamps[j - eng.N] = eng.digit_to_elem[dgt]
            weights[group.element(lamps, x)] = c
        return Measure(group, weights, self.denom)


class LampExactEngine:
    def __init__(self, lamp_table, steps, n_max):
        """``steps``: list of (((offset, lamp element), ...), move, Fraction probability)."""
        self.table = lamp_table
        self.base = lamp_table.order
        reach = max([abs(s) for _, s, _ in steps] + [abs(c) for lamps, _, _ in steps for c, _ in lamps])
        self.N = int(n_max) * reach + reach
        self.width = 2 * self.N + 1
        bits = max(1.0, log2(self.base))
        self.dpw = max(1, int(62 // bits))
        while self.base ** self.dpw >= 2**62:
            self.dpw -= 1
        self.nwords = ceil(self.width / self.dpw)
        self.pw = [self.base**i for i in range(self.dpw)]
        # digits are table indices shifted so that the identity is digit 0
        e = lamp_table.identity
        order = [e] + [x for x in range(self.base) if x != e]
        self.digit_to_elem = order
        self.elem_to_digit = {x: i for i, x in enumerate(order)}
        tab = np.empty((self.base, self.base), dtype=np.int64)
        for i, x in enumerate(order):
            for j, y in enumerate(order):
                tab[i, j] = self.elem_to_digit[lamp_table.mul(x, y)]
        self.dtab = tab
        probs = [Fraction(p) for _, _, p in steps]
        self.D = lcm(*(p.denominator for p in probs))
        self.steps = [(tuple((int(c), self.elem_to_digit[g]) for c, g in lamps), int(s), int(Fraction(p) * self.D))
                      for lamps, s, p in steps]
        if sum(w for _, _, w in self.steps) != self.D:
            raise ConfigError("step probabilities must sum to 1")
        if self.D ** int(n_max) >= 2**62:
            raise ConfigError(f"denominator {self.D}^{self.N} overflows int64; use the dictionary path")

    @classmethod
    def from_distribution(cls, group, dist: Measure, n_max):
        steps = [(g.lamps, g.pos, Fraction(w, dist.denom)) for g, w in dist.weights.items()]
        return cls(group.lamp, steps, n_max)

    def initial(self) -> LampState:
        return LampState(self, np.zeros((1, self.nwords), dtype=np.int64),
                         np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64), 1)

    def step(self, st: LampState, cap=50_000_000) -> LampState:
        K = len(st)
        if K * len(self.steps) > cap:
            raise SupportOverflow(f"{K * len(self.steps)} candidate rows exceed cap {cap}",
                                  mass=st.mass())
        rows = np.arange(K)
        pws = np.asarray(self.pw, dtype=np.int64)
        out_w, out_p, out_c = [], [], []
        for lamps, s, w in self.steps:
            words = st.words
            if lamps:
                words = st.words.copy()
            for c, g in lamps:
                j = st.pos + (self.N + c)
                if (j < 0).any() or (j >= self.width).any():
                    raise SupportOverflow("lamp left the packing window", mass=st.mass())
                wi = j // self.dpw
                pw = pws[j % self.dpw]
                cur_word = words[rows, wi]
                dig = (cur_word // pw) % self.base
                words[rows, wi] = cur_word + (self.dtab[dig, g] - dig) * pw
            out_w.append(words)
            out_p.append(st.pos + s)
            out_c.append(st.counts * w)
        return self._aggregate(np.concatenate(out_w), np.concatenate(out_p),
                               np.concatenate(out_c), st.denom * self.D)

    def _aggregate(self, words, pos, counts, denom) -> LampState:
        keys = [pos] + [words[:, i] for i in range(self.nwords - 1, -1, -1)]
        order = np.lexsort(keys)
        words, pos, counts = words[order], pos[order], counts[order]
        if len(pos) == 0:
            return LampState(self, words, pos, counts, denom)
        diff = np.empty(len(pos), dtype=bool)
        diff[0] = True
        diff[1:] = (pos[1:] != pos[:-1]) | (words[1:] != words[:-1]).any(axis=1)
        starts = np.flatnonzero(diff)
        return LampState(self, words[starts], pos[starts], np.add.reduceat(counts, starts), denom)

    def powers(self, n_max=None):
        """Yield (n, state of mu^(n)) for n = 0..n_max."""
        n_max = self.N if n_max is None else n_max
        st = self.initial()
        yield 0, st
        for n in range(1, n_max + 1):
            st = self.step(st)
            yield n, st

    def tv(self, a: LampState, b: LampState) -> Fraction:
        """Exact total variation distance between two states."""
        d = lcm(a.denom, b.denom)
        ca = a.counts * (d // a.denom)
        cb = -b.counts * (d // b.denom)
        words = np.concatenate([a.words, b.words])
        pos = np.concatenate([a.pos, b.pos])
        merged = self._aggregate(words, pos, np.concatenate([ca, cb]), d)
        return Fraction(int(np.abs(merged.counts).sum()), 2 * d)
