"""Exact finitely supported measures on groups and their algebra.

A :class:`Measure` stores integer weights over a common denominator, so
convolution powers of a measure with rational atoms stay exact and cheap.
Keys are group elements themselves (they hash structurally); the printable
canonical key is available through ``group.key``.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

from ..errors import ConfigError, GroupMismatch, SupportOverflow
from ..groups.metric import ball

DEFAULT_TRUNCATION_CAP = 2_000_000


class Measure:
    """Finitely supported measure ``weights[g] / denom``.

    ``retained_mass`` is below 1 only for truncated convolutions; such a
    measure is a sub-probability and downstream code must say so.
    """

    __slots__ = ("group", "weights", "denom", "truncated")

    def __init__(self, group, weights: dict, denom: int = 1, truncated: bool = False):
        self.group = group
        self.weights = {g: w for g, w in weights.items() if w}
        self.denom = int(denom)
        self.truncated = truncated

    @classmethod
    def from_fractions(cls, group, atoms: dict) -> "Measure":
        atoms = {g: Fraction(p) for g, p in atoms.items()}
        if any(p < 0 for p in atoms.values()):
            raise ConfigError("negative atom")
        d = lcm(*(p.denominator for p in atoms.values())) if atoms else 1
        return cls(group, {g: int(p * d) for g, p in atoms.items()}, d)

    @classmethod
    def point(cls, group, g=None) -> "Measure":
        return cls(group, {group.identity if g is None else g: 1}, 1)

    def __getitem__(self, g) -> Fraction:
        return Fraction(self.weights.get(g, 0), self.denom)

    def prob(self, g) -> Fraction:
        return self[g]

    def atoms(self) -> dict:
        return {g: Fraction(w, self.denom) for g, w in self.weights.items()}

    def support(self):
        return self.weights.keys()

    def __len__(self):
        return len(self.weights)

    def mass(self) -> Fraction:
        return Fraction(sum(self.weights.values()), self.denom)

    def is_symmetric(self) -> bool:
        inv = self.group.inv
        return all(self.weights.get(inv(g), 0) == w for g, w in self.weights.items())

    def keyed(self) -> dict:
        """Canonical printable keys -> exact probabilities."""
        k = self.group.key
        return {k(g): Fraction(w, self.denom) for g, w in self.weights.items()}

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        if self.weights.keys() != other.weights.keys():
            return False
        return all(w * other.denom == other.weights[g] * self.denom for g, w in self.weights.items())

    def __repr__(self):
        return f"Measure({len(self.weights)} atoms, mass={self.mass()})"


class StepDistribution(Measure):
    """Symmetric probability measure with finite generating support."""

    def __init__(self, group, weights, denom=1, names=None, witnesses=None, check=True):
        super().__init__(group, weights, denom)
        self.names = names or {}
        if check:
            self.validate(witnesses)

    @classmethod
    def from_fractions(cls, group, atoms, names=None, witnesses=None, check=True):
        base = Measure.from_fractions(group, atoms)
        return cls(group, base.weights, base.denom, names=names, witnesses=witnesses, check=check)

    def validate(self, witnesses=None, radius=12):
        if any(w <= 0 for w in self.weights.values()):
            raise ConfigError("probabilities must be positive")
        if sum(self.weights.values()) != self.denom:
            raise ConfigError(f"probabilities sum to {self.mass()}, not 1")
        if not self.is_symmetric():
            raise ConfigError("step distribution is not symmetric")
        if witnesses:
            reach = ball(self.group, list(self.weights), radius, cap=500_000)
            missing = [w for w in witnesses if w not in reach]
            if missing:
                raise ConfigError(f"support does not reach witnesses {missing[:3]} within radius {radius}")

    def elements(self):
        return list(self.weights)

    def probabilities(self):
        return [Fraction(w, self.denom) for w in self.weights.values()]


def _common(m1: Measure, m2: Measure):
    if m1.group is not m2.group and m1.group != m2.group:
        raise GroupMismatch("measures live on different groups")
    d = lcm(m1.denom, m2.denom)
    return d, d // m1.denom, d // m2.denom


def convolve(m1: Measure, m2: Measure, cap=DEFAULT_TRUNCATION_CAP) -> Measure:
    """(m1 * m2)(z) = sum_{xy=z} m1(x) m2(y)."""
    _common(m1, m2)
    mul = m1.group.mul
    out = {}
    items2 = list(m2.weights.items())
    for x, wx in m1.weights.items():
        for y, wy in items2:
            z = mul(x, y)
            out[z] = out.get(z, 0) + wx * wy
        if len(out) > cap:
            raise SupportOverflow(f"convolution support exceeds {cap}", mass=None)
    return Measure(m1.group, out, m1.denom * m2.denom)


def convolve_exact(d: Measure, n: int, truncation_cap=DEFAULT_TRUNCATION_CAP) -> Measure:
    """Exact n-fold convolution power d^(n); n = 0 gives the point mass at the identity."""
    if n < 0:
        raise ConfigError("n must be non-negative")
    g = d.group
    cur = {g.identity: 1}
    steps = list(d.weights.items())
    mul = g.mul
    for i in range(n):
        nxt = {}
        for x, wx in cur.items():
            for y, wy in steps:
                z = mul(x, y)
                nxt[z] = nxt.get(z, 0) + wx * wy
        if len(nxt) > truncation_cap:
            raise SupportOverflow(
                f"support of step {i + 1} has {len(nxt)} atoms > cap {truncation_cap}",
                n_reached=i, mass=Fraction(sum(cur.values()), d.denom ** i))
        cur = nxt
    return Measure(g, cur, d.denom ** n)


def convolve_series(d: Measure, n_max: int, truncation_cap=DEFAULT_TRUNCATION_CAP):
    """Yield (n, d^(n)) for n = 0..n_max, reusing each power."""
    g = d.group
    cur = Measure.point(g)
    yield 0, cur
    for n in range(1, n_max + 1):
        cur = convolve(cur, d, cap=truncation_cap)
        yield n, cur


def translate_measure(g, m: Measure) -> Measure:
    """Pushforward of m under left multiplication by g."""
    mul = m.group.mul
    return Measure(m.group, {mul(g, x): w for x, w in m.weights.items()}, m.denom, m.truncated)


def tv_distance(m1: Measure, m2: Measure) -> Fraction:
    """Half the l1 distance, exactly."""
    d, f1, f2 = _common(m1, m2)
    w1, w2 = m1.weights, m2.weights
    s = 0
    for x, a in w1.items():
        s += abs(a * f1 - w2.get(x, 0) * f2)
    for x, b in w2.items():
        if x not in w1:
            s += b * f2
    return Fraction(s, 2 * d)


def sn_delta_member(g, n: int, delta, d: Measure, truncation_cap=DEFAULT_TRUNCATION_CAP, power=None):
    """Membership of g in S_n(delta) = {g : TV(d^(n), g d^(n)) < delta} with the exact TV value.

    ``power`` may carry a precomputed d^(n).
    """
    mu_n = power if power is not None else convolve_exact(d, n, truncation_cap)
    tv = tv_distance(mu_n, translate_measure(g, mu_n))
    return tv < Fraction(delta), tv


def mixture(weights_measures) -> Measure:
    """sum_i c_i m_i for exact rational coefficients c_i."""
    weights_measures = list(weights_measures)
    group = weights_measures[0][1].group
    acc = {}
    for c, m in weights_measures:
        c = Fraction(c)
        for x, w in m.weights.items():
            acc[x] = acc.get(x, 0) + c * Fraction(w, m.denom)
    return Measure.from_fractions(group, {x: p for x, p in acc.items() if p != 0})


def uniform(group, elems) -> Measure:
    elems = list(dict.fromkeys(elems))
    return Measure(group, {x: 1 for x in elems}, len(elems))
