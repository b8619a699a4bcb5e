"""Restricted wreath products ``L wr G`` over the bases Z, Z/mZ and Z^d.

Elements are pairs (lamp configuration, cursor) with the product

    (f, x)(g, y) = (f * tau_x g, x + y),   tau_x g(z) = g(z - x).

Lamp configurations are stored in normal form: a tuple of ``(site, value)``
pairs sorted by site with no identity values, so equality is structural and
elements can key dictionaries.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import GroupMismatch, NoProjection


class IntegerBase:
    name = "Z"
    zero = 0
    has_projection = True

    def add(self, x, y):
        return x + y

    def neg(self, x):
        return -x

    def key(self, x):
        return str(x)

    def phi(self, x):
        return x

    def contains(self, x):
        return isinstance(x, int) and not isinstance(x, bool)

    def __eq__(self, other):
        return isinstance(other, IntegerBase)

    def __hash__(self):
        return hash("Z")


class CyclicBase:
    has_projection = False

    def __init__(self, m: int):
        self.m = int(m)
        self.name = f"Z/{self.m}"
        self.zero = 0

    def add(self, x, y):
        return (x + y) % self.m

    def neg(self, x):
        return (-x) % self.m

    def key(self, x):
        return str(x)

    def phi(self, x):
        raise NoProjection(f"{self.name} has no projection to the integers")

    def contains(self, x):
        return isinstance(x, int) and 0 <= x < self.m

    def __eq__(self, other):
        return isinstance(other, CyclicBase) and other.m == self.m

    def __hash__(self):
        return hash(("Z/m", self.m))


class LatticeBase:
    has_projection = False

    def __init__(self, d: int):
        self.d = int(d)
        self.name = f"Z^{self.d}"
        self.zero = (0,) * self.d

    def add(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def neg(self, x):
        return tuple(-a for a in x)

    def key(self, x):
        return ",".join(str(a) for a in x)

    def phi(self, x):
        raise NoProjection("Z^d base has no canonical projection to the integers")

    def contains(self, x):
        return isinstance(x, tuple) and len(x) == self.d

    def __eq__(self, other):
        return isinstance(other, LatticeBase) and other.d == self.d

    def __hash__(self):
        return hash(("Z^d", self.d))


@dataclass(frozen=True)
class WreathElement:
    lamps: tuple  # ((site, value), ...) sorted by site, no identity values
    pos: object

    def lamp(self, site, identity):
        for s, v in self.lamps:
            if s == site:
                return v
        return identity

    @property
    def support(self):
        return tuple(s for s, _ in self.lamps)


class WreathProduct:
    """The group ``lamp wr base``."""

    def __init__(self, lamp, base, name=None):
        self.lamp = lamp
        self.base = base
        self.name = name or f"{getattr(lamp, 'name', 'L')} wr {base.name}"
        self.identity = WreathElement((), base.zero)

    # construction helpers
    def element(self, lamps=None, pos=None) -> WreathElement:
        """Build an element from a mapping or iterable of (site, value)."""
        if pos is None:
            pos = self.base.zero
        items = lamps.items() if isinstance(lamps, dict) else (lamps or ())
        e = self.lamp.identity
        d = {}
        for s, v in items:
            s = self._norm_site(s)
            d[s] = self.lamp.mul(d.get(s, e), v)
        return WreathElement(self._normal(d), self._norm_site(pos))

    def _norm_site(self, s):
        if isinstance(self.base, CyclicBase):
            return s % self.base.m
        if isinstance(self.base, LatticeBase):
            return tuple(s)
        return s

    def _normal(self, d):
        e = self.lamp.identity
        return tuple(sorted((s, v) for s, v in d.items() if v != e))

    def lamp_at(self, site, value, pos=None) -> WreathElement:
        """The element value*delta_site with cursor at ``pos`` (default base zero)."""
        return self.element({site: value}, pos)

    def shift(self, x) -> WreathElement:
        return WreathElement((), self._norm_site(x))

    # group surface
    def check(self, a):
        if not isinstance(a, WreathElement) or not self.base.contains(a.pos):
            raise GroupMismatch(f"{a!r} is not an element of {self.name}")

    def mul(self, a: WreathElement, b: WreathElement) -> WreathElement:
        if type(a) is not WreathElement or type(b) is not WreathElement:
            raise GroupMismatch("wreath product expects WreathElement operands")
        if not b.lamps:
            return WreathElement(a.lamps, self.base.add(a.pos, b.pos))
        add = self.base.add
        x = a.pos
        d = dict(a.lamps)
        lm = self.lamp.mul
        e = self.lamp.identity
        for s, v in b.lamps:
            z = add(s, x)
            w = d.get(z)
            d[z] = v if w is None else lm(w, v)
        lamps = tuple(sorted((s, v) for s, v in d.items() if v != e))
        return WreathElement(lamps, add(x, b.pos))

    def inv(self, a: WreathElement) -> WreathElement:
        # (f, x)^-1 = (tau_{-x} f^-1, -x)
        nx = self.base.neg(a.pos)
        add = self.base.add
        li = self.lamp.inv
        lamps = tuple(sorted((add(s, nx), li(v)) for s, v in a.lamps))
        return WreathElement(lamps, nx)

    def conj(self, a, g):
        """g a g^-1"""
        return self.mul(self.mul(g, a), self.inv(g))

    def phi(self, a) -> int:
        return self.base.phi(a.pos)

    def lift(self, x: int) -> WreathElement:
        """An element with projection x (a pure cursor move)."""
        if not self.base.has_projection:
            raise NoProjection(f"{self.name} has no projection to the integers")
        return WreathElement((), x)

    def key(self, a: WreathElement) -> str:
        """Printable canonical key: ``site:elem;site:elem|cursor``."""
        lk, bk = self.lamp.key, self.base.key
        return ";".join(f"{bk(s)}:{lk(v)}" for s, v in a.lamps) + "|" + bk(a.pos)

    def translate_lamps(self, lamps, x):
        """tau_x applied to a lamp tuple."""
        add = self.base.add
        return tuple(sorted((add(s, x), v) for s, v in lamps))

    def __repr__(self):
        return f"WreathProduct({self.name})"

    def __eq__(self, other):
        return isinstance(other, WreathProduct) and other.name == self.name and other.base == self.base

    def __hash__(self):
        return hash(("wreath", self.name))


def lamplighter(lamp, base="Z"):
    """Convenience constructor: base is "Z", an int m (for Z/mZ) or ("Z^d", d)."""
    if base == "Z":
        b = IntegerBase()
    elif isinstance(base, int):
        b = CyclicBase(base)
    elif isinstance(base, tuple) and base[0] == "Z^d":
        b = LatticeBase(base[1])
    else:
        raise GroupMismatch(f"unknown base {base!r}")
    return WreathProduct(lamp, b)
