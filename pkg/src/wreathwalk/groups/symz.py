"""Sym(Z) semidirect Z: finitary permutations of the integers times translations.

An element is stored as the bijection it induces on Z under the right
action ``x.g = sigma(x) + T``.  ``sigma`` is kept as a sorted tuple of its
non-fixed points.  The right action fixes the product:
``x.(gh) = (x.g).h``.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import GroupMismatch


@dataclass(frozen=True)
class SymZElement:
    sigma: tuple  # ((x, sigma(x)), ...) for moved points, sorted
    T: int

    def sigma_map(self):
        return dict(self.sigma)

    def act(self, x: int) -> int:
        for a, b in self.sigma:
            if a == x:
                return b + self.T
        return x + self.T

    @property
    def support(self):
        return tuple(a for a, _ in self.sigma)


class SymZ:
    name = "Sym(Z)xZ"

    def __init__(self):
        self.identity = SymZElement((), 0)
        self.shift = SymZElement((), 1)
        self.transposition = SymZElement(((0, 1), (1, 0)), 0)

    def make(self, sigma: dict | None = None, T: int = 0) -> SymZElement:
        sigma = {int(a): int(b) for a, b in (sigma or {}).items() if a != b}
        if sorted(sigma) != sorted(sigma.values()):
            raise GroupMismatch("sigma is not a finitary bijection")
        return SymZElement(tuple(sorted(sigma.items())), int(T))

    def transposition_of(self, a: int, b: int) -> SymZElement:
        return self.make({a: b, b: a}, 0)

    def check(self, g):
        if not isinstance(g, SymZElement):
            raise GroupMismatch(f"{g!r} is not in Sym(Z)xZ")

    def mul(self, g: SymZElement, h: SymZElement) -> SymZElement:
        if type(g) is not SymZElement or type(h) is not SymZElement:
            raise GroupMismatch("SymZ expects SymZElement operands")
        # x.(gh) = sigma_h(sigma_g(x) + T_g) + T_h; store sigma_gh(x) = that - T_g - T_h
        Tg, Th = g.T, h.T
        sg, sh = dict(g.sigma), dict(h.sigma)
        pts = set(sg)
        pts.update(y - Tg for y in sh)
        out = {}
        for x in pts:
            y = sg.get(x, x) + Tg
            z = sh.get(y, y) - Tg
            if z != x:
                out[x] = z
        return SymZElement(tuple(sorted(out.items())), Tg + Th)

    def inv(self, g: SymZElement) -> SymZElement:
        # x.g = sigma(x) + T, so x.g^-1 = sigma^-1(x - T); stored sigma'(x) = sigma^-1(x-T) + T
        T = g.T
        return SymZElement(tuple(sorted((b + T, a + T) for a, b in g.sigma)), -T)

    def conj(self, a, g):
        return self.mul(self.mul(g, a), self.inv(g))

    def phi(self, g) -> int:
        return g.T

    def lift(self, x: int) -> SymZElement:
        return SymZElement((), x)

    def act(self, x: int, g: SymZElement) -> int:
        return g.act(x)

    def key(self, g: SymZElement) -> str:
        return ";".join(f"{a}:{b}" for a, b in g.sigma) + "|" + str(g.T)

    def word(self, letters) -> SymZElement:
        """Evaluate a word in 't', 'T' (inverse shift) and 's' (transposition of 0 and 1)."""
        table = {"t": self.shift, "T": self.inv(self.shift), "s": self.transposition}
        g = self.identity
        for c in letters:
            g = self.mul(g, table[c])
        return g

    def __repr__(self):
        return "SymZ()"
