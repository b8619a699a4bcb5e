"""Truncated diagonal products of the marked groups G_s = Gamma_s wr Z/m_s.

An element records its image in every factor s <= S_max together with its
image in the shadow (A x B) wr Z, the quotient by the FC-center.  The pair
is a faithful model for words: a word is trivial in the diagonal product
restricted to these coordinates iff it is trivial in every factor and in
the shadow.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import GroupMismatch
from .wreath import CyclicBase, IntegerBase, WreathElement, WreathProduct


class PairGroup:
    """Direct product A x B of two lamp groups; elements are pairs."""

    def __init__(self, A, B):
        self.A, self.B = A, B
        self.identity = (A.identity, B.identity)
        self.name = f"{getattr(A, 'name', 'A')}x{getattr(B, 'name', 'B')}"

    def mul(self, x, y):
        return (self.A.mul(x[0], y[0]), self.B.mul(x[1], y[1]))

    def inv(self, x):
        return (self.A.inv(x[0]), self.B.inv(x[1]))

    def key(self, x):
        return f"({self.A.key(x[0])},{self.B.key(x[1])})"

    def contains(self, x):
        return isinstance(x, tuple) and len(x) == 2


@dataclass(frozen=True)
class DeltaElement:
    comps: tuple  # WreathElement per factor s = 1..S_max
    shadow: WreathElement  # image in (A x B) wr Z

    @property
    def shift(self) -> int:
        return self.shadow.pos


@dataclass
class FactorData:
    """One marked factor: lamp group Gamma_s, identifications and the map to A x B."""

    gamma: object
    k: int
    m: int
    alpha: dict  # A element -> Gamma_s element
    beta: dict  # B element -> Gamma_s element
    to_ab: object  # callable Gamma_s element -> (A element, B element)


class DiagonalProduct:
    """Diagonal product truncated at ``len(factors)`` factors."""

    def __init__(self, A, B, factors: list[FactorData], name="Delta"):
        self.A, self.B = A, B
        self.factors = factors
        self.name = name
        self.S = len(factors)
        self.wreaths = [WreathProduct(f.gamma, CyclicBase(f.m)) for f in factors]
        self.ab = PairGroup(A, B)
        self.shadow_group = WreathProduct(self.ab, IntegerBase())
        self.identity = DeltaElement(tuple(w.identity for w in self.wreaths),
                                     self.shadow_group.identity)
        self.generators = self._marked_generators()

    def _marked_generators(self) -> dict:
        gens = {}
        gens["tau"] = DeltaElement(tuple(w.shift(1) for w in self.wreaths), self.shadow_group.shift(1))
        gens["tau^-1"] = self.inv(gens["tau"])
        eA, eB = self.A.identity, self.B.identity
        for a in self._nontrivial(self.A):
            comps = tuple(w.lamp_at(0, f.alpha[a]) for w, f in zip(self.wreaths, self.factors))
            gens[f"alpha[{self.A.key(a)}]"] = DeltaElement(comps, self.shadow_group.lamp_at(0, (a, eB)))
        for b in self._nontrivial(self.B):
            comps = tuple(w.lamp_at(f.k, f.beta[b]) for w, f in zip(self.wreaths, self.factors))
            gens[f"beta[{self.B.key(b)}]"] = DeltaElement(comps, self.shadow_group.lamp_at(0, (eA, b)))
        return gens

    @staticmethod
    def _nontrivial(G):
        return [x for x in G.elements() if x != G.identity]

    def generator_list(self):
        return list(self.generators.values())

    def mul(self, x: DeltaElement, y: DeltaElement) -> DeltaElement:
        if type(x) is not DeltaElement or type(y) is not DeltaElement or len(x.comps) != self.S:
            raise GroupMismatch("operands are not elements of this diagonal product")
        comps = tuple(w.mul(a, b) for w, a, b in zip(self.wreaths, x.comps, y.comps))
        return DeltaElement(comps, self.shadow_group.mul(x.shadow, y.shadow))

    def inv(self, x: DeltaElement) -> DeltaElement:
        return DeltaElement(tuple(w.inv(a) for w, a in zip(self.wreaths, x.comps)),
                            self.shadow_group.inv(x.shadow))

    def conj(self, a, g):
        return self.mul(self.mul(g, a), self.inv(g))

    def phi(self, x) -> int:
        return x.shadow.pos

    def lift(self, n: int) -> DeltaElement:
        return self.power(self.generators["tau"], n)

    def power(self, x, n):
        if n < 0:
            x, n = self.inv(x), -n
        out = self.identity
        for _ in range(n):
            out = self.mul(out, x)
        return out

    def project(self, x: DeltaElement, s: int) -> WreathElement:
        """Coordinate projection pi_s (s is 1-based)."""
        return x.comps[s - 1]

    def key(self, x: DeltaElement) -> str:
        parts = [w.key(c) for w, c in zip(self.wreaths, x.comps)]
        return " / ".join(parts) + " // " + self.shadow_group.key(x.shadow)

    def word(self, names) -> DeltaElement:
        g = self.identity
        for nm in names:
            g = self.mul(g, self.generators[nm])
        return g

    def kernel_element(self, s: int, site: int, value) -> DeltaElement:
        """Element with a single lamp ``value`` at ``site`` of factor s and trivial elsewhere.

        Only meaningful (an element of the diagonal product) when ``value`` lies in
        ker(Gamma_s -> A x B); the caller is responsible for that.
        """
        comps = list(self.identity.comps)
        comps[s - 1] = self.wreaths[s - 1].lamp_at(site, value)
        return DeltaElement(tuple(comps), self.shadow_group.identity)

    def component_shadow(self, x: DeltaElement, s: int):
        """Image of factor s in (A x B) wr Z/m_s, with B lamps shifted back by k_s."""
        f = self.factors[s - 1]
        m = f.m
        acc = {}
        for site, v in x.comps[s - 1].lamps:
            a, b = f.to_ab(v)
            pa = acc.get(site, self.ab.identity)
            acc[site] = (self.A.mul(pa[0], a), pa[1])
            sb = (site - f.k) % m
            pb = acc.get(sb, self.ab.identity)
            acc[sb] = (pb[0], self.B.mul(pb[1], b))
        lamps = tuple(sorted((s_, v) for s_, v in acc.items() if v != self.ab.identity))
        return lamps, x.comps[s - 1].pos

    def shadow_mod(self, x: DeltaElement, s: int):
        m = self.factors[s - 1].m
        acc = {}
        for site, v in x.shadow.lamps:
            z = site % m
            acc[z] = self.ab.mul(acc.get(z, self.ab.identity), v)
        lamps = tuple(sorted((s_, v) for s_, v in acc.items() if v != self.ab.identity))
        return lamps, x.shadow.pos % m

    def consistent(self, x: DeltaElement) -> bool:
        """Every factor agrees with the shadow through the A x B identifications."""
        return all(self.component_shadow(x, s) == self.shadow_mod(x, s) for s in range(1, self.S + 1))

    def in_fc_kernel(self, x: DeltaElement) -> bool:
        """Membership in the direct sum of ker(Gamma_s -> A(s) x B(s))^{m_s}."""
        if x.shift != 0 or x.shadow.lamps:
            return False
        for f, c in zip(self.factors, x.comps):
            e = (self.A.identity, self.B.identity)
            if any(f.to_ab(v) != e for _, v in c.lamps):
                return False
        return True

    def __repr__(self):
        return f"DiagonalProduct({self.name}, S={self.S})"
