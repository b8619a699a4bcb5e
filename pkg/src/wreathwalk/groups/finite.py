"""Finite groups by multiplication table, plus the two infinite lamp groups
(the integers and the infinite dihedral group) used as lamp values.

Every lamp group exposes the same small surface: ``identity``, ``mul``,
``inv``, ``key`` and ``contains``.  Elements of a :class:`FiniteGroupTable`
are plain integer indices into the table.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from ..errors import ClosureOverflow, GroupMismatch, ValidationFailed

DEFAULT_ORDER_CAP = 10**6
ASSOC_CHECK_LIMIT = 512


def compose(p: tuple, q: tuple) -> tuple:
    """Product of permutations acting on the right: i -> q[p[i]]."""
    return tuple(q[i] for i in p)


def perm_inverse(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def cycles_to_perm(cycles: Sequence[Sequence[int]], n: int, base: int = 1) -> tuple:
    """Build an image tuple on {0..n-1} from cycles written with ``base``-indexed points."""
    img = list(range(n))
    for cyc in cycles:
        cyc = [c - base for c in cyc]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            img[a] = b
    return tuple(img)


class FiniteGroupTable:
    """A finite group given by a closed multiplication table.

    ``labels`` holds whatever concrete objects the indices stand for
    (permutation tuples for groups built from permutations).
    ``marked`` maps names such as ``"A"``, ``"B"`` or ``"gens"`` to lists of
    element indices.
    """

    def __init__(self, mul_table, labels=None, identity=None, marked=None, name="G",
                 check=True):
        table = np.asarray(mul_table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n):
            raise ValidationFailed("multiplication table must be square")
        self.table = table
        self.order = n
        self.name = name
        self.labels = list(labels) if labels is not None else list(range(n))
        if identity is None:
            identity = self._find_identity()
        self.identity = int(identity)
        inv = np.full(n, -1, dtype=np.int64)
        rows, cols = np.nonzero(table == self.identity)
        inv[rows] = cols
        self.inv_table = inv
        self.marked = {k: [int(x) for x in v] for k, v in (marked or {}).items()}
        self._label_index = None
        if check:
            self.validate()

    def _find_identity(self):
        n = self.order
        ar = np.arange(n)
        for e in range(n):
            if np.array_equal(self.table[e], ar) and np.array_equal(self.table[:, e], ar):
                return e
        raise ValidationFailed("table has no two-sided identity")

    def validate(self):
        n = self.order
        t = self.table
        if t.min() < 0 or t.max() >= n:
            raise ValidationFailed("table is not closed")
        ar = np.arange(n)
        if not (np.array_equal(t[self.identity], ar) and np.array_equal(t[:, self.identity], ar)):
            raise ValidationFailed("identity is not two-sided neutral")
        if (self.inv_table < 0).any():
            raise ValidationFailed("some element has no inverse")
        if not np.all(t[self.inv_table, ar] == self.identity):
            raise ValidationFailed("left inverses fail")
        if n <= ASSOC_CHECK_LIMIT:
            for a in range(n):
                # (a b) c == a (b c) for all b, c
                if not np.array_equal(t[t[a]][:, :], t[a][t]):
                    raise ValidationFailed(f"associativity fails with a={a}")

    # lamp-group surface
    def mul(self, a, b):
        return int(self.table[a, b])

    def inv(self, a):
        return int(self.inv_table[a])

    def key(self, a):
        return str(int(a))

    def contains(self, a):
        return isinstance(a, (int, np.integer)) and 0 <= a < self.order

    def elements(self):
        return range(self.order)

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroupTable({self.name!r}, order={self.order})"

    # helpers
    def index_of(self, label):
        if self._label_index is None:
            self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        return self._label_index[label]

    def conj(self, a, g):
        """g a g^-1"""
        return self.mul(self.mul(g, a), self.inv(g))

    def commutator(self, a, b):
        """[a, b] = a b a^-1 b^-1"""
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def element_order(self, a):
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def subgroup_closure(self, gens: Iterable[int]) -> list[int]:
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def normal_closure(self, elems: Iterable[int]) -> list[int]:
        """Smallest normal subgroup containing ``elems``."""
        elems = set(elems)
        conj_set = set()
        for x in elems:
            for g in range(self.order):
                conj_set.add(self.conj(x, g))
        return self.subgroup_closure(conj_set)

    def is_normal(self, sub: Iterable[int]) -> bool:
        s = set(sub)
        return all(self.conj(x, g) in s for x in s for g in range(self.order))

    def normal_subgroups(self) -> list[frozenset]:
        """All normal subgroups, as normal closures of conjugacy classes and their joins."""
        classes_nc = set()
        for x in range(self.order):
            classes_nc.add(frozenset(self.normal_closure([x])))
        found = set(classes_nc)
        frontier = list(found)
        while frontier:
            nxt = []
            for a in frontier:
                for b in classes_nc:
                    j = frozenset(self.subgroup_closure(a | b))
                    if j not in found:
                        found.add(j)
                        nxt.append(j)
            frontier = nxt
        return sorted(found, key=len)

    def is_simple(self) -> bool:
        return self.order > 1 and len(self.normal_subgroups()) == 2


def table_from_permutations(generators, cap=DEFAULT_ORDER_CAP, name="G", marked=None,
                            base=None) -> FiniteGroupTable:
    """Close a list of permutations (image tuples on {0..n-1}) under composition.

    Products follow :func:`compose` (apply the left factor first).  The
    generators are recorded under ``marked["gens"]``; any extra ``marked``
    entries may name subsets by their permutation tuples.
    """
    gens = [tuple(int(i) for i in g) for g in generators]
    if not gens:
        raise ValidationFailed("need at least one generator")
    n = len(gens[0])
    if any(len(g) != n for g in gens):
        raise GroupMismatch("generators act on domains of different size")
    for g in gens:
        if sorted(g) != list(range(n)):
            raise ValidationFailed(f"{g} is not a permutation")
    ident = tuple(range(n))
    index = {ident: 0}
    labels = [ident]
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = compose(x, g)
            if y not in index:
                if len(labels) >= cap:
                    raise ClosureOverflow(f"group order exceeds cap {cap}")
                index[y] = len(labels)
                labels.append(y)
                queue.append(y)
    order = len(labels)
    # composing as index arrays: row a of the table is labels[a] followed by every b
    perms = np.array(labels, dtype=np.int64)
    keys = {lab: i for i, lab in enumerate(labels)}
    table = np.empty((order, order), dtype=np.int64)
    for a in range(order):
        prod = perms[:, perms[a]]  # prod[b][i] = labels[b][labels[a][i]] = compose(a, b)[i]
        table[a] = [keys[tuple(row)] for row in prod.tolist()]
    mk = {"gens": [index[g] for g in gens]}
    for k, v in (marked or {}).items():
        mk[k] = [index[tuple(p)] if not isinstance(p, int) else p for p in v]
    return FiniteGroupTable(table, labels=labels, identity=0, marked=mk, name=name)


def cyclic_group(m: int, name=None) -> FiniteGroupTable:
    ar = np.arange(m)
    table = (ar[:, None] + ar[None, :]) % m
    return FiniteGroupTable(table, labels=list(range(m)), identity=0,
                            marked={"gens": [1 % m]}, name=name or f"Z/{m}")


def symmetric_group(n: int, name=None) -> FiniteGroupTable:
    gens = [cycles_to_perm([[1, 2]], n)]
    if n > 2:
        gens.append(cycles_to_perm([list(range(1, n + 1))], n))
    if n == 1:
        gens = [tuple([0])]
    return table_from_permutations(gens, name=name or f"Sym({n})")


def dihedral_group(n: int, name=None) -> FiniteGroupTable:
    """Dihedral group of order 2n acting on the n-gon, generated by two reflections.

    ``marked["A"]`` and ``marked["B"]`` are the two order-2 subgroups
    generated by adjacent reflections ``a`` and ``b`` (so ``ab`` is a rotation
    by one step).
    """
    a = tuple((-i) % n for i in range(n))
    b = tuple((1 - i) % n for i in range(n))
    g = table_from_permutations([a, b], name=name or f"D{2 * n}")
    ia, ib = g.index_of(a), g.index_of(b)
    g.marked["A"] = [g.identity, ia]
    g.marked["B"] = [g.identity, ib]
    g.marked["a"] = [ia]
    g.marked["b"] = [ib]
    return g


def direct_product_table(g: FiniteGroupTable, h: FiniteGroupTable, name=None) -> FiniteGroupTable:
    n, m = g.order, h.order
    gi = np.repeat(np.arange(n), m)
    hi = np.tile(np.arange(m), n)
    table = g.table[gi[:, None], gi[None, :]] * m + h.table[hi[:, None], hi[None, :]]
    labels = [(g.labels[a], h.labels[b]) for a, b in zip(gi.tolist(), hi.tolist())]
    return FiniteGroupTable(table, labels=labels, identity=g.identity * m + h.identity,
                            name=name or f"{g.name}x{h.name}", check=(n * m <= ASSOC_CHECK_LIMIT))


class IntegerGroup:
    """The integers under addition, used as an infinite lamp group."""

    identity = 0
    name = "Z"

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def key(self, a):
        return str(a)

    def contains(self, a):
        return isinstance(a, (int, np.integer)) and not isinstance(a, bool)

    def __repr__(self):
        return "IntegerGroup()"


class DInfinity:
    """Infinite dihedral group <a, b | a^2, b^2>.

    Element ``(m, e)`` stands for ``r^m a^e`` with ``r = ab``.  So
    ``a = (0, 1)``, ``b = (-1, 1)`` and the commutator ``abab = r^2 = (2, 0)``.
    """

    identity = (0, 0)
    name = "Dinf"
    a = (0, 1)
    b = (-1, 1)

    def mul(self, x, y):
        m, e = x
        n, f = y
        return (m + (n if e == 0 else -n), (e + f) % 2)

    def inv(self, x):
        m, e = x
        return (-m, 0) if e == 0 else x

    def key(self, x):
        return f"r{x[0]}" + ("a" if x[1] else "")

    def contains(self, x):
        return isinstance(x, tuple) and len(x) == 2 and x[1] in (0, 1)

    def to_ab(self, x):
        """Image in A x B = Z/2 x Z/2 under a -> (1,0), b -> (0,1)."""
        m, e = x
        return ((m + e) % 2, m % 2)

    def in_kernel(self, x):
        return self.to_ab(x) == (0, 0)

    def __repr__(self):
        return "DInfinity()"
