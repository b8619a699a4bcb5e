"""Diagonal products with prescribed FC-center, embedding generators, and
the total-variation plateau for lazy lamplighter walks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

from .errors import CapExceeded, ConfigError, MetricUnavailable, ValidationFailed
from .groups.delta import DiagonalProduct, FactorData
from .groups.finite import (DInfinity, FiniteGroupTable, cyclic_group, dihedral_group,
                            symmetric_group, table_from_permutations, cycles_to_perm)
from .groups.metric import ball
from .groups.wreath import WreathProduct, lamplighter
from .walks.lampexact import LampExactEngine


# relative abelianization

@dataclass
class AbelianizationReport:
    ok: bool
    closure_order: int
    quotient_order: int
    image_order: int
    target_order: int
    to_ab: dict = field(default_factory=dict, repr=False)


def validate_relative_abelianization(gamma: FiniteGroupTable, A, B) -> AbelianizationReport:
    """Check Gamma / <<[A, B]>> is A x B via (a, b) -> ab.

    ``A`` and ``B`` are the element lists of the two marked subgroups.  The
    normal closure N of the commutators is found by conjugation closure;
    the quotient is enumerated by cosets.  The map (a, b) -> abN must hit
    |A||B| distinct cosets and exhaust the quotient.
    """
    A, B = list(dict.fromkeys(A)), list(dict.fromkeys(B))
    comms = [gamma.commutator(a, b) for a in A for b in B]
    N = gamma.normal_closure(comms)
    coset_of = {}
    reps = []
    for g in gamma.elements():
        if g in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for n in N:
            coset_of[gamma.mul(g, n)] = idx
    images = {}
    for a in A:
        for b in B:
            images.setdefault(coset_of[gamma.mul(a, b)], (a, b))
    target = len(A) * len(B)
    ok = len(images) == target == len(reps)
    to_ab = {}
    if ok:
        for g in gamma.elements():
            to_ab[g] = images[coset_of[g]]
    return AbelianizationReport(ok, len(N), len(reps), len(images), target, to_ab)


# diagonal products

@dataclass
class DeltaSpec:
    """Factors G_s = gammas[s] wr Z/ms[s] with identifications A -> A(s), B -> B(s)."""

    ks: tuple
    ms: tuple
    gammas: list
    A: FiniteGroupTable
    B: FiniteGroupTable
    alphas: list  # per s: dict A element -> Gamma_s element
    betas: list
    S_max: int | None = None
    name: str = "delta"


def _check_iso(src: FiniteGroupTable, dst, mapping: dict, s: int, label: str):
    elems = src.elements()
    if set(mapping) | {src.identity} != set(elems):
        raise ValidationFailed(f"factor {s}: {label} identification is not defined on all of {label}", index=s)
    m = dict(mapping)
    m.setdefault(src.identity, dst.identity)
    if m[src.identity] != dst.identity:
        raise ValidationFailed(f"factor {s}: {label} identification moves the identity", index=s)
    if len(set(m.values())) != len(elems):
        raise ValidationFailed(f"factor {s}: {label} identification is not injective", index=s)
    for x in elems:
        for y in elems:
            if m[src.mul(x, y)] != dst.mul(m[x], m[y]):
                raise ValidationFailed(f"factor {s}: {label} identification is not a homomorphism", index=s)
    return m


def _dinf_to_ab(alpha, beta, A, B):
    # D_inf = <a, b>; the abelianization map sends a -> A gen, b -> B gen
    a_gen = next(x for x in A.elements() if x != A.identity)
    b_gen = next(x for x in B.elements() if x != B.identity)
    if A.order != 2 or B.order != 2 or alpha[a_gen] != DInfinity.a or beta[b_gen] != DInfinity.b:
        raise ValidationFailed("D_inf factors need A = B = Z/2 marked by a and b")

    def to_ab(x):
        ea, eb = DInfinity().to_ab(x)
        return (a_gen if ea else A.identity, b_gen if eb else B.identity)
    return to_ab


def build_delta(spec: DeltaSpec) -> DiagonalProduct:
    S = spec.S_max or len(spec.ks)
    ks, ms = list(spec.ks)[:S], list(spec.ms)[:S]
    if len(ks) < S or len(ms) < S or len(spec.gammas) < S:
        raise ValidationFailed("fewer factor parameters than S_max")
    for s in range(1, S):
        if not (ks[s] > ks[s - 1] and ms[s] > ms[s - 1]):
            raise ValidationFailed(f"k and m must be strictly increasing (factor {s + 1})", index=s + 1)
    factors = []
    for s in range(1, S + 1):
        k, m, gamma = ks[s - 1], ms[s - 1], spec.gammas[s - 1]
        if k < 1:
            raise ValidationFailed(f"k_{s} must be positive", index=s)
        if m < 2 * k:
            raise ValidationFailed(f"m_{s} = {m} < 2 k_{s} = {2 * k}", index=s)
        alpha, beta = spec.alphas[s - 1], spec.betas[s - 1]
        if isinstance(gamma, DInfinity):
            to_ab = _dinf_to_ab(alpha, beta, spec.A, spec.B)
            alpha = {**alpha, spec.A.identity: gamma.identity}
            beta = {**beta, spec.B.identity: gamma.identity}
        else:
            alpha = _check_iso(spec.A, gamma, alpha, s, "A")
            beta = _check_iso(spec.B, gamma, beta, s, "B")
            rep = validate_relative_abelianization(gamma, list(alpha.values()), list(beta.values()))
            if not rep.ok:
                raise ValidationFailed(
                    f"factor {s}: quotient by [A,B] has order {rep.quotient_order}, "
                    f"image of A x B has {rep.image_order}, expected {rep.target_order}", index=s)
            inv_a = {v: a for a, v in alpha.items()}
            inv_b = {v: b for b, v in beta.items()}
            table = {g: (inv_a[x], inv_b[y]) for g, (x, y) in rep.to_ab.items()}
            to_ab = table.__getitem__
        factors.append(FactorData(gamma, k, m, alpha, beta, to_ab))
    return DiagonalProduct(spec.A, spec.B, factors, name=spec.name)


def delta_d8_spec(S_max=2) -> DeltaSpec:
    """A = B = Z/2, Gamma_s = D8 marked by two adjacent reflections, k = (1, 2), m = (4, 8)."""
    Z2 = cyclic_group(2)
    d8 = dihedral_group(4)
    a, b = d8.marked["a"][0], d8.marked["b"][0]
    return DeltaSpec((1, 2), (4, 8), [d8, d8], Z2, Z2, [{1: a}, {1: a}], [{1: b}, {1: b}],
                     S_max=S_max, name="delta-d8")


def dinfty_delta_preset(S_max=2) -> DiagonalProduct:
    """A = B = Z/2 and Gamma_s = D_inf; ker(Gamma_s -> A x B) = <abab>."""
    Z2 = cyclic_group(2)
    D = DInfinity()
    spec = DeltaSpec((1, 2), (4, 8), [D, D], Z2, Z2, [{1: D.a}, {1: D.a}], [{1: D.b}, {1: D.b}],
                     S_max=S_max, name="delta-dinfty")
    return build_delta(spec)


# FC-center

@dataclass
class ClassResult:
    size: int
    members: list = field(repr=False)


def fc_class(delta, elem, cap=10_000) -> ClassResult:
    """Closure of {elem} under conjugation by the marked generators and their inverses.

    Raises CapExceeded once more than ``cap`` conjugates are found; that is
    evidence of an infinite class, not a proof.
    """
    gens = list(delta.generator_list())
    invs = [delta.inv(g) for g in gens]
    seen = {elem}
    frontier = [elem]
    mul = delta.mul
    while frontier:
        nxt = []
        for x in frontier:
            for g, gi in zip(gens, invs):
                y = mul(mul(g, x), gi)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise CapExceeded(f"conjugacy class exceeds {cap} (suspected infinite)")
        frontier = nxt
    return ClassResult(len(seen), list(seen))


def d8_kernel_generator(delta: DiagonalProduct, s=1):
    """The central rotation r^2 in the D8 factor s: it generates ker(D8 -> A x B)."""
    f = delta.factors[s - 1]
    g = f.gamma
    rep = validate_relative_abelianization(g, list(f.alpha.values()), list(f.beta.values()))
    kern = [x for x, ab in rep.to_ab.items() if ab == (delta.A.identity, delta.B.identity) and x != g.identity]
    return kern[0]


# speed lower bound

class DeltaMetric:
    """Per-factor word lengths in G_s with the marked generators, by BFS to ``radius``.

    ``lower_bound(x)`` is the max over factors; each projection is
    1-Lipschitz, so it bounds the word length in the diagonal product.
    """

    def __init__(self, delta: DiagonalProduct, radius=6, cap=2_000_000):
        self.delta = delta
        self.radius = radius
        gens = delta.generator_list()
        self.balls = []
        for s, w in enumerate(delta.wreaths):
            fgens = [x.comps[s] for x in gens]
            self.balls.append(ball(w, fgens, radius, cap=cap))

    def factor_length(self, x, s):
        d = self.balls[s - 1].get(x.comps[s - 1])
        if d is None:
            raise MetricUnavailable(f"factor {s} component beyond BFS radius {self.radius}")
        return d

    def lower_bound(self, x) -> int:
        return max(self.factor_length(x, s) for s in range(1, self.delta.S + 1))


def speed_lower_bound(delta_elem, metric: DeltaMetric) -> int:
    return metric.lower_bound(delta_elem)


# embedding generators and copies

@dataclass
class EmbeddingSpec:
    F: FiniteGroupTable
    involutions: list  # element indices c_1..c_s
    ks: tuple
    check_doubling: bool = True

    def __post_init__(self):
        if len(self.involutions) != len(self.ks):
            raise ValidationFailed("one k per involution")
        for i, c in enumerate(self.involutions, 1):
            if self.F.element_order(c) != 2:
                raise ValidationFailed(f"c_{i} does not have order 2", index=i)
        for i in range(1, len(self.ks)):
            if self.ks[i] <= self.ks[i - 1]:
                raise ValidationFailed("k must be strictly increasing", index=i + 1)
        if self.check_doubling and not self.doubling:
            raise ValidationFailed("doubling condition k_{s+1} > 2 k_s fails")

    @property
    def doubling(self) -> bool:
        return all(self.ks[i + 1] > 2 * self.ks[i] for i in range(len(self.ks) - 1))

    @property
    def group(self) -> WreathProduct:
        return lamplighter(self.F)


def nnc_generator(spec: EmbeddingSpec):
    """f in F wr Z with f(k_s) = c_s, cursor at 0."""
    G = spec.group
    return G.element(dict(zip(spec.ks, spec.involutions)), 0)


def translated_copy(G: WreathProduct, f, m: int):
    """f^(m) = t^-m f t^m, the configuration z -> f(z + m)."""
    return G.conj(f, G.shift(-m))


@dataclass
class CopyReport:
    ok: bool
    support: tuple
    value: object
    expected: object


def copy_check(spec: EmbeddingSpec, expression) -> CopyReport:
    """Evaluate prod_j [f^(k_{s_j}), f^(k_{r_j})] and compare with (c delta_0, 0),
    c = prod_j [c_{s_j}, c_{r_j}].  Indices in ``expression`` are 1-based."""
    G, F = spec.group, spec.F
    f = nnc_generator(spec)
    n = len(spec.ks)
    out = G.identity
    c = F.identity
    for s, r in expression:
        if not (1 <= s <= n and 1 <= r <= n):
            raise ConfigError(f"index pair {(s, r)} outside 1..{n}")
        u = translated_copy(G, f, spec.ks[s - 1])
        v = translated_copy(G, f, spec.ks[r - 1])
        out = G.mul(out, G.mul(G.mul(u, v), G.mul(G.inv(u), G.inv(v))))
        c = F.mul(c, F.commutator(spec.involutions[s - 1], spec.involutions[r - 1]))
    expected = G.element({0: c}, 0)
    return CopyReport(out == expected, out.support, out, expected)


def s3_embedding(ks=(1, 3)) -> EmbeddingSpec:
    """F = Sym(3) with c_1 = (1 2), c_2 = (1 3), and (2 3) appended when three k's are given."""
    F = symmetric_group(3)
    cs = [F.index_of(cycles_to_perm([[1, 2]], 3)), F.index_of(cycles_to_perm([[1, 3]], 3)),
          F.index_of(cycles_to_perm([[2, 3]], 3))][:len(ks)]
    tmp = EmbeddingSpec(F, cs, tuple(ks), check_doubling=False)
    return EmbeddingSpec(F, cs, tuple(ks), check_doubling=tmp.doubling)


def hall_chain():
    """L_1 = Z/3, L_2 = Sym(3), L_3 = Sym(6) as tables."""
    return [cyclic_group(3, name="L1"), symmetric_group(3, name="L2"), symmetric_group(6, name="L3")]


def generated_is_simple(spec: EmbeddingSpec) -> bool:
    F = spec.F
    sub = F.subgroup_closure(spec.involutions)
    perms = [F.labels[x] for x in sub]
    H = table_from_permutations(perms)
    return H.is_simple()


# plateau

@dataclass
class PlateauResult:
    delta: Fraction
    series: list  # (n, m, tv) with m = n + ceil(delta n)
    c_hat: Fraction


def plateau_measure_steps(F: FiniteGroupTable):
    """1/4 t + 1/4 t^-1 + 1/2 uniform(F at the cursor), identity included."""
    q = Fraction(1, 2 * F.order)
    steps = [((), 1, Fraction(1, 4)), ((), -1, Fraction(1, 4))]
    for v in F.elements():
        lamps = () if v == F.identity else ((0, v),)
        steps.append((lamps, 0, q))
    return steps


def plateau_experiment(F: FiniteGroupTable, delta, n_max: int, cap=50_000_000) -> PlateauResult:
    delta = Fraction(delta)
    if delta < 0 or n_max < 0:
        raise ConfigError("delta and n_max must be non-negative")
    top = n_max + ceil(delta * n_max)
    eng = LampExactEngine(F, plateau_measure_steps(F), top)
    states = []
    st = eng.initial()
    states.append(st)
    for _ in range(top):
        st = eng.step(st, cap=cap)
        states.append(st)
    series = []
    for n in range(n_max + 1):
        m = n + ceil(delta * n)
        series.append((n, m, eng.tv(states[n], states[m])))
    lo = n_max // 2
    c_hat = 1 - max(tv for n, _, tv in series if n >= lo)
    return PlateauResult(delta, series, c_hat)


PRESETS = {
    "delta-d8": "diagonal product, A = B = Z/2, Gamma = D8, k = (1,2), m = (4,8)",
    "delta-dinfty": "diagonal product with Gamma_s = D_inf, k = (1,2), m = (4,8)",
    "embed-s3": "Sym(3) with c_1 = (1 2), c_2 = (1 3), k = (1,3)",
    "plateau-z2": "lazy lamplighter walk on Z/2 wr Z, 1/4 t^(+-1) + 1/2 uniform lamp",
}
