"""Couplings of two random walks that differ by an element of a finite
normal subgroup (or of a finite conjugacy class) of the kernel of phi.

Walks run in steps of mu^(R).  The state tracked is the difference
D_n = Z~_n^-1 gamma Z_n; the walks have coupled once D_n is the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, InfiniteClassSuspected, InvariantViolation
from .groups.wreath import CyclicBase, WreathProduct
from .rng import blocks, make_rng
from .walks.measure import Measure, convolve_exact, mixture, uniform
from .walks.simulate import Sampler, projected_law


@dataclass(frozen=True)
class NotCoupled:
    horizon: int

    def __bool__(self):
        return False


def _level_maps(group):
    """phi, lift and the modulus of levels (0 for Z)."""
    if isinstance(group, WreathProduct) and isinstance(group.base, CyclicBase):
        return (lambda g: g.pos), group.shift, group.base.m
    return group.phi, group.lift, 0


@dataclass
class CouplingConfig:
    group: object
    mu: Measure
    F: tuple
    R: int
    gamma: object
    x: int
    mu_R: Measure = field(repr=False)
    epsilon: Fraction
    residual: Measure = field(repr=False)
    modulus: int = 0

    @classmethod
    def build(cls, group, mu: Measure, F, R: int, gamma, x: int, check_normal=True,
              require_srw=True, truncation_cap=2_000_000):
        """Validate every hypothesis exactly and materialize the case-(b) law."""
        F = tuple(dict.fromkeys(F))
        Fset = set(F)
        phi, lift, mod = _level_maps(group)
        if group.identity not in Fset:
            raise ConfigError("F must contain the identity")
        for a in F:
            if phi(a) != 0:
                raise ConfigError("F must lie in the kernel of phi")
            for b in F:
                if group.mul(a, b) not in Fset:
                    raise ConfigError("F is not closed under multiplication")
        if require_srw:
            vals, w, den = projected_law(mu)
            if list(vals) != [-1, 1] or w[0] * 2 != den or w[1] * 2 != den:
                raise ConfigError("projection of mu to Z must be the simple random walk")
        mu_R = convolve_exact(mu, R, truncation_cap)
        missing = [a for a in F if mu_R.weights.get(a, 0) == 0]
        if missing:
            raise ConfigError(f"{len(missing)} element(s) of F are outside supp mu^({R})")
        eps = len(F) * min(mu_R[a] for a in F)
        if not 0 < eps <= 1:
            raise ConfigError(f"epsilon = {eps} is not in (0, 1]")
        uF = uniform(group, F)
        if eps < 1:
            residual = mixture([(1 / (1 - eps), mu_R), (-eps / (1 - eps), uF)])
            if any(w < 0 for w in residual.weights.values()):
                raise ConfigError("residual (mu^(R) - eps u_F)/(1 - eps) has a negative atom")
            if mixture([(1 - eps, residual), (eps, uF)]) != mu_R:
                raise ConfigError("mixture identity fails")
        else:
            residual = Measure(group, {}, 1)
        if check_normal:
            for g in mu_R.weights:
                if phi(g) == 0 and {group.conj(a, g) for a in F} != Fset:
                    raise ConfigError("F is not normalized by the kernel part of supp mu^(R)")
            # F^x must not depend on the lift of x
            k = next((g for g in mu_R.weights if phi(g) == 0 and g != group.identity), group.identity)
            l1, l2 = lift(x), group.mul(k, lift(x))
            if {group.conj(a, l1) for a in F} != {group.conj(a, l2) for a in F}:
                raise ConfigError("F^x depends on the lift")
        cfg = cls(group, mu, F, R, gamma, x, mu_R, eps, residual, mod)
        if not cfg.in_level_set(gamma, x):
            raise ConfigError("gamma is not in F^x")
        return cfg

    def in_level_set(self, d, y) -> bool:
        """d in F^y = lift(y) F lift(y)^-1."""
        _, lift, _ = _level_maps(self.group)
        g = self.group
        ly = lift(y)
        return g.mul(g.mul(g.inv(ly), d), ly) in set(self.F)

    def on_level(self, level) -> bool:
        if self.modulus:
            return (level - self.x) % self.modulus == 0
        return level == self.x


@dataclass
class CouplingRecord:
    tau: object  # int or NotCoupled
    tau_r: int | None
    case_tags: list
    difference_trace: list
    projections: list
    seed: int
    stream: tuple
    increments: list = field(default_factory=list, repr=False)
    mirrored: list = field(default_factory=list, repr=False)
    first: str | None = None

    @property
    def coupled(self) -> bool:
        return not isinstance(self.tau, NotCoupled)

    def to_dict(self, group) -> dict:
        return {"tau": self.tau if self.coupled else f"not_coupled({self.tau.horizon})",
                "tau_r": self.tau_r, "first": self.first, "seed": self.seed,
                "case_tags": "".join(t[0] if t != "post" else "p" for t in self.case_tags),
                "difference_trace": [group.key(d) for d in self.difference_trace],
                "projections": self.projections}


def couple_main(cfg: CouplingConfig, horizon: int, seed: int, stream=(), stop_at_tau=False,
                exit_radius=None, keep_increments=False) -> CouplingRecord:
    """Run the paired walk for ``horizon`` steps of mu^(R).

    Tags: ``a`` off-level copy, ``b`` on-level residual copy, ``c`` on-level
    uniform F draw with mirrored increment, ``post`` after coupling.
    Every step checks phi-synchronization and D_n in F^{x - phi(Z_n)}.
    """
    g = cfg.group
    mul, inv = g.mul, g.inv
    phi, lift, _ = _level_maps(g)
    rng = make_rng(seed, 20, *stream)
    s_mu, s_res = Sampler(cfg.mu_R), (Sampler(cfg.residual) if cfg.residual.weights else None)
    n = horizon
    p, q = cfg.epsilon.numerator, cfg.epsilon.denominator
    chunk = max(1, min(4096, horizon))

    def draws():
        # lazily, so huge horizons with early stopping stay cheap
        while True:
            i_mu = s_mu.indices(rng, chunk)
            i_res = s_res.indices(rng, chunk) if s_res else i_mu
            i_F = rng.integers(0, len(cfg.F), size=chunk)
            u = rng.integers(0, q, size=chunk)
            yield from zip(i_mu.tolist(), i_res.tolist(), i_F.tolist(), u.tolist())

    Fset = set(cfg.F)
    e = g.identity
    D = cfg.gamma
    level = 0  # phi(Z_n); phi(Z~_n) tracked separately as a check
    level_t = 0
    tags, diffs, projs = [], [D], [0]
    inc, mir = [], []
    tau = 0 if D == e else None
    tau_r = None
    first = None

    def check(step, D, level, level_t):
        if level != level_t:
            raise InvariantViolation(f"phi desynchronized at step {step}", step=step)
        if tau is None:
            y = cfg.x - level
            ly = lift(y)
            if mul(mul(inv(ly), D), ly) not in Fset:
                raise InvariantViolation(f"difference left F^{y} at step {step}", step=step)

    check(0, D, level, level_t)
    if exit_radius is not None and tau == 0:
        first = "tau"
    src = draws()
    for k in range(n):
        if (stop_at_tau and tau is not None) or first is not None:
            break
        j_mu, j_res, j_F, uk = next(src)
        if tau is not None:
            X = s_mu.elements[j_mu]
            Xt, tag = X, "post"
        elif not cfg.on_level(level):
            X = s_mu.elements[j_mu]
            Xt, tag = X, "a"
        elif uk >= p:
            X = s_res.elements[j_res]
            Xt, tag = X, "b"
        else:
            X = cfg.F[j_F]
            Xt, tag = mul(D, X), "c"
        D = mul(mul(inv(Xt), D), X)
        level += phi(X)
        level_t += phi(Xt)
        tags.append(tag)
        diffs.append(D)
        projs.append(level)
        if keep_increments:
            inc.append(X)
            mir.append(Xt)
        if tau is None and D == e:
            tau = k + 1
        check(k + 1, D, level, level_t)
        if exit_radius is not None:
            if tau is not None and first is None:
                first = "tau"
            elif abs(level) > exit_radius:
                tau_r, first = k + 1, "exit"
    rec = CouplingRecord(tau if tau is not None else NotCoupled(horizon), tau_r, tags, diffs, projs,
                         seed, tuple(stream), inc, mir, first)
    return rec


def couple_until_exit(cfg: CouplingConfig, r: int, seed: int, stream=(), horizon=10**7) -> CouplingRecord:
    """Run until min(tau, tau_r), tau_r the exit time of [-r, r] by phi(Z_n)."""
    if abs(cfg.x) * 2 > r:
        raise ConfigError("need |x| <= r/2")
    return couple_main(cfg, horizon, seed, stream, stop_at_tau=True, exit_radius=r)


# vectorized laws of tau: tau only depends on the projected walk and the
# Bernoulli(eps) draws at on-level times.  After a failed attempt the step
# follows the projected residual law, not mu^(R).  Cross-checked against
# couple_main in tests.

def _proj_arrays(m: Measure):
    vals, w, den = projected_law(m)
    cum = np.cumsum(np.array(w, dtype=np.int64))
    return vals, cum, den


def _projected_paths(cfg: CouplingConfig, rng, A: int, c: int):
    vals, cum, den = _proj_arrays(cfg.mu_R)
    smu = vals[np.searchsorted(cum, rng.integers(0, den, size=(A, c)), side="right")]
    if cfg.residual.weights:
        rv, rc, rd = _proj_arrays(cfg.residual)
        sres = rv[np.searchsorted(rc, rng.integers(0, rd, size=(A, c)), side="right")]
    else:
        sres = smu
    u = rng.integers(0, cfg.epsilon.denominator, size=(A, c))
    return smu, sres, u < cfg.epsilon.numerator


def _on_level(cfg, pos):
    if cfg.modulus:
        return (pos - cfg.x) % cfg.modulus == 0
    return pos == cfg.x


def sample_tau(cfg: CouplingConfig, trials: int, horizon: int, seed: int, block=20_000,
               chunk=256) -> np.ndarray:
    """Coupling times (horizon + 1 stands for not coupled by ``horizon``)."""
    out = np.full(trials, horizon + 1, dtype=np.int64)
    if cfg.gamma == cfg.group.identity:
        out[:] = 0
        return out
    k = 0
    for b, size in blocks(trials, block):
        rng = make_rng(seed, 21, b)
        pos = np.zeros(size, dtype=np.int64)
        alive = np.arange(size)
        res = np.full(size, horizon + 1, dtype=np.int64)
        t0 = 0
        while t0 < horizon and len(alive):
            c = min(chunk, horizon - t0)
            smu, sres, win = _projected_paths(cfg, rng, len(alive), c)
            done = np.zeros(len(alive), dtype=bool)
            for j in range(c):
                onl = _on_level(cfg, pos)
                hit = onl & win[:, j] & ~done
                res[alive[hit]] = t0 + j + 1
                done |= hit
                pos = pos + np.where(onl, sres[:, j], smu[:, j])
            pos, alive = pos[~done], alive[~done]
            t0 += c
        out[k:k + size] = res
        k += size
    return out


def tail_profile(cfg: CouplingConfig, ns, trials: int, seed: int, taus=None):
    """Rows (n, p_hat, stderr, sqrt_n_times_p) for P(tau > n)."""
    ns = sorted(int(n) for n in ns)
    if taus is None:
        taus = sample_tau(cfg, trials, ns[-1], seed)
    rows = []
    for n in ns:
        p = float((taus > n).mean())
        se = math.sqrt(p * (1 - p) / len(taus))
        rows.append((n, p, se, math.sqrt(n) * p))
    return rows


def exit_profile(cfg: CouplingConfig, rs, trials: int, seed: int, block=20_000, chunk=256):
    """Rows (r, p_hat, stderr, r_times_p) for P(tau > tau_r)."""
    rows = []
    for j, r in enumerate(rs):
        if abs(cfg.x) * 2 > r:
            raise ConfigError("need |x| <= r/2")
        lost = 0
        for b, size in blocks(trials, block):
            if cfg.gamma == cfg.group.identity:
                break
            rng = make_rng(seed, 22, j, b)
            pos = np.zeros(size, dtype=np.int64)
            while len(pos):
                smu, sres, win = _projected_paths(cfg, rng, len(pos), chunk)
                done = np.zeros(len(pos), dtype=bool)
                for i in range(chunk):
                    onl = _on_level(cfg, pos)
                    hit = onl & win[:, i] & ~done
                    done |= hit
                    pos = pos + np.where(onl, sres[:, i], smu[:, i])
                    out = (np.abs(pos) > r) & ~done
                    lost += int(out.sum())
                    done |= out
                pos = pos[~done]
        pr = lost / trials
        rows.append((r, pr, math.sqrt(pr * (1 - pr) / trials), r * pr))
    return rows


# finite conjugacy class coupling

def conjugacy_closure(group, elem, gens, cap=10_000):
    seen = {elem}
    frontier = [elem]
    invs = [group.inv(g) for g in gens]
    while frontier:
        nxt = []
        for y in frontier:
            for g, gi in zip(gens, invs):
                z = group.mul(group.mul(g, y), gi)
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
                    if len(seen) > cap:
                        raise InfiniteClassSuspected(f"conjugacy class exceeds {cap}")
        frontier = nxt
    return seen


def _cyclic(group, g):
    out = [group.identity]
    y = g
    while y != group.identity:
        out.append(y)
        y = group.mul(y, g)
        if len(out) > 10_000:
            raise InfiniteClassSuspected("element order exceeds 10000")
    return out


@dataclass
class FCConfig:
    group: object
    mu: Measure
    gamma: object
    R: int
    order: int
    conj_class: frozenset
    epsilon: Fraction
    mu_R: Measure = field(repr=False)
    residuals: dict = field(repr=False)  # frozenset C -> (Sampler, C as list)

    @classmethod
    def build(cls, group, mu: Measure, gamma, R=1, cap=10_000):
        gens = list(mu.weights)
        K = conjugacy_closure(group, gamma, gens, cap)
        order = len(_cyclic(group, gamma))
        mu_R = convolve_exact(mu, R)
        union = set()
        subgroups = {}
        for k in K:
            C = frozenset(_cyclic(group, k))
            subgroups[k] = C
            union |= C
        eps = order * min(mu_R[z] for z in union)
        if eps == 0:
            raise ConfigError(f"class of gamma is not inside supp mu^({R})")
        residuals = {}
        for C in set(subgroups.values()):
            if eps < 1:
                res = mixture([(1 / (1 - eps), mu_R), (-eps / (1 - eps), uniform(group, C))])
                if any(w < 0 for w in res.weights.values()):
                    raise ConfigError("negative residual atom")
                residuals[C] = Sampler(res)
        return cls(group, mu, gamma, R, order, frozenset(K), eps, mu_R, residuals)


def couple_fc(cfg: FCConfig, x, horizon: int, seed: int, stream=()) -> CouplingRecord:
    """Couple gamma x Z_n with x Z~_n.

    While uncoupled the difference D_n = (x Z~_n)^-1 gamma x Z_n is a
    conjugate of gamma and C = <D_n> is one of the cyclic subgroups covering
    the class.  Each step splits mu^(R) = eps u_C + (1 - eps) residual_C;
    on the eps branch X = D^s uniform on C and X~ = D X = D^(s+1), which
    makes the walks meet.  Otherwise X~ = X.  Hence tau ~ Geometric(eps).
    """
    g = cfg.group
    mul, inv = g.mul, g.inv
    rng = make_rng(seed, 23, *stream)
    p, q = cfg.epsilon.numerator, cfg.epsilon.denominator
    s_mu = Sampler(cfg.mu_R)
    D = mul(mul(inv(x), cfg.gamma), x)
    e = g.identity
    tags, diffs = [], [D]
    tau = 0 if D == e else None
    level = 0
    projs = [0]
    has_phi = hasattr(g, "phi")
    for k in range(horizon):
        if tau is not None:
            break
        if D not in cfg.conj_class:
            raise InvariantViolation(f"difference left the conjugacy class at step {k}", step=k)
        C = _cyclic(g, D)
        if int(rng.integers(0, q)) < p:
            X = C[int(rng.integers(0, len(C)))]
            Xt, tag = mul(D, X), "b"
        else:
            smp = cfg.residuals[frozenset(C)]
            X = smp.sample(rng)
            Xt, tag = X, "a"
        D = mul(mul(inv(Xt), D), X)
        tags.append(tag)
        diffs.append(D)
        if has_phi:
            level += g.phi(X)
            projs.append(level)
        if D == e:
            tau = k + 1
    return CouplingRecord(tau if tau is not None else NotCoupled(horizon), None, tags, diffs, projs,
                          seed, tuple(stream))


def fc_delta_measure(delta, kernel_elem):
    """Symmetric mu on a diagonal product: 1/8 on each of tau^(+-1), alpha, beta
    (Z/2 marks) and 1/10 on the identity and each conjugate of ``kernel_elem``.

    Requires a class of size 4, as for the D8 preset; then R = 1 and eps = 1/5.
    """
    K = conjugacy_closure(delta, kernel_elem, delta.generator_list())
    gens = delta.generator_list()
    if len(K) != 4 or len(gens) != 4:
        raise ConfigError("fc_delta_measure expects four marked generators and a class of size 4")
    atoms = {gg: Fraction(1, 8) for gg in gens}
    atoms[delta.identity] = Fraction(1, 10)
    for k in K:
        atoms[k] = Fraction(1, 10)
    return Measure.from_fractions(delta, atoms)


# non-normal demonstration

@dataclass
class NonNormalReport:
    violation_step: int | None
    tau: object
    horizon: int
    seed: int


def symz_demo_config(gamma=None, check_normal=False):
    from .groups.symz import SymZ
    G = SymZ()
    t, s = G.shift, G.transposition
    mu = Measure.from_fractions(G, {t: Fraction(1, 4), G.inv(t): Fraction(1, 4),
                                    G.mul(s, t): Fraction(1, 4), G.mul(G.inv(t), s): Fraction(1, 4)})
    F = (G.identity, s)
    return CouplingConfig.build(G, mu, F, 2, s if gamma is None else gamma, 0, check_normal=check_normal)


def non_normal_demo(seed: int, horizon=1000, gamma=None) -> NonNormalReport:
    """Run the main coupling with F = <(0 1)> in Sym(Z) x| Z; report where D_n leaves F^y."""
    cfg = symz_demo_config(gamma)
    try:
        rec = couple_main(cfg, horizon, seed)
        return NonNormalReport(None, rec.tau, horizon, seed)
    except InvariantViolation as exc:
        return NonNormalReport(exc.step, None, horizon, seed)


def lamplighter_z2_config(x=0, trivial=False):
    """(Z/2) wr Z with mu = 1/4 t + 1/4 t^-1 + 1/4 (sigma delta_0, 1) + 1/4 (sigma delta_-1, -1),
    R = 2, F = {id, sigma delta_0} and gamma = sigma delta_x (or the identity)."""
    from .groups.finite import cyclic_group
    from .groups.wreath import lamplighter
    G = lamplighter(cyclic_group(2))
    mu = ll_z2_measure(G)
    F = (G.identity, G.element({0: 1}, 0))
    gamma = G.identity if trivial else G.element({x: 1}, 0)
    return CouplingConfig.build(G, mu, F, 2, gamma, x)


def ll_z2_measure(G):
    q = Fraction(1, 4)
    return Measure.from_fractions(G, {G.shift(1): q, G.shift(-1): q, G.element({0: 1}, 1): q,
                                      G.element({-1: 1}, -1): q})


def fc_tau_sample(cfg: FCConfig, x, runs: int, horizon: int, seed: int) -> np.ndarray:
    """Coupling times of ``runs`` independent FC runs; ``horizon + 1`` marks no coupling."""
    out = np.empty(runs, dtype=np.int64)
    for i in range(runs):
        rec = couple_fc(cfg, x, horizon, seed, (i,))
        out[i] = int(rec.tau) if rec.coupled else horizon + 1
    return out


def geometric_ks_pvalue(taus, eps, seed: int) -> float:
    """KS p-value of ``taus`` against Geometric(eps) on {1, 2, ...}.

    A randomised probability integral transform turns the discrete law
    into Uniform(0, 1) exactly, so the continuous KS test applies.
    """
    from scipy import stats
    taus = np.asarray(taus, dtype=float)
    eps = float(eps)
    cdf = lambda k: 1 - (1 - eps) ** np.maximum(k, 0)  # noqa: E731
    u = make_rng(seed, 99).random(len(taus))
    pit = cdf(taus - 1) + u * (cdf(taus) - cdf(taus - 1))
    return float(stats.kstest(pit, "uniform").pvalue)
