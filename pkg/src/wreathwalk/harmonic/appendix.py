"""A nonzero harmonic cocycle on Z wr Z: b(f, g) = f, with integer lamps."""
from __future__ import annotations

from fractions import Fraction

from ..errors import SupportEscapesWindow
from ..groups.finite import IntegerGroup
from ..groups.wreath import WreathElement, lamplighter

ZWZ = lamplighter(IntegerGroup(), "Z")


def zwz_cocycle(g: WreathElement, window: int) -> dict:
    """Sparse slice x -> f(x) of b((f, h)) = f on [-window, window]."""
    for s, _ in g.lamps:
        if abs(s) > window:
            raise SupportEscapesWindow(f"lamp at {s} lies outside the window {window}")
    return {s: v for s, v in g.lamps}


def zwz_act(x: int, g: WreathElement) -> int:
    """Site index used when pulling b(g2) back under g1: pi_g psi(x) = psi(x - h)."""
    return x - g.pos


def zwz_identity_residual(g1, g2, window: int) -> int:
    """max_x |b(g1 g2)(x) - b(g1)(x) - b(g2)(x - h1)|; zero for a cocycle."""
    b12 = zwz_cocycle(ZWZ.mul(g1, g2), window)
    b1, b2 = zwz_cocycle(g1, window), zwz_cocycle(g2, window)
    worst = 0
    for x in range(-window, window + 1):
        worst = max(worst, abs(b12.get(x, 0) - b1.get(x, 0) - b2.get(zwz_act(x, g1), 0)))
    return worst


def theta_measure():
    """theta = 1/2 (mu + nu): mu the SRW on the cursor, nu the SRW on the lamp at 0."""
    q = Fraction(1, 4)
    return [(ZWZ.shift(1), q), (ZWZ.shift(-1), q), (ZWZ.lamp_at(0, 1), q), (ZWZ.lamp_at(0, -1), q)]


def theta_sum(window=4) -> dict:
    """sum_g theta(g) b(g) as a sparse slice; zero exactly."""
    out = {}
    for g, p in theta_measure():
        for x, v in zwz_cocycle(g, window).items():
            out[x] = out.get(x, 0) + p * v
    return {x: v for x, v in out.items() if v}


def random_word(rng, length):
    """Product of ``length`` letters from {t, t^-1, l, l^-1}."""
    gens = [g for g, _ in theta_measure()]
    e = ZWZ.element()
    for k in rng.integers(0, 4, size=length):
        e = ZWZ.mul(e, gens[int(k)])
    return e
