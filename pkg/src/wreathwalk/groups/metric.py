"""Word metrics: breadth-first search on Cayley graphs and the closed form
for lamplighters over the line."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import GroupMismatch, MemoryCap

DEFAULT_BALL_CAP = 2_000_000


@dataclass(frozen=True)
class Unreached:
    radius_cap: int

    def __bool__(self):
        return False


def ball(group, gens, radius, cap=DEFAULT_BALL_CAP, start=None) -> dict:
    """Map element -> distance for the ball of given radius around ``start``."""
    start = group.identity if start is None else start
    dist = {start: 0}
    frontier = [start]
    mul = group.mul
    for r in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in dist:
                    dist[y] = r
                    nxt.append(y)
        if len(dist) > cap:
            raise MemoryCap(f"ball of radius {r} exceeds {cap} elements")
        frontier = nxt
        if not frontier:
            break
    return dist


def check_symmetric(group, gens):
    s = set(gens)
    for g in gens:
        if group.inv(g) not in s:
            raise GroupMismatch("generating list is not symmetric")


def word_length_bfs(group, e, gens, radius_cap, cap=DEFAULT_BALL_CAP):
    """Exact Cayley distance from the identity to ``e``, or ``Unreached(radius_cap)``."""
    check_symmetric(group, gens)
    if e == group.identity:
        return 0
    seen = {group.identity}
    frontier = [group.identity]
    for r in range(1, radius_cap + 1):
        nxt = []
        for x in frontier:
            for g in gens:
                y = group.mul(x, g)
                if y == e:
                    return r
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > cap:
            raise MemoryCap(f"ball of radius {r} exceeds {cap} elements")
        frontier = nxt
    return Unreached(radius_cap)


def lamplighter_line_travel(sites, x: int) -> int:
    """Shortest tour on Z from 0 visiting every site in ``sites`` and ending at x."""
    pts = list(sites) + [0, x]
    lo, hi = min(pts), max(pts)
    return (hi - lo) + min((0 - lo) + (hi - x), (hi - 0) + (x - lo))


def word_length_lamplighter_line(e) -> int:
    """Word length in F wr Z for generators t^{+-1} and the nontrivial lamps at the cursor.

    Each nonzero lamp costs one generator; the cursor must travel from 0 to
    every lit site and finish at its position.
    """
    return len(e.lamps) + lamplighter_line_travel(e.support, e.pos)


def lamplighter_generators(group):
    """t, t^-1 and every nontrivial lamp value at the origin."""
    lamp = group.lamp
    gens = [group.shift(1), group.shift(-1)]
    gens += [group.lamp_at(0, v) for v in lamp.elements() if v != lamp.identity]
    return gens
