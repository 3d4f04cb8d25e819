"""Nearest-neighbor walk enumeration on the d-dimensional integer lattice.

A walk is the ordered site sequence (x_0, ..., x_n) with unit steps; a
family of N walks is compatible with a tuple of displacements (u_1, ...,
u_N) when each observable hop closes the chain cyclically:

    start(walk_{i+1}) - end(walk_i) = u_i,   walk_{N+1} = walk_1,

anchored at start(walk_1) = 0.  The final walk's endpoint is therefore
pinned to -u_N.  Enumeration is depth-first with a fixed step order
(+e_1, -e_1, +e_2, ...), so streams are deterministic; endpoint-pinned
walks are pruned by the L1-distance-versus-remaining-steps test.  Walks
are streamed, never materialized: term counts grow like (2d)^n.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .errors import ResourceLimit

DEFAULT_BUDGET = 10_000_000

Site = tuple[int, ...]


def _steps(d: int) -> list[Site]:
    out = []
    for axis in range(d):
        for sign in (1, -1):
            step = [0] * d
            step[axis] = sign
            out.append(tuple(step))
    return out


def _add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def _neg(a: Site) -> Site:
    return tuple(-x for x in a)


def _l1(a: Site, b: Site) -> int:
    return sum(abs(x - y) for x, y in zip(a, b))


@dataclass(frozen=True)
class LatticeWalk:
    sites: tuple[Site, ...]

    def __post_init__(self):
        if len(self.sites) < 1:
            raise ValueError("walk needs at least its starting site")
        d = len(self.sites[0])
        for a, b in zip(self.sites, self.sites[1:]):
            if len(b) != d or _l1(a, b) != 1:
                raise ValueError(f"non-unit step {a} -> {b}")

    @property
    def length(self) -> int:
        return len(self.sites) - 1

    @property
    def start(self) -> Site:
        return self.sites[0]

    @property
    def end(self) -> Site:
        return self.sites[-1]

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.sites)

    def visit_counts(self) -> Counter:
        return Counter(self.sites)


@dataclass(frozen=True)
class NPathFamily:
    walks: tuple[LatticeWalk, ...]
    offsets: tuple[Site, ...]

    def __post_init__(self):
        n = len(self.walks)
        if n != len(self.offsets):
            raise ValueError("need one displacement per walk")
        for i in range(n):
            nxt = self.walks[(i + 1) % n]
            gap = tuple(a - b for a, b in zip(nxt.start, self.walks[i].end))
            if gap != tuple(self.offsets[i]):
                raise ValueError(
                    f"incompatible family: start(walk_{i + 2}) - end(walk_{i + 1})"
                    f" = {gap}, expected {self.offsets[i]}")

    @property
    def total_length(self) -> int:
        return sum(w.length for w in self.walks)

    @property
    def start(self) -> Site:
        return self.walks[0].start

    @property
    def end(self) -> Site:
        return self.walks[-1].end

    @property
    def is_closed(self) -> bool:
        zero = (0,) * len(self.start)
        return self.start == zero and self.end == zero

    def vertices(self) -> frozenset:
        out = frozenset()
        for w in self.walks:
            out |= w.vertices
        return out


def visit_counts(family: NPathFamily) -> dict[Site, tuple[int, ...]]:
    """Per-site visit vector (n_1(u), ..., n_N(u)) over all visited sites.

    The totals satisfy sum_u sum_k n_k(u) = total_length + N since every
    walk counts length+1 site visits.
    """
    per_walk = [w.visit_counts() for w in family.walks]
    out = {}
    for u in family.vertices():
        out[u] = tuple(c.get(u, 0) for c in per_walk)
    return out


class _Budget:
    __slots__ = ("left",)

    def __init__(self, nodes: int):
        self.left = nodes

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise ResourceLimit("walk enumeration budget exhausted")


def _walk_sites(start: Site, length: int, end: Site | None,
                steps: list[Site], budget: _Budget) -> Iterator[tuple[Site, ...]]:
    if end is not None:
        gap = _l1(start, end)
        if gap > length or (length - gap) % 2 != 0:
            return
    path = [start]

    def rec(remaining: int):
        budget.tick()
        if remaining == 0:
            yield tuple(path)
            return
        cur = path[-1]
        for step in steps:
            nxt = _add(cur, step)
            if end is not None:
                gap = _l1(nxt, end)
                if gap > remaining - 1 or (remaining - 1 - gap) % 2 != 0:
                    continue
            path.append(nxt)
            yield from rec(remaining - 1)
            path.pop()

    yield from rec(length)


def enumerate_closed_walks(d: int, n: int,
                           budget: int = DEFAULT_BUDGET) -> Iterator[LatticeWalk]:
    """All walks of length exactly n from the origin back to the origin."""
    if d < 1 or n < 0:
        raise ValueError("need d >= 1 and n >= 0")
    origin = (0,) * d
    steps = _steps(d)
    b = _Budget(budget)
    for sites in _walk_sites(origin, n, origin, steps, b):
        yield LatticeWalk(sites)


def enumerate_npaths(d: int, offsets, n: int,
                     budget: int = DEFAULT_BUDGET) -> Iterator[NPathFamily]:
    """All compatible N-walk families of total length exactly n.

    Lengths are split over the walks in lexicographic order, then each
    walk is enumerated depth-first; the last walk is pinned to end at
    -u_N so the observable hops close the cycle at the origin.
    """
    offsets = tuple(tuple(int(c) for c in u) for u in offsets)
    N = len(offsets)
    if N < 1:
        raise ValueError("need at least one walk")
    if any(len(u) != d for u in offsets):
        raise ValueError("displacement dimension mismatch")
    origin = (0,) * d
    steps = _steps(d)
    b = _Budget(budget)

    from .multiindex import compositions

    final_end = _neg(offsets[-1])

    def rec(i: int, start: Site, lengths) -> Iterator[tuple]:
        end = final_end if i == N - 1 else None
        for sites in _walk_sites(start, lengths[i], end, steps, b):
            if i == N - 1:
                yield (sites,)
            else:
                nxt = _add(sites[-1], offsets[i])
                for rest in rec(i + 1, nxt, lengths):
                    yield (sites,) + rest

    for lengths in compositions(n, N):
        for group in rec(0, origin, lengths):
            yield NPathFamily(tuple(LatticeWalk(s) for s in group), offsets)


def count_walks(d: int, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of closed walks of length n from the origin.

    d = 1 has the central-binomial closed form; other dimensions count by
    enumeration.  Always bounded by (2d)^n.
    """
    if n % 2 == 1:
        return 0
    if d == 1:
        return math.comb(n, n // 2)
    return sum(1 for _ in enumerate_closed_walks(d, n, budget))
