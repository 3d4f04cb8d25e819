"""Multi-index bookkeeping for the multi-pole integrals.

A multi-index is a tuple of non-negative integers; |n| is its total and
n! the product of component factorials.  Restricted sums over {|m| = r}
are enumerated in lexicographic order so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        ent = tuple(int(k) for k in self.entries)
        if len(ent) < 1:
            raise ValueError("multi-index needs at least one component")
        if any(k < 0 for k in ent):
            raise ValueError(f"multi-index components must be >= 0, got {ent}")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def of(cls, seq) -> "MultiIndex":
        return seq if isinstance(seq, cls) else cls(tuple(seq))

    @classmethod
    def zeros(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def ones(cls, n: int) -> "MultiIndex":
        return cls((1,) * n)

    @property
    def total(self) -> int:
        return sum(self.entries)

    @property
    def factorial(self) -> int:
        out = 1
        for k in self.entries:
            out *= math.factorial(k)
        return out

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a - b for a, b in zip(self.entries, other.entries)))


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of `parts` non-negative ints summing to `total`, lexicographic."""
    if total < 0 or parts < 1:
        raise ValueError("need total >= 0 and parts >= 1")
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def multinomial(n: int, split) -> int:
    """n! / (m_1! ... m_k!) for a composition `split` of n."""
    if sum(split) != n:
        raise ValueError("split must sum to n")
    out = math.factorial(n)
    for m in split:
        out //= math.factorial(m)
    return out


@dataclass(frozen=True)
class SignVector:
    entries: tuple[int, ...]

    def __post_init__(self):
        ent = tuple(int(s) for s in self.entries)
        if any(s not in (1, -1) for s in ent):
            raise ValueError(f"sign components must be +1 or -1, got {ent}")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def of(cls, seq) -> "SignVector":
        if isinstance(seq, cls):
            return seq
        if isinstance(seq, str):
            return cls(tuple(1 if c == "+" else -1 for c in seq if c in "+-"))
        return cls(tuple(seq))

    @classmethod
    def all_plus(cls, n: int) -> "SignVector":
        return cls((1,) * n)

    def conjugate(self) -> "SignVector":
        return SignVector(tuple(-s for s in self.entries))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class EnergyVector:
    entries: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(e) for e in self.entries))

    @classmethod
    def of(cls, seq) -> "EnergyVector":
        return seq if isinstance(seq, cls) else cls(tuple(seq))

    @property
    def min_gap(self) -> float:
        es = self.entries
        if len(es) < 2:
            return math.inf
        return min(abs(es[i] - es[j]) for i in range(len(es)) for j in range(i + 1, len(es)))

    def distinct(self, delta: float = 0.0) -> bool:
        return self.min_gap > delta

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)
