"""Discrete torus geometry and dimer matchings.

Sites of the ``m1 x m2`` torus are indexed ``x2*m1 + x1``.  A matching
assigns one of three moves to every site such that the induced map is a
bijection.  On degenerate tori (``m1 == 1`` or ``m2 == 1``) two different
moves may hit the same target; those are kept as distinct labelled
matchings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from ._backend import enumerate_moves
from .errors import ShapeTooLargeError

ENUMERATION_CAP = 16


class Move(IntEnum):
    STAY = 0
    STEP_E1 = 1
    STEP_E2 = 2


@dataclass(frozen=True, order=True)
class Site:
    x1: int
    x2: int


@dataclass(frozen=True)
class TorusShape:
    m1: int
    m2: int

    def __post_init__(self):
        if int(self.m1) < 1 or int(self.m2) < 1:
            raise ValueError(f"torus sizes must be positive, got ({self.m1}, {self.m2})")
        object.__setattr__(self, "m1", int(self.m1))
        object.__setattr__(self, "m2", int(self.m2))

    @property
    def n_sites(self) -> int:
        return self.m1 * self.m2

    def index(self, site: Site) -> int:
        return (site.x2 % self.m2) * self.m1 + (site.x1 % self.m1)

    def site(self, idx: int) -> Site:
        return Site(idx % self.m1, idx // self.m1)

    def sites(self) -> Iterator[Site]:
        for idx in range(self.n_sites):
            yield self.site(idx)

    def target(self, site: Site, move: Move) -> Site:
        if move == Move.STEP_E1:
            return Site((site.x1 + 1) % self.m1, site.x2)
        if move == Move.STEP_E2:
            return Site(site.x1, (site.x2 + 1) % self.m2)
        return site

    def wraps(self, site: Site, move: Move) -> tuple[int, int]:
        """Exit indicators ``(e1, e2)`` of the edge leaving ``site`` by ``move``."""
        return (
            int(move == Move.STEP_E1 and site.x1 == self.m1 - 1),
            int(move == Move.STEP_E2 and site.x2 == self.m2 - 1),
        )

    def check_enumerable(self):
        if self.n_sites > ENUMERATION_CAP:
            raise ShapeTooLargeError(
                f"shape ({self.m1}, {self.m2}) has {self.n_sites} sites; "
                f"enumeration is capped at {ENUMERATION_CAP}"
            )


@lru_cache(maxsize=64)
def _tables(m1: int, m2: int):
    n = m1 * m2
    idx = np.arange(n)
    x1 = idx % m1
    x2 = idx // m1
    targets = np.stack(
        [idx, x2 * m1 + (x1 + 1) % m1, ((x2 + 1) % m2) * m1 + x1], axis=1
    )
    wrap1 = (x1 == m1 - 1).astype(np.int64)
    wrap2 = (x2 == m2 - 1).astype(np.int64)
    for arr in (targets, wrap1, wrap2):
        arr.setflags(write=False)
    return targets, wrap1, wrap2


def target_table(shape: TorusShape) -> np.ndarray:
    """``(N, 3)`` table of target indices by site and move code."""
    return _tables(shape.m1, shape.m2)[0]


@dataclass(frozen=True)
class MatchingType:
    h1: int
    h2: int


@dataclass(frozen=True)
class Matching:
    shape: TorusShape
    moves: tuple = field()

    def __post_init__(self):
        moves = tuple(Move(int(v)) for v in self.moves)
        if len(moves) != self.shape.n_sites:
            raise ValueError("one move per site is required")
        object.__setattr__(self, "moves", moves)
        perm = self.permutation()
        if len(set(perm)) != len(perm):
            raise ValueError("move assignment does not induce a bijection")

    @classmethod
    def from_grid(cls, shape: TorusShape, grid) -> Matching:
        """Build from an ``(m2, m1)`` array-like of move codes (row ``x2``)."""
        arr = np.asarray(grid, dtype=int).reshape(shape.m2, shape.m1)
        return cls(shape, tuple(arr.ravel()))

    def move(self, site: Site) -> Move:
        return self.moves[self.shape.index(site)]

    def permutation(self) -> tuple:
        targets = target_table(self.shape)
        return tuple(int(targets[i, mv]) for i, mv in enumerate(self.moves))

    def grid(self) -> np.ndarray:
        return np.array(self.moves, dtype=int).reshape(self.shape.m2, self.shape.m1)


def enumerate_move_codes(shape: TorusShape) -> np.ndarray:
    """Every labelled matching as an ``(count, N)`` array of move codes.

    Rows are ordered lexicographically over sites (``x2`` major) with
    ``Stay < StepE1 < StepE2``.
    """
    shape.check_enumerable()
    return enumerate_moves(shape.m1, shape.m2)


def enumerate_matchings(shape: TorusShape) -> list[Matching]:
    return [Matching(shape, tuple(row)) for row in enumerate_move_codes(shape)]


def _codes_type(shape, codes):
    _, wrap1, wrap2 = _tables(shape.m1, shape.m2)
    codes = np.asarray(codes)
    h1 = ((codes == Move.STEP_E1) * wrap1).sum(axis=-1)
    h2 = ((codes == Move.STEP_E2) * wrap2).sum(axis=-1)
    return h1, h2


def matching_type(m: Matching) -> MatchingType:
    h1, h2 = _codes_type(m.shape, np.array(m.moves, dtype=int))
    return MatchingType(int(h1), int(h2))


def _cycles(perm: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = perm[i]
        out.append(cyc)
    return out


def matching_sign(m: Matching) -> int:
    parity = sum(len(c) - 1 for c in _cycles(m.permutation()))
    return -1 if parity % 2 else 1


def sector_sign(shape: TorusShape, theta: tuple[int, int]) -> int:
    """``(-1)**((theta1 + m1 + 1) * (theta2 + m2 + 1))``."""
    return -1 if ((theta[0] + shape.m1 + 1) * (theta[1] + shape.m2 + 1)) % 2 else 1


def sign_formula_value(shape: TorusShape, h: MatchingType) -> int:
    total = 0
    for t1 in (0, 1):
        for t2 in (0, 1):
            s = sector_sign(shape, (t1, t2))
            total += s * (-1 if (t1 * h.h1 + t2 * h.h2) % 2 else 1)
    return total // 2


def check_sign_formula(m: Matching) -> bool:
    return matching_sign(m) == sign_formula_value(m.shape, matching_type(m))


def cycle_exit_pairs(m: Matching) -> list[tuple[int, int, int]]:
    """``(length, q1, q2)`` for every cycle carrying at least one non-stay move."""
    _, wrap1, wrap2 = _tables(m.shape.m1, m.shape.m2)
    out = []
    for cyc in _cycles(m.permutation()):
        if all(m.moves[i] == Move.STAY for i in cyc):
            continue
        q1 = sum(int(m.moves[i] == Move.STEP_E1 and wrap1[i]) for i in cyc)
        q2 = sum(int(m.moves[i] == Move.STEP_E2 and wrap2[i]) for i in cyc)
        out.append((len(cyc), q1, q2))
    return out


def weight_of_matching(m: Matching, w) -> complex:
    """Product of the per-site weight picked out by each move label.

    ``w`` is anything with an ``(N, 3)`` complex ``table`` attribute (columns
    alpha, beta, gamma), e.g. :class:`torusdimers.kasteleyn.WeightField`.
    """
    table = np.asarray(w.table)
    codes = np.array(m.moves, dtype=int)
    return complex(np.prod(table[np.arange(len(codes)), codes]))


@dataclass(frozen=True)
class DiscreteBeads:
    """Beads and occupied cells read off a matching, in continuum coordinates.

    ``beads`` and ``occupied`` hold ``(x1/m1, x2)`` pairs for the
    vertical-step and horizontal-step sites respectively.
    """

    shape: TorusShape
    beads: tuple
    occupied: tuple

    def beads_per_string(self) -> list[int]:
        counts = [0] * self.shape.m2
        for _, h in self.beads:
            counts[h] += 1
        return counts


def matching_to_beads(m: Matching) -> DiscreteBeads:
    beads = []
    occupied = []
    for idx, mv in enumerate(m.moves):
        s = m.shape.site(idx)
        point = (s.x1 / m.shape.m1, s.x2)
        if mv == Move.STEP_E2:
            beads.append(point)
        elif mv == Move.STEP_E1:
            occupied.append(point)
    return DiscreteBeads(m.shape, tuple(beads), tuple(occupied))
