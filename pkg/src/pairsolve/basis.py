"""Seniority-zero pair basis over N doubly degenerate levels.

Each basis state is a bit pattern: bit i set means level i holds a pair.
States with a fixed pair count are enumerated in ascending integer order,
so the ordinal of a pattern is found by binary search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, PatternMismatch, TooLarge

#: Largest basis allowed without an explicit budget override.
DEFAULT_MAX_DIM = 5_000_000


def _check_sizes(n_levels: int, n_pairs: int):
    if n_levels < 1 or n_levels > 63:
        # patterns are stored in int64; bit 63 would flip the sign
        raise InvariantViolation(f"n_levels must be in 1..63, got {n_levels}")
    if n_pairs < 0 or n_pairs > n_levels:
        raise InvariantViolation(
            f"n_pairs must be in 0..{n_levels}, got {n_pairs}"
        )


def sector_dimension(n_levels: int, n_pairs: int) -> int:
    """Number of seniority-zero states: C(n_levels, n_pairs)."""
    _check_sizes(n_levels, n_pairs)
    return math.comb(n_levels, n_pairs)


def enumerate_patterns(n_levels: int, n_pairs: int) -> np.ndarray:
    """All n_levels-bit patterns with n_pairs set bits, ascending.

    Uses the constant-time next-higher-same-popcount step (Gosper), so the
    whole sector is generated in O(dim) integer operations.
    """
    dim = sector_dimension(n_levels, n_pairs)
    out = np.empty(dim, dtype=np.int64)
    if n_pairs == 0:
        out[0] = 0
        return out
    v = (1 << n_pairs) - 1
    for k in range(dim):
        out[k] = v
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r
    return out


@dataclass(frozen=True)
class PairBasis:
    """Ordered basis of one (n_levels, n_pairs) sector.

    ``patterns`` is ascending, so ``index_of`` is a binary search and the
    ordinal of a state never depends on how the basis was produced.
    """

    n_levels: int
    n_pairs: int
    patterns: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.patterns)

    @property
    def states(self) -> np.ndarray:
        """Alias for ``patterns``."""
        return self.patterns

    def index_of(self, pattern: int) -> int:
        """Ordinal of ``pattern`` in this basis.

        Raises PatternMismatch if the pattern has the wrong pair count or
        uses levels outside the basis.
        """
        k = int(np.searchsorted(self.patterns, pattern))
        if k == self.dim or self.patterns[k] != pattern:
            raise PatternMismatch(
                f"pattern {pattern:#x} is not a {self.n_pairs}-pair state "
                f"over {self.n_levels} levels"
            )
        return k

    def occupancy(self) -> np.ndarray:
        """(dim, n_levels) 0/1 matrix: column i is occupation of level i."""
        bits = np.arange(self.n_levels, dtype=np.int64)
        return ((self.patterns[:, None] >> bits[None, :]) & 1).astype(np.int8)


def enumerate_basis(n_levels: int, n_pairs: int, max_dim: int = DEFAULT_MAX_DIM) -> PairBasis:
    """Enumerate one sector, guarding against runaway dimensions.

    Raises TooLarge before allocating anything if C(n_levels, n_pairs)
    exceeds ``max_dim``; pass a larger budget to override.
    """
    dim = sector_dimension(n_levels, n_pairs)
    if dim > max_dim:
        raise TooLarge(
            f"sector dimension C({n_levels},{n_pairs}) = {dim} exceeds "
            f"the budget of {max_dim} states"
        )
    return PairBasis(
        n_levels=n_levels,
        n_pairs=n_pairs,
        patterns=enumerate_patterns(n_levels, n_pairs),
    )
