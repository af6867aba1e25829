"""Streaming enumeration of F_{I,M}(Q) = F_M(Q) ∩ I.

The walk over F(Q) happens in compiled blocks; Python sees either numpy row
blocks (bulk statistics) or one state per retained fraction (small Q).
Intervals are closed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator

import numpy as np

from . import kernels
from .congruence import CosetSubset, all_cosets
from .farey import DomainError, FareyPairState, as_fraction, farey_start

_TRIVIAL = all_cosets(1)


def as_interval(I=None) -> tuple[Fraction, Fraction]:
    if I is None:
        return Fraction(0), Fraction(1)
    lo, hi = (as_fraction(v) for v in I)
    if not 0 <= lo <= hi <= 1:
        raise DomainError(f"interval [{lo}, {hi}] is not a nonempty subinterval of [0, 1]")
    return lo, hi


def _subset(M: CosetSubset | None) -> CosetSubset:
    return _TRIVIAL if M is None else M


def _state_array(Q: int, lo: Fraction) -> np.ndarray:
    s = farey_start(Q, lo)
    return np.array([s.a, s.q, s.a1, s.q1, 0], dtype=np.int64)


def _check_width(Q: int, hi: Fraction) -> None:
    if Q * hi.denominator >= 1 << 62:
        raise OverflowError("interval endpoint denominator too large for 64-bit sweep")


def stream_blocks(Q: int, I=None, M: CosetSubset | None = None,
                  cap: int = kernels.BLOCK_CAP) -> Iterator[np.ndarray]:
    """Blocks of rows (a, q, a1, q1, idx) for retained fractions, in order.

    idx is the position of a/q in F(Q) ∩ I, counted from the first element.
    """
    lo, hi = as_interval(I)
    M = _subset(M)
    _check_width(Q, hi)
    state = _state_array(Q, lo)
    finished = False
    while not finished:
        rows, finished = kernels.sweep_block(
            state, Q, hi.numerator, hi.denominator, M.m, M.codes, cap)
        if rows.shape[0]:
            yield rows


def stream_subset(Q: int, I=None, M: CosetSubset | None = None
                  ) -> Iterator[tuple[Fraction, FareyPairState]]:
    for rows in stream_blocks(Q, I, M):
        for a, q, a1, q1, _ in rows.tolist():
            yield Fraction(a, q), FareyPairState(a, q, a1, q1, Q)


@dataclass(frozen=True)
class SubsetGapRecord:
    beta: Fraction
    beta_next: Fraction
    scaled_gap: Fraction
    numerator_diff: int


def gap_records(Q: int, I=None, M: CosetSubset | None = None) -> Iterator[SubsetGapRecord]:
    prev = None
    for beta, _ in stream_subset(Q, I, M):
        if prev is not None:
            c3 = beta.numerator * prev.denominator - prev.numerator * beta.denominator
            yield SubsetGapRecord(prev, beta, Q * Q * (beta - prev), c3)
        prev = beta


def count_subset(Q: int, I=None, M: CosetSubset | None = None, bins: int = 0):
    """(count, largest unscaled gap); with bins > 0 also the per-bin counts.

    The max gap is None when fewer than two fractions are retained.
    """
    lo, hi = as_interval(I)
    M = _subset(M)
    _check_width(Q, hi)
    state = _state_array(Q, lo)
    counts, acc = kernels.count_sweep(state, Q, hi.numerator, hi.denominator, M.m, M.codes, bins)
    n = int(acc[0])
    gap = Fraction(int(acc[5]), int(acc[6])) if n >= 2 else None
    if bins:
        return n, gap, counts
    return n, gap


@dataclass(frozen=True)
class GapArrays:
    """Retained fractions a/q of F_{I,M}(Q) held as int64 arrays.

    The gap between neighbours is c3/qp exactly, c3 = b q - a p and qp = q p.
    """

    Q: int
    a: np.ndarray
    q: np.ndarray

    def __len__(self) -> int:
        return self.a.size

    @cached_property
    def c3(self) -> np.ndarray:
        return self.a[1:] * self.q[:-1] - self.a[:-1] * self.q[1:]

    @cached_property
    def qp(self) -> np.ndarray:
        return self.q[:-1] * self.q[1:]

    @cached_property
    def scaled(self) -> np.ndarray:
        """Q^2 times each gap, rounded once to binary64."""
        return (self.Q * self.Q) * self.c3 / self.qp

    def scaled_exact(self, i: int) -> Fraction:
        return Fraction(self.Q * self.Q * int(self.c3[i]), int(self.qp[i]))

    @property
    def span(self) -> Fraction:
        return Fraction(int(self.a[-1]), int(self.q[-1])) - Fraction(int(self.a[0]), int(self.q[0]))

    def min_index(self) -> int:
        """Index of the smallest gap, exact among float ties."""
        return _exact_extreme(self.c3, self.qp, smallest=True)

    def max_index(self) -> int:
        return _exact_extreme(self.c3, self.qp, smallest=False)


def _exact_extreme(num: np.ndarray, den: np.ndarray, smallest: bool) -> int:
    vals = num / den
    pick = vals.min() if smallest else vals.max()
    cand = np.flatnonzero(np.abs(vals - pick) <= 1e-12 * abs(pick))
    best = int(cand[0])
    for j in cand[1:].tolist():
        lhs = int(num[j]) * int(den[best])
        rhs = int(num[best]) * int(den[j])
        if (lhs < rhs) if smallest else (lhs > rhs):
            best = j
    return best


def shard_bounds(Q: int, lo: Fraction, hi: Fraction, shards: int) -> list[tuple[Fraction, Fraction]]:
    """Split [lo, hi] into closed pieces that share no element of F(Q).

    Inner cut points are odd multiples of 2^-e with 2^e > Q, so none of them
    lies in F(Q).
    """
    if shards <= 1 or lo == hi:
        return [(lo, hi)]
    e = (2 * Q * shards).bit_length()
    den = 1 << e
    cuts = [lo]
    for k in range(1, shards):
        x = lo + (hi - lo) * k / shards
        c = Fraction(2 * int(x * den / 2) + 1, den)
        if cuts[-1] < c < hi:
            cuts.append(c)
    cuts.append(hi)
    return list(zip(cuts[:-1], cuts[1:]))


def _collect_one(Q: int, I, M: CosetSubset) -> tuple[np.ndarray, np.ndarray]:
    parts_a, parts_q = [], []
    for rows in stream_blocks(Q, I, M):
        parts_a.append(rows[:, 0].copy())
        parts_q.append(rows[:, 1].copy())
    if not parts_a:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(parts_a), np.concatenate(parts_q)


def collect_gaps(Q: int, I=None, M: CosetSubset | None = None, threads: int = 1) -> GapArrays:
    """Materialise F_{I,M}(Q); shards run concurrently and are joined in order.

    Gaps across a shard cut come out of the concatenation, so each boundary
    pair is counted once.
    """
    lo, hi = as_interval(I)
    M = _subset(M)
    pieces = shard_bounds(Q, lo, hi, max(1, threads))
    if len(pieces) == 1:
        a, q = _collect_one(Q, pieces[0], M)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            out = list(ex.map(lambda iv: _collect_one(Q, iv, M), pieces))
        a = np.concatenate([o[0] for o in out])
        q = np.concatenate([o[1] for o in out])
    return GapArrays(Q, a, q)
