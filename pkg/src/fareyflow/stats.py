"""Gap statistics of F_{I,M}(Q): CDFs, histograms, repulsion, h-spacings,
numerator differences and equidistribution.

Two normalisations appear.  The *revised* gap is Q^2 times the gap; the
*unrevised* one is N * gap / span with N the number of gaps.  Functions that
take ``records`` accept either a :class:`~fareyflow.stream.GapArrays` or any
iterable of :class:`~fareyflow.stream.SubsetGapRecord`.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .congruence import CosetSubset, index_gamma, is_den_one_family, prime_factors
from .stream import GapArrays, SubsetGapRecord, count_subset


class EmptyStreamError(ValueError):
    pass


class EmpiricalCDF:
    """Right-continuous step CDF of a finite sample."""

    __slots__ = ("values",)

    def __init__(self, values, presorted: bool = False):
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0:
            raise EmptyStreamError("an empirical CDF needs at least one sample")
        self.values = v if presorted else np.sort(v, kind="stable")

    @property
    def n(self) -> int:
        return self.values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.n

    def quantile(self, p: float) -> float:
        """Smallest sample x with CDF(x) >= p."""
        k = max(int(math.ceil(p * self.n)) - 1, 0)
        return float(self.values[min(k, self.n - 1)])

    @property
    def min(self) -> float:
        return float(self.values[0])

    @property
    def max(self) -> float:
        return float(self.values[-1])

    def merge(self, other: "EmpiricalCDF") -> "EmpiricalCDF":
        return EmpiricalCDF(np.concatenate((self.values, other.values)))

    def table(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=np.float64)
        return np.column_stack((grid, self(grid)))


def sup_distance(F: EmpiricalCDF, G: EmpiricalCDF, grid) -> float:
    return float(np.max(np.abs(F(grid) - G(grid))))


@dataclass
class CDFAccumulator:
    """Mergeable sample buffer; sorting waits for :meth:`finalize`."""

    chunks: list = field(default_factory=list)

    def add(self, values) -> None:
        self.chunks.append(np.asarray(values, dtype=np.float64).ravel())

    def merge(self, other: "CDFAccumulator") -> "CDFAccumulator":
        return CDFAccumulator(self.chunks + other.chunks)

    def finalize(self) -> EmpiricalCDF:
        if not self.chunks:
            raise EmptyStreamError("no samples accumulated")
        return EmpiricalCDF(np.concatenate(self.chunks))


NORMALIZATIONS = ("count", "probability", "density")


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    normalization: str = "density"
    total: int = 0  # samples seen, including those outside the edges

    @classmethod
    def of(cls, values, edges, normalization: str = "density") -> "Histogram":
        if normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        edges = np.asarray(edges, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        counts, _ = np.histogram(values, bins=edges)
        return cls(edges, counts.astype(np.int64), normalization, int(values.size))

    def merge(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("histograms with different edges cannot be merged")
        return Histogram(self.edges, self.counts + other.counts, self.normalization,
                         self.total + other.total)

    @property
    def in_range(self) -> int:
        return int(self.counts.sum())

    @property
    def coverage(self) -> float:
        """Share of all samples that fell inside the edges."""
        return self.in_range / self.total if self.total else 0.0

    def values(self) -> np.ndarray:
        c = self.counts.astype(np.float64)
        if self.normalization == "count":
            return c
        n = max(self.in_range, 1)
        if self.normalization == "probability":
            return c / n
        return c / (n * np.diff(self.edges))

    def mass_below(self, x: float) -> float:
        """Probability mass of bins lying entirely below x, over all samples."""
        if not self.total:
            return 0.0
        return float(self.counts[self.edges[1:] <= x].sum()) / self.total


# ----------------------------------------------------------------- records


def _gaps(records) -> tuple[np.ndarray, int, Fraction]:
    """(gap floats, N, span) for either record form."""
    if isinstance(records, GapArrays):
        if len(records) < 2:
            raise EmptyStreamError("fewer than two retained fractions")
        return records.c3 / records.qp, len(records) - 1, records.span
    recs = list(records)
    if not recs:
        raise EmptyStreamError("no gap records")
    gaps = np.array([float(r.beta_next - r.beta) for r in recs])
    return gaps, len(recs), recs[-1].beta_next - recs[0].beta


def records_from_fractions(fracs: Iterable, Q: int) -> list[SubsetGapRecord]:
    """Gap records of an arbitrary increasing list of fractions."""
    fr = [Fraction(x) for x in fracs]
    out = []
    for x, y in zip(fr, fr[1:]):
        c3 = y.numerator * x.denominator - x.numerator * y.denominator
        out.append(SubsetGapRecord(x, y, Q * Q * (y - x), c3))
    return out


def gap_distribution(records, span=None) -> EmpiricalCDF:
    """CDF of N * gap / span."""
    gaps, N, sp = _gaps(records)
    span = sp if span is None else Fraction(span)
    if span <= 0:
        raise ValueError("span must be positive")
    return EmpiricalCDF(gaps * (N / float(span)))


def revised_values(records, Q: int) -> np.ndarray:
    if isinstance(records, GapArrays):
        if len(records) < 2:
            raise EmptyStreamError("fewer than two retained fractions")
        return (Q * Q) * records.c3 / records.qp
    vals = [float(Q * Q * (r.beta_next - r.beta)) for r in records]
    if not vals:
        raise EmptyStreamError("no gap records")
    return np.array(vals)


def revised_gap_cdf(records, Q: int) -> EmpiricalCDF:
    return EmpiricalCDF(revised_values(records, Q))


def unrevised_scale(N: int, span, Q: int) -> float:
    """Factor taking a revised gap to the unrevised one."""
    return N / (float(span) * Q * Q)


def predicted_repulsion(m: int) -> float:
    """3 / (pi^2 m prod_{p | m}(1 - 1/p^2)): the limiting smallest unrevised
    gap of the den = 1 mod m family."""
    return 3.0 * m * m / (math.pi**2 * index_gamma(m))


class Repulsion(NamedTuple):
    min_revised_gap: float
    predicted: float | None


def repulsion_estimate(records, Q: int, M: CosetSubset | None = None) -> Repulsion:
    """Smallest revised gap, with the closed-form prediction when known.

    The prediction is in unrevised normalisation; in revised units the
    limiting support starts at 1.
    """
    if isinstance(records, GapArrays):
        if len(records) < 2:
            raise EmptyStreamError("fewer than two retained fractions")
        i = records.min_index()
        mn = float(records.scaled_exact(i))
    else:
        mn = float(min(Q * Q * (r.beta_next - r.beta) for r in records))
    pred = None
    if M is None or M.m == 1 or is_den_one_family(M):
        pred = predicted_repulsion(1 if M is None else M.m)
    return Repulsion(mn, pred)


def h_spacings(fractions: Iterable, h: int, Q: int) -> Iterator[tuple[Fraction, ...]]:
    """Windows of h consecutive gaps, each scaled by Q^2.

    N gaps give N - h + 1 windows.
    """
    if h < 1:
        raise ValueError("h must be positive")
    fr = [Fraction(x) for x in fractions]
    g = [Q * Q * (y - x) for x, y in zip(fr, fr[1:])]
    for i in range(len(g) - h + 1):
        yield tuple(g[i:i + h])


def h_spacing_matrix(g: GapArrays, h: int) -> np.ndarray:
    if h < 1:
        raise ValueError("h must be positive")
    s = g.scaled
    if s.size < h:
        return np.empty((0, h))
    return np.lib.stride_tricks.sliding_window_view(s, h)


def joint_cdf(vectors: np.ndarray, c: Sequence[float]) -> float:
    """Share of h-vectors inside the box prod [0, c_j]."""
    v = np.asarray(vectors, dtype=np.float64)
    if v.shape[0] == 0:
        raise EmptyStreamError("no h-spacing vectors")
    return float(np.all(v <= np.asarray(c, dtype=np.float64), axis=1).mean())


def numerator_histogram(records) -> dict[int, Fraction]:
    """Relative frequency of each c3 = bq - ap, exactly."""
    if isinstance(records, GapArrays):
        keys, cnt = np.unique(records.c3, return_counts=True)
        tally = dict(zip(keys.tolist(), cnt.tolist()))
    else:
        tally = Counter(r.numerator_diff for r in records)
    total = sum(tally.values())
    if not total:
        raise EmptyStreamError("no gap records")
    return {int(k): Fraction(v, total) for k, v in sorted(tally.items())}


@dataclass(frozen=True)
class EquidistReport:
    Q: int
    bins: int
    counts: tuple[int, ...]
    deviation: float  # max |count - mean| / mean


def equidistribution_report(Q: int, M: CosetSubset | None = None, bins: int = 10) -> EquidistReport:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    n, _, counts = count_subset(Q, None, M, bins=bins)
    mean = n / bins
    dev = float(np.max(np.abs(counts - mean)) / mean) if mean else 0.0
    return EquidistReport(Q, bins, tuple(int(c) for c in counts), dev)


def default_histogram(values, bins: int = 200, upper_q: float = 0.99) -> Histogram:
    """Uniform bins over [0, 99th percentile], density-normalised."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    top = EmpiricalCDF(v, presorted=True).quantile(upper_q)
    return Histogram.of(v, np.linspace(0.0, top, bins + 1), "density")


# ----------------------------------------------------------------- exports


def fmt(x) -> str:
    """12 significant digits for floats, p/q for rationals."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def write_cdf_csv(path, cdf: EmpiricalCDF, grid) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["c", "cdf"])
        for c, F in cdf.table(grid):
            w.writerow([fmt(c), fmt(F)])


def write_density_csv(path, hist: Histogram) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "density"])
        for lo, hi, d in zip(hist.edges[:-1], hist.edges[1:], hist.values()):
            w.writerow([fmt(lo), fmt(hi), fmt(d)])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(fmt(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, ensure_ascii=False)
        fh.write("\n")
