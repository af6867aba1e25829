"""Erdős–Szüsz–Turán sets for Farey subsets.

S_{I,M}(n, alpha, c) is I intersected with the union of
[a/q - alpha/q^2, a/q + alpha/q^2] over a/q in F_M(floor(nc)) with q >= n,
clipped to [0, 1].  Its measure is computed exactly; a second estimator
integrates the limiting formula over the lifted section by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .congruence import CosetSubset, index_gamma
from .farey import DomainError, as_fraction
from .section import DEFAULT_MAX_STEPS, TRUNCATION_BUDGET, TruncationError, _chunks, _draw
from .stream import _TRIVIAL, as_interval, collect_gaps


@dataclass(frozen=True, order=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo


class IntervalUnion:
    """Sorted, pairwise disjoint, non-touching closed intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        merged: list[Interval] = []
        for iv in sorted(intervals):
            if merged and iv.lo <= merged[-1].hi:
                if iv.hi > merged[-1].hi:
                    merged[-1] = Interval(merged[-1].lo, iv.hi)
            else:
                merged.append(iv)
        self.intervals = tuple(merged)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalUnion) and self.intervals == other.intervals

    def __repr__(self) -> str:
        body = " ∪ ".join(f"[{iv.lo}, {iv.hi}]" for iv in self.intervals)
        return f"IntervalUnion({body or '∅'})"

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    def clip(self, lo, hi) -> "IntervalUnion":
        lo, hi = as_fraction(lo), as_fraction(hi)
        out = []
        for iv in self.intervals:
            a, b = max(iv.lo, lo), min(iv.hi, hi)
            if a <= b:
                out.append(Interval(a, b))
        return IntervalUnion(out)

    def measure(self) -> Fraction:
        return sum((iv.length for iv in self.intervals), Fraction(0))


def measure(u: IntervalUnion) -> Fraction:
    return u.measure()


@dataclass(frozen=True)
class ESTConfig:
    n: int
    alpha: Fraction
    c: Fraction
    M: CosetSubset = field(default=_TRIVIAL)
    I: tuple = (Fraction(0), Fraction(1))

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "c", as_fraction(self.c))
        object.__setattr__(self, "I", as_interval(self.I))
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.c < 1:
            raise DomainError("c must be >= 1")
        if self.Q < 1:
            raise DomainError("floor(n c) must be >= 1")
        an = self.alpha.numerator
        if 4 * an * self.Q**4 >= 1 << 63 or self.alpha.denominator * self.Q**2 >= 1 << 62:
            raise OverflowError("alpha and Q too large for the 64-bit interval kernels")

    @property
    def Q(self) -> int:
        return math.floor(self.n * self.c)


def _fractions_near(cfg: ESTConfig) -> tuple[np.ndarray, np.ndarray]:
    """F_M(Q) centres that can reach I, with q < n rows kept for indexing."""
    L, U = cfg.I
    pad = cfg.alpha / (cfg.n * cfg.n)
    lo = max(Fraction(0), L - pad)
    hi = min(Fraction(1), U + pad)
    # coarsen the padded ends so sweep bounds keep small denominators
    grid = 1 << 40
    lo = Fraction(math.floor(lo * grid), grid)
    hi = Fraction(math.ceil(hi * grid), grid)
    g = collect_gaps(cfg.Q, (lo, hi), cfg.M)
    return g.a, g.q


def _components(cfg: ESTConfig):
    a, q = _fractions_near(cfg)
    an, ad = cfg.alpha.numerator, cfg.alpha.denominator
    lo_idx, hi_idx = kernels.clusters(a, q, cfg.n, an, ad)
    return a, q, lo_idx, hi_idx


def _component_interval(a, q, u, v, alpha) -> tuple[Fraction, Fraction]:
    qu, qv = int(q[u]), int(q[v])
    return (Fraction(int(a[u]), qu) - alpha / (qu * qu),
            Fraction(int(a[v]), qv) + alpha / (qv * qv))


def build_est_union(cfg: ESTConfig) -> IntervalUnion:
    a, q, lo_idx, hi_idx = _components(cfg)
    L, U = cfg.I
    lo_c, hi_c = max(Fraction(0), L), min(Fraction(1), U)
    out = []
    for u, v in zip(lo_idx.tolist(), hi_idx.tolist()):
        x, y = _component_interval(a, q, u, v, cfg.alpha)
        x, y = max(x, lo_c), min(y, hi_c)
        if x <= y:
            out.append(Interval(x, y))
    return IntervalUnion(out)


def _sum_over_q(vals: np.ndarray, power: int) -> Fraction:
    """Sum of vals[q] / q^power exactly."""
    total = Fraction(0)
    for q in np.flatnonzero(vals).tolist():
        total += Fraction(int(vals[q]), q**power)
    return total


def est_lambda(cfg: ESTConfig) -> Fraction:
    """lambda(S_{I,M}(n, alpha, c)) exactly, without materialising the union."""
    a, q, lo_idx, hi_idx = _components(cfg)
    if lo_idx.size == 0:
        return Fraction(0)
    L, U = cfg.I
    lo_c, hi_c = max(Fraction(0), L), min(Fraction(1), U)
    an, ad = cfg.alpha.numerator, cfg.alpha.denominator
    W, S, straddle = kernels.accumulate(a, q, lo_idx, hi_idx, an, ad,
                                        float(lo_c), float(hi_c), cfg.Q)
    total = _sum_over_q(S, 1) + cfg.alpha * _sum_over_q(W, 2)
    for k in straddle.tolist():
        x, y = _component_interval(a, q, int(lo_idx[k]), int(hi_idx[k]), cfg.alpha)
        x, y = max(x, lo_c), min(y, hi_c)
        if x < y:
            total += y - x
    return total


def detect_overlap_depth(alpha, c, M: CosetSubset | None, n: int) -> int:
    """Largest j with J(beta_i) meeting J(beta_{i+j}), both with q >= n.

    The index runs over all of F_M(floor(nc)), the indexing of r_M.
    """
    cfg = ESTConfig(n, alpha, c, M or _TRIVIAL)
    g = collect_gaps(cfg.Q, None, cfg.M)
    return kernels.overlap_depth(g.a, g.q, n, cfg.alpha.numerator, cfg.alpha.denominator)


@dataclass(frozen=True)
class ESTConvergence:
    table: list  # (n, lambda as Fraction)
    limit: Fraction
    delta: Fraction | None  # last minus second-to-last


def est_convergence(alpha, c, M: CosetSubset | None, I, n_grid: Sequence[int]) -> ESTConvergence:
    grid = list(n_grid)
    if not grid:
        raise ValueError("n_grid must be nonempty")
    if any(x >= y for x, y in zip(grid, grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    table = [(n, est_lambda(ESTConfig(n, alpha, c, M or _TRIVIAL, I))) for n in grid]
    delta = table[-1][1] - table[-2][1] if len(table) > 1 else None
    return ESTConvergence(table, table[-1][1], delta)


def density_factor(M: CosetSubset) -> float:
    """3 #M / (pi^2 [Gamma : Gamma(m)])."""
    return 3.0 * len(M) / (math.pi**2 * index_gamma(M.m))


def small_alpha_limit(alpha, c, M: CosetSubset | None = None) -> float:
    """Leading-order limit 4 alpha ln(c) times the density factor."""
    M = M or _TRIVIAL
    return density_factor(M) * 4.0 * float(alpha) * math.log(float(c))


def est_limit_section_mc(alpha, c, M: CosetSubset | None, K: int, n_samples: int,
                         rng: np.random.Generator, max_steps: int = DEFAULT_MAX_STEPS,
                         threads: int = 1) -> tuple[float, float]:
    """Monte Carlo value of the section integral; returns (estimate, stderr)."""
    M = M or _TRIVIAL
    if K < 0:
        raise ValueError("K must be >= 0")
    if K > 20:
        raise ValueError("K > 20 makes the 2^K subset sum impractical")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    alpha, t = float(as_fraction(alpha)), 1.0 / float(as_fraction(c))
    vals = np.empty(n_samples)
    status = np.empty(n_samples, np.int8)
    todo = np.arange(n_samples)
    for _ in range(100):
        a, b, cidx = _draw(M, rng, todo.size)

        def run(sl):
            return kernels.est_section(a[sl], b[sl], cidx[sl], M.array, M.codes, M.m,
                                       K, t, alpha, max_steps)

        sls = _chunks(todo.size, threads)
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(run, sls))
        else:
            parts = [run(sl) for sl in sls]
        vals[todo] = np.concatenate([p[0] for p in parts])
        status[todo] = np.concatenate([p[1] for p in parts])
        todo = todo[status[todo] == kernels.REJECTED_STATUS]
        if not todo.size:
            break
    ntr = int((status == kernels.TRUNCATED_STATUS).sum())
    if ntr > TRUNCATION_BUDGET * n_samples:
        raise TruncationError(f"{ntr} of {n_samples} orbits exceeded {max_steps} steps", count=ntr)
    x = vals[status == 0]
    scale = density_factor(M)
    return scale * float(x.mean()), scale * float(x.std(ddof=1)) / math.sqrt(x.size)
