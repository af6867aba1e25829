"""The lifted BCZ section Omega_M: first returns, return times, Monte Carlo.

A section point is (a, b) in the Farey triangle together with a coset mod m.
The map r' moves (a, b) by the BCZ map and the coset by [[K, 1], [-1, 0]];
r_M iterates r' until the coset lands back in M, and R_M adds up the roof
1/(ab) along the way.  At W-points (q/Q, q'/Q) this reproduces Q^2 times
the gaps of F_M(Q).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .congruence import CosetSubset, ModMatrix, w_matrix
from .farey import FareyPairState, bcz
from .stats import EmpiricalCDF
from .stream import collect_gaps, stream_blocks

DEFAULT_MAX_STEPS = 1_000_000
# exact twin keeps sums with denominators up to Q^2 times a step product
EXACT_MAX_ORDER = 1000
# truncations tolerated (and dropped) below this share of samples
TRUNCATION_BUDGET = 1e-4


class TruncationError(RuntimeError):
    def __init__(self, msg, partial_time=None, steps=None, count=None):
        super().__init__(msg)
        self.partial_time = partial_time
        self.steps = steps
        self.count = count


def roof(a, b):
    return 1 / (a * b)


@dataclass(frozen=True)
class SectionPoint:
    a: float | Fraction
    b: float | Fraction
    coset: ModMatrix

    def is_valid(self) -> bool:
        return 0 < self.a <= 1 and 0 < self.b <= 1 and self.a + self.b > 1

    @classmethod
    def w_point(cls, s: FareyPairState, m: int) -> "SectionPoint":
        """Exact section point of the pair a/q < a1/q1 in F(Q)."""
        return cls(Fraction(s.q, s.Q), Fraction(s.q1, s.Q), w_matrix(s, m))


@dataclass(frozen=True)
class ReturnSample:
    time: float | Fraction
    steps: int
    landing: SectionPoint


def step_rprime(p: SectionPoint) -> SectionPoint:
    K = math.floor((1 + p.a) / p.b)
    a, b = bcz(p.a, p.b)
    X = p.coset
    return SectionPoint(a, b, ModMatrix(X.m, K * X.e11 + X.e21, K * X.e12 + X.e22, -X.e11, -X.e12))


def first_return(p: SectionPoint, M: CosetSubset, max_steps: int = DEFAULT_MAX_STEPS) -> ReturnSample:
    """r_M(p) by iterating r'.  Fractions in, exact answer out."""
    t = 0
    for k in range(1, max_steps + 1):
        t += roof(p.a, p.b)
        p = step_rprime(p)
        if p.coset in M:
            return ReturnSample(t, k, p)
    raise TruncationError(f"no return to M within {max_steps} steps", t, max_steps)


class Orbit:
    """Lazily extended r_M orbit of one point, with cumulative times."""

    def __init__(self, p: SectionPoint, M: CosetSubset, max_steps: int = DEFAULT_MAX_STEPS):
        self.M = M
        self.max_steps = max_steps
        self.points = [p]
        self.times = [0]

    def __getitem__(self, j: int) -> tuple[SectionPoint, float | Fraction]:
        while len(self.points) <= j:
            r = first_return(self.points[-1], self.M, self.max_steps)
            self.points.append(r.landing)
            self.times.append(self.times[-1] + r.time)
        return self.points[j], self.times[j]


def _check_js(js) -> list[int]:
    js = list(js)
    if not js or js[0] != 0 or any(x >= y for x, y in zip(js, js[1:])):
        raise ValueError("js must be strictly increasing and start at 0")
    return js


def h_region_member(p: SectionPoint, js, t, M: CosetSubset,
                    max_steps: int = DEFAULT_MAX_STEPS, orbit: Orbit | None = None) -> bool:
    """a-coordinate of r_M^j(p) is >= t for every j in js."""
    js = _check_js(js)
    orb = orbit or Orbit(p, M, max_steps)
    return all(orb[j][0].a >= t for j in js)


def f_alpha(p: SectionPoint, js, alpha, M: CosetSubset,
            max_steps: int = DEFAULT_MAX_STEPS, orbit: Orbit | None = None):
    js = _check_js(js)
    orb = orbit or Orbit(p, M, max_steps)
    pts = [orb[j] for j in js]
    best = None
    for s, (ps, ts) in enumerate(pts):
        for pv, tv in pts[s:]:
            val = alpha * (1 / ps.a**2 + 1 / pv.a**2) - (tv - ts)
            best = val if best is None or val < best else best
    return max(0, best)


# ---------------------------------------------------------------- exact twin


@dataclass(frozen=True)
class WPointReturns:
    """First returns from every W-point of F_{I,M}(Q), exactly."""

    Q: int
    a: np.ndarray
    q: np.ndarray
    a1: np.ndarray  # successor in F(Q)
    q1: np.ndarray
    time_num: np.ndarray
    time_den: np.ndarray
    steps: np.ndarray
    idx: np.ndarray  # position of each fraction in F(Q) ∩ I
    land_A: np.ndarray
    land_B: np.ndarray
    land_coset: np.ndarray


def w_point_returns(Q: int, M: CosetSubset, I=None, max_steps: int = DEFAULT_MAX_STEPS) -> WPointReturns:
    if Q > EXACT_MAX_ORDER:
        raise OverflowError(f"exact return twin supports Q <= {EXACT_MAX_ORDER}")
    blocks = list(stream_blocks(Q, I, M))
    rows = np.concatenate(blocks) if blocks else np.empty((0, 5), np.int64)
    m = M.m
    cos = np.column_stack((rows[:, 3] % m, rows[:, 2] % m, (-rows[:, 1]) % m, (-rows[:, 0]) % m))
    tn, td, steps, la, lb, lc = kernels.exact_return(
        rows[:, 1].copy(), rows[:, 3].copy(), np.ascontiguousarray(cos), Q, m, M.codes, max_steps)
    return WPointReturns(Q, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], tn, td, steps, rows[:, 4], la, lb, lc)


def conjugacy_mismatches(Q: int, M: CosetSubset) -> int:
    """Count W-points whose exact return disagrees with the stream gap.

    Compares time (as a reduced fraction), step count, landing point and
    landing coset against the next retained fraction.
    """
    w = w_point_returns(Q, M)
    n = w.a.size - 1
    if n < 1:
        return 0
    c3 = w.a[1:] * w.q[:-1] - w.a[:-1] * w.q[1:]
    num = Q * Q * c3
    den = w.q[:-1] * w.q[1:]
    g = np.gcd(num, den)
    bad = (w.time_num[:n] != num // g) | (w.time_den[:n] != den // g)
    bad |= w.steps[:n] != np.diff(w.idx)
    bad |= (w.land_A[:n] != w.q[1:]) | (w.land_B[:n] != w.q1[1:])
    # landing coset is W of the next retained fraction
    m = M.m
    nxt = np.column_stack((w.q1[1:] % m, w.a1[1:] % m, (-w.q[1:]) % m, (-w.a[1:]) % m))
    bad |= np.any(w.land_coset[:n] != nxt, axis=1)
    return int(bad.sum())


# ------------------------------------------------------------- Monte Carlo


def sample_omega(rng: np.random.Generator, n: int | None = None):
    """Uniform points of the Farey triangle by folding the unit square."""
    size = 1 if n is None else n
    u = rng.random(size)
    v = rng.random(size)
    fold = u + v <= 1.0
    u[fold], v[fold] = 1.0 - u[fold], 1.0 - v[fold]
    # folding maps the closed lower triangle onto the closure of Omega;
    # u or v can be exactly 1 - 0 = 1 but never 0
    if n is None:
        return float(u[0]), float(v[0])
    return u, v


@dataclass(frozen=True)
class MCReturn:
    times: np.ndarray
    steps: np.ndarray
    truncated: int
    resampled: int


def _chunks(n: int, parts: int) -> list[slice]:
    edges = np.linspace(0, n, max(1, parts) + 1).astype(int)
    return [slice(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _parallel(fn, arrays, n: int, threads: int):
    if threads <= 1:
        return [fn(*arrays)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda sl: fn(*(x[sl] for x in arrays)), _chunks(n, threads)))


def _draw(M: CosetSubset, rng: np.random.Generator, n: int):
    a, b = sample_omega(rng, n)
    cidx = rng.integers(0, len(M), n)
    return a, b, cidx


def mc_return_times(M: CosetSubset, n_samples: int, rng: np.random.Generator,
                    max_steps: int = DEFAULT_MAX_STEPS, threads: int = 1) -> MCReturn:
    """Return times R_M of points drawn from mu_{Omega_M}.

    Points whose orbit comes within 1e-12 of a floor discontinuity are
    redrawn.  Truncated orbits are dropped if rare, otherwise an error.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    mats = M.array
    times = np.empty(n_samples)
    steps = np.empty(n_samples, np.int64)
    status = np.empty(n_samples, np.int8)
    todo = np.arange(n_samples)
    resampled = 0
    for _ in range(100):
        a, b, cidx = _draw(M, rng, todo.size)
        fn = lambda x, y, c: kernels.mc_return(x, y, c, mats, M.codes, M.m, max_steps)
        parts = _parallel(fn, (a, b, cidx), todo.size, threads)
        times[todo] = np.concatenate([p[0] for p in parts])
        steps[todo] = np.concatenate([p[1] for p in parts])
        status[todo] = np.concatenate([p[2] for p in parts])
        todo = todo[status[todo] == kernels.REJECTED_STATUS]
        if not todo.size:
            break
        resampled += todo.size
    trunc = status == kernels.TRUNCATED_STATUS
    ntr = int(trunc.sum())
    if ntr > TRUNCATION_BUDGET * n_samples:
        raise TruncationError(
            f"{ntr} of {n_samples} orbits exceeded {max_steps} steps", count=ntr)
    keep = status == 0
    return MCReturn(times[keep], steps[keep], ntr, resampled)


def mc_return_cdf(M: CosetSubset, n_samples: int, rng: np.random.Generator,
                  max_steps: int = DEFAULT_MAX_STEPS, threads: int = 1) -> EmpiricalCDF:
    """Empirical CDF of R_M; compare directly with revised gap CDFs."""
    return EmpiricalCDF(mc_return_times(M, n_samples, rng, max_steps, threads).times)


def support_threshold(M: CosetSubset, n_samples: int, rng: np.random.Generator,
                      max_steps: int = DEFAULT_MAX_STEPS, threads: int = 1,
                      q: float = 1e-4) -> float:
    """Empirical q-quantile of R_M, an upper estimate of the support start."""
    return mc_return_cdf(M, n_samples, rng, max_steps, threads).quantile(q)


def unrevised_factor(M: CosetSubset) -> float:
    """pi^2 [Gamma : Gamma(m)] / (3 #M): R_M scale of an unrevised gap c."""
    from .congruence import index_gamma

    return math.pi**2 * index_gamma(M.m) / (3 * len(M))
