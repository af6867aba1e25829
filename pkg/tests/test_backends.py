"""The numba kernels and the numpy fallback must agree bit for bit."""

from fractions import Fraction as F

import numpy as np
import pytest

from fareyflow._backend import backend, set_backend, use_backend
from fareyflow.congruence import den_congruent, num_not_congruent
from fareyflow.est import ESTConfig, detect_overlap_depth, est_lambda, est_limit_section_mc
from fareyflow.section import mc_return_times, w_point_returns
from fareyflow.stream import collect_gaps, count_subset, stream_blocks


def both(fn):
    out = {}
    for name in ("numba", "numpy"):
        with use_backend(name):
            out[name] = fn()
    return out["numba"], out["numpy"]


@pytest.mark.parametrize("Q, I, M", [
    (1, None, None), (97, None, den_congruent(3, 1)), (400, (F(1, 7), F(5, 9)), num_not_congruent(4)),
    (2500, None, den_congruent(6, 1)),
])
def test_sweeps(Q, I, M):
    a, b = both(lambda: collect_gaps(Q, I, M))
    assert np.array_equal(a.a, b.a) and np.array_equal(a.q, b.q)
    a, b = both(lambda: count_subset(Q, I, M, bins=7))
    assert a[:2] == b[:2] and np.array_equal(a[2], b[2])
    a, b = both(lambda: np.concatenate(list(stream_blocks(Q, I, M))))
    assert np.array_equal(a, b)


def test_exact_returns():
    a, b = both(lambda: w_point_returns(150, den_congruent(4, 1)))
    for f in ("time_num", "time_den", "steps", "land_A", "land_B", "land_coset"):
        assert np.array_equal(getattr(a, f), getattr(b, f)), f


@pytest.mark.parametrize("m", [1, 3, 5])
def test_monte_carlo(m):
    M = den_congruent(m, 1)
    a, b = both(lambda: mc_return_times(M, 30_000, np.random.default_rng(m)))
    assert a.times.tobytes() == b.times.tobytes() and np.array_equal(a.steps, b.steps)


def test_est_kernels():
    for cfg in (ESTConfig(300, F(1, 100), 2), ESTConfig(120, F(3, 2), F(5, 2), den_congruent(3, 1), (F(1, 5), F(2, 3)))):
        a, b = both(lambda: est_lambda(cfg))
        assert a == b
    a, b = both(lambda: detect_overlap_depth(F(2), 2, None, 200))
    assert a == b and a >= 1
    a, b = both(lambda: est_limit_section_mc(F(1, 2), 2, den_congruent(2, 1), 2, 20_000, np.random.default_rng(3)))
    assert a == pytest.approx(b, rel=1e-12)


def test_backend_switching():
    start = backend()
    with use_backend("numpy"):
        assert backend() == "numpy"
    assert backend() == start
    with pytest.raises(ValueError):
        set_backend("cuda")


def test_env_flag_selects_numpy(tmp_path):
    import os
    import subprocess
    import sys

    env = dict(os.environ, FAREYFLOW_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", "import fareyflow._backend as b; print(b.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
