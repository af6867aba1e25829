"""Backend-dispatching entry points for the hot loops.

Each function forwards to the numba kernel or to its numpy counterpart
according to :func:`fareyflow._backend.backend`.
"""

from __future__ import annotations

import numpy as np

from .._backend import backend
from . import farey as _farey
from . import intervals as _iv
from . import section as _sec

BLOCK_CAP = 1 << 20
REJECT_TOL = 1e-12


def sweep_block(state, Q, hi_num, hi_den, m, codes, cap=BLOCK_CAP):
    """Advance ``state``; return (rows, finished) for retained fractions."""
    if backend() == "numba":
        out = np.empty((cap, _farey.BLOCK_COLS), np.int64)
        n, finished = _farey.sweep_block_nb(state, Q, hi_num, hi_den, m, codes, out)
        return out[:n], bool(finished)
    return _farey.sweep_block_np(state, Q, hi_num, hi_den, m, codes, cap)


def count_sweep(state, Q, hi_num, hi_den, m, codes, bins):
    counts = np.zeros(bins, np.int64)
    acc = np.array([0, -1, -1, -1, -1, 0, 1], np.int64)
    if backend() == "numba":
        _farey.count_sweep_nb(state, Q, hi_num, hi_den, m, codes, counts, acc)
    else:
        _farey.count_sweep_np(state, Q, hi_num, hi_den, m, codes, counts, acc)
    return counts, acc


def mc_return(a0, b0, cidx, mats, codes, m, max_steps, tol=REJECT_TOL):
    fn = _sec.mc_return_nb if backend() == "numba" else _sec.mc_return_np
    return fn(a0, b0, cidx, mats, codes, m, max_steps, tol)


def exact_return(A, B, cos, Q, m, codes, max_steps):
    fn = _sec.exact_return_nb if backend() == "numba" else _sec.exact_return_np
    return fn(A, B, cos, Q, m, codes, max_steps)


def est_section(a0, b0, cidx, mats, codes, m, K, t, alpha, max_steps, tol=REJECT_TOL):
    fn = _sec.est_section_nb if backend() == "numba" else _sec.est_section_np
    return fn(a0, b0, cidx, mats, codes, m, K, t, alpha, max_steps, tol)


def clusters(a, q, nmin, an, ad):
    fn = _iv.clusters_nb if backend() == "numba" else _iv.clusters_np
    return fn(a, q, nmin, an, ad)


def overlap_depth(a, q, nmin, an, ad):
    fn = _iv.overlap_depth_nb if backend() == "numba" else _iv.overlap_depth_np
    return int(fn(a, q, nmin, an, ad))


def accumulate(a, q, lo_idx, hi_idx, an, ad, L, U, qmax):
    fn = _iv.accumulate_nb if backend() == "numba" else _iv.accumulate_np
    return fn(a, q, lo_idx, hi_idx, an, ad, L, U, qmax)

OK_STATUS, TRUNCATED_STATUS, REJECTED_STATUS = _sec.OK, _sec.TRUNCATED, _sec.REJECTED
