"""Truth-table scan kernels with numba and pure-numpy implementations.

The brute-force certification oracles spend essentially all their time in
full scans of 2^n truth-table entries, repeated once per candidate
coordinate subset.  Each scan kernel therefore exists twice: a fused
``@njit`` loop and a vectorized numpy fallback.

Backend selection is driven by the ``DFJUNTA_BACKEND`` environment
variable: ``numpy`` forces the fallback, ``numba`` requires the JIT
(import error if numba is missing), and unset/empty picks numba when it
imports.  ``benchmarks/backend_bench.py`` times the two paths against
each other.
"""

from __future__ import annotations

import os

import numpy as np

_CHOICE = os.environ.get("DFJUNTA_BACKEND", "").strip().lower()
if _CHOICE not in ("", "numba", "numpy"):
    raise ValueError(
        f"DFJUNTA_BACKEND must be 'numba' or 'numpy', got {_CHOICE!r}"
    )

if _CHOICE == "numpy":
    _njit = None
else:
    try:
        from numba import njit as _njit
    except ImportError:
        if _CHOICE == "numba":
            raise
        _njit = None

BACKEND = "numba" if _njit is not None else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations

def gather_bits_numpy(values: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Pack the bits of each value found at ``positions`` (0-based, LSB first).

    ``out[i]`` has bit t equal to bit ``positions[t]`` of ``values[i]``.
    """
    values = np.ascontiguousarray(values, dtype=np.uint64)
    out = np.zeros(values.shape[0], dtype=np.uint32)
    for t, p in enumerate(positions):
        out |= ((values >> np.uint64(p)) & np.uint64(1)).astype(np.uint32) << np.uint32(t)
    return out


def fit_counts_numpy(table: np.ndarray, positions: np.ndarray, m: int):
    """Per-projection class counts over a full truth table.

    Returns ``(c0, c1)`` where ``cb[a]`` counts the inputs v with
    ``table[v] == b`` whose bits at ``positions`` pack to ``a``.
    """
    idx = np.arange(table.shape[0], dtype=np.uint64)
    proj = gather_bits_numpy(idx, positions).astype(np.int64)
    key = (proj << 1) | table.astype(np.int64)
    cnt = np.bincount(key, minlength=2 * m)
    return cnt[0::2].copy(), cnt[1::2].copy()


def fit_masses_numpy(table: np.ndarray, weights: np.ndarray,
                     positions: np.ndarray, m: int):
    """Weighted variant of :func:`fit_counts_numpy` (float64 masses)."""
    idx = np.arange(table.shape[0], dtype=np.uint64)
    proj = gather_bits_numpy(idx, positions).astype(np.int64)
    key = (proj << 1) | table.astype(np.int64)
    acc = np.bincount(key, weights=weights, minlength=2 * m)
    return acc[0::2].copy(), acc[1::2].copy()


# ---------------------------------------------------------------------------
# numba implementations

if _njit is not None:

    @_njit(cache=True)
    def _gather_bits_jit(values, positions):  # pragma: no cover - jitted
        out = np.zeros(values.shape[0], dtype=np.uint32)
        for i in range(values.shape[0]):
            v = values[i]
            acc = np.uint32(0)
            for t in range(positions.shape[0]):
                acc |= np.uint32((v >> positions[t]) & np.uint64(1)) << np.uint32(t)
            out[i] = acc
        return out

    @_njit(cache=True)
    def _fit_counts_jit(table, positions, m):  # pragma: no cover - jitted
        c0 = np.zeros(m, dtype=np.int64)
        c1 = np.zeros(m, dtype=np.int64)
        for v in range(table.shape[0]):
            a = 0
            for t in range(positions.shape[0]):
                a |= ((v >> positions[t]) & 1) << t
            if table[v]:
                c1[a] += 1
            else:
                c0[a] += 1
        return c0, c1

    @_njit(cache=True)
    def _fit_masses_jit(table, weights, positions, m):  # pragma: no cover
        m0 = np.zeros(m, dtype=np.float64)
        m1 = np.zeros(m, dtype=np.float64)
        for v in range(table.shape[0]):
            a = 0
            for t in range(positions.shape[0]):
                a |= ((v >> positions[t]) & 1) << t
            if table[v]:
                m1[a] += weights[v]
            else:
                m0[a] += weights[v]
        return m0, m1

    def gather_bits_numba(values, positions):
        values = np.ascontiguousarray(values, dtype=np.uint64)
        positions = np.ascontiguousarray(positions, dtype=np.uint64)
        return _gather_bits_jit(values, positions)

    def fit_counts_numba(table, positions, m):
        table = np.ascontiguousarray(table, dtype=np.uint8)
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        return _fit_counts_jit(table, positions, m)

    def fit_masses_numba(table, weights, positions, m):
        table = np.ascontiguousarray(table, dtype=np.uint8)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        positions = np.ascontiguousarray(positions, dtype=np.int64)
        return _fit_masses_jit(table, weights, positions, m)

else:
    gather_bits_numba = None
    fit_counts_numba = None
    fit_masses_numba = None


if BACKEND == "numba":
    gather_bits = gather_bits_numba
    fit_counts = fit_counts_numba
    fit_masses = fit_masses_numba
else:
    gather_bits = gather_bits_numpy
    fit_counts = fit_counts_numpy
    fit_masses = fit_masses_numpy


def parity_bits(values: np.ndarray, mask: int) -> np.ndarray:
    """Parity of ``v & mask`` for each packed value (numpy only, n <= 64)."""
    x = np.ascontiguousarray(values, dtype=np.uint64) & np.uint64(mask)
    for s in (32, 16, 8, 4, 2, 1):
        x ^= x >> np.uint64(s)
    return (x & np.uint64(1)).astype(np.uint8)
