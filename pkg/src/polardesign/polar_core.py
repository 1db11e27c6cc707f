"""Polar-transform algebra over GF(2).

Bit ``t`` of an integer ``j`` is ``(j >> t) & 1`` (little-endian), so
``j = sum_t j_t 2**t``.  The bit-reversal permutation is never applied: codewords
are ``c = u @ G^{(x)n}`` with ``G = [[1, 0], [1, 1]]``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

import numpy as np

MAX_DENSE_N = 12


def log2_exact(N: int) -> int:
    """Return ``n`` with ``N == 2**n``; raise ``ValueError`` otherwise."""
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    return N.bit_length() - 1


def as_index_set(elements: Iterable[int], N: int) -> np.ndarray:
    """Validate and return a sorted ``int64`` array of distinct indices in ``[N]``."""
    arr = np.asarray(sorted(int(e) for e in elements), dtype=np.int64)
    if arr.size:
        if arr[0] < 0 or arr[-1] >= N:
            raise ValueError(f"index out of range [0, {N})")
        if np.any(np.diff(arr) == 0):
            raise ValueError("duplicate indices")
    return arr


def complement(indices: Iterable[int], N: int) -> np.ndarray:
    mask = np.ones(N, dtype=bool)
    mask[np.asarray(list(indices), dtype=np.int64)] = False
    return np.flatnonzero(mask)


def polar_transform(u) -> np.ndarray:
    """Compute ``u @ G^{(x)n}`` over GF(2) with the in-place butterfly.

    Works on the last axis, so a batch of input words can be transformed at once.
    """
    x = np.array(u, dtype=np.uint8) & 1
    N = x.shape[-1]
    log2_exact(N)
    half = 1
    while half < N:
        x = x.reshape(x.shape[:-1] + (N // (2 * half), 2, half))
        x[..., 0, :] ^= x[..., 1, :]
        x = x.reshape(x.shape[:-3] + (N,))
        half *= 2
    return x


def kron_matrix(n: int) -> np.ndarray:
    """Dense ``G^{(x)n}`` as a ``uint8`` matrix; refuses ``n > MAX_DENSE_N``."""
    if n > MAX_DENSE_N:
        raise MemoryError(f"dense Kronecker power limited to n <= {MAX_DENSE_N}")
    G = np.ones((1, 1), dtype=np.uint8)
    base = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, base)
    return G


def index_weight(i):
    """Hamming weight of the binary expansion of ``i`` (scalar or array)."""
    if np.isscalar(i):
        if i < 0:
            raise ValueError("index weight needs i >= 0")
        return int(i).bit_count() if hasattr(int, "bit_count") else bin(int(i)).count("1")
    a = np.asarray(i, dtype=np.int64)
    w = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        w += a & 1
        a = a >> 1
    return w


@lru_cache(maxsize=None)
def _weights(N: int) -> np.ndarray:
    w = index_weight(np.arange(N))
    w.flags.writeable = False
    return w


def weights_of_range(N: int) -> np.ndarray:
    """Index weights of ``0 .. N-1`` (cached, read-only)."""
    return _weights(int(N))


def _q_mask(n: int, Q: Iterable[int]) -> int:
    mask = 0
    for q in Q:
        if not 0 <= q < n:
            raise ValueError(f"layer index {q} outside [0, {n})")
        mask |= 1 << q
    return mask


def set_of_Q(n: int, Q: Iterable[int]) -> np.ndarray:
    """All ``j`` in ``[2**n]`` whose bits at every position in ``Q`` equal one."""
    mask = _q_mask(n, Q)
    j = np.arange(1 << n, dtype=np.int64)
    return j[(j & mask) == mask]


def compress_index(m: int, Q: Iterable[int]) -> int:
    """Delete the bit positions in ``Q`` from ``m``.

    For ``m`` in ``S(Q)`` this equals ``|S(Q) ∩ [m]|``, the position of ``m``
    inside the sub-transform picked out by ``S(Q)``.
    """
    out = 0
    k = 0
    qs = set(Q)
    t = 0
    while m >> t:
        if t not in qs:
            out |= ((m >> t) & 1) << k
            k += 1
        t += 1
    return out


def verify_kron_submatrix(n: int, Q: Iterable[int]) -> bool:
    """Check the ``S(Q)`` sub-transform identity on the materialized matrix.

    Returns True iff ``G[S, S] == G^{(x)(n-|Q|)}`` and ``G[~S, S] == 0``.
    """
    Q = frozenset(Q)
    if n > MAX_DENSE_N:
        raise MemoryError(f"verification limited to n <= {MAX_DENSE_N}")
    G = kron_matrix(n)
    S = set_of_Q(n, Q)
    rest = np.setdiff1d(np.arange(1 << n), S)
    sub_ok = np.array_equal(G[np.ix_(S, S)], kron_matrix(n - len(Q)))
    zero_ok = not np.any(G[np.ix_(rest, S)])
    return bool(sub_ok and zero_ok)
