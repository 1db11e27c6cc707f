"""Ensemble-averaged weight distribution of precoded polar codes.

Averaging over every choice of frozen-bit expressions, a nonzero input whose
last nonzero position is ``i`` gives a codeword distributed like row ``i`` plus a
uniformly random combination of the rows after it.  ``P(N, i, t)`` is the
probability that such a word has weight ``t``; it obeys a two-branch recursion
over dyadic lengths, evaluated here in the natural-log domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .polar_core import as_index_set, log2_exact

LN2 = np.log(2.0)
MAX_EXACT_K = 24


def _log_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``log(exp(a) @ exp(b))`` with per-row / per-column rescaling."""
    with np.errstate(invalid="ignore", divide="ignore"):
        ra = np.max(a, axis=1, keepdims=True)
        ra[~np.isfinite(ra)] = 0.0
        cb = np.max(b, axis=0, keepdims=True)
        cb[~np.isfinite(cb)] = 0.0
        prod = np.exp(a - ra) @ np.exp(b - cb)
        return np.log(prod) + ra + cb


def _transition(L: int) -> np.ndarray:
    """``log C(L - t', k) - (L - t') ln 2`` placed at ``[t', t' + 2k]``."""
    T = np.full((L + 1, 2 * L + 1), -np.inf)
    for t1 in range(L + 1):
        free = L - t1
        k = np.arange(free + 1)
        T[t1, t1 + 2 * k] = gammaln(free + 1) - gammaln(k + 1) - gammaln(free - k + 1) - free * LN2
    return T


@lru_cache(maxsize=8)
def p_table(N: int) -> dict:
    """Log-domain ``P(N', i, t)`` for every dyadic ``N' <= N``.

    Returns a dict mapping ``N'`` to a read-only array of shape
    ``(N', N' + 1)`` indexed by ``[i, t]``; impossible entries hold ``-inf``.
    """
    log2_exact(N)
    if N < 2:
        raise ValueError("p_table needs N >= 2")
    P = np.full((1, 2), -np.inf)
    P[0, 1] = 0.0
    P.setflags(write=False)
    tables = {1: P}
    L = 1
    while L < N:
        nxt = np.full((2 * L, 2 * L + 1), -np.inf)
        # lower half: row i plus a uniformly random mix of the upper half rows
        nxt[:L] = _log_matmul(P, _transition(L))
        # upper half: the word repeats itself, weight doubles
        nxt[L:, 0::2] = P
        L *= 2
        P = nxt
        P.setflags(write=False)
        tables[L] = P
    return tables


@dataclass(frozen=True)
class WeightDistribution:
    """Log-multiplicities ``logW[t]`` for ``t = 0..N`` (``-inf`` when absent)."""

    N: int
    K: int
    logW: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.logW))

    def values(self) -> np.ndarray:
        return np.exp(self.logW)

    def get(self, t: int) -> float:
        return float(np.exp(self.logW[t]))

    def rounded(self, t: int) -> int:
        return int(np.rint(self.get(t)))

    def items(self):
        for t in self.support:
            yield int(t), float(np.exp(self.logW[t]))

    def total(self) -> float:
        return float(np.exp(logsumexp(self.logW))) if self.support.size else 0.0

    def scaled(self, factor: float) -> "WeightDistribution":
        return WeightDistribution(self.N, self.K, self.logW + np.log(factor))

    @classmethod
    def from_counts(cls, N: int, K: int, counts) -> "WeightDistribution":
        counts = np.zeros(N + 1) + np.asarray(counts, dtype=float)
        with np.errstate(divide="ignore"):
            logW = np.log(counts)
        logW[0] = -np.inf
        return cls(N, K, logW)

    def to_text(self) -> str:
        return "".join(f"{t} {w:.6g}\n" for t, w in self.items())


def average_weight_distribution(N: int, A) -> WeightDistribution:
    """Ensemble-averaged weight distribution for information set ``A``.

    ``W_t = sum_{i in A} 2^(K - rank(i)) P(N, i, t)`` where ``rank(i)`` counts
    the information indices ``<= i``.
    """
    A = as_index_set(A, N)
    K = A.size
    if K == 0:
        return WeightDistribution(N, 0, np.full(N + 1, -np.inf))
    P = p_table(N)[N] if N > 1 else np.array([[-np.inf, 0.0]])
    shift = (K - np.arange(1, K + 1)) * LN2
    with np.errstate(divide="ignore"):
        logW = logsumexp(P[A] + shift[:, None], axis=0)
    logW[0] = -np.inf
    return WeightDistribution(N, K, logW)


def _pack_rows(M: np.ndarray) -> np.ndarray:
    """Pack 0/1 rows into little-endian uint64 words."""
    bits = np.packbits(M.astype(np.uint8), axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.pad(bits, ((0, 0), (0, pad)))
    return bits.view(np.uint64)


def _span(rows: np.ndarray) -> np.ndarray:
    """All ``2**k`` XOR combinations of packed rows, by doubling."""
    words = np.zeros((1, rows.shape[1]), dtype=np.uint64)
    for r in rows:
        words = np.concatenate([words, words ^ r])
    return words


def weight_histogram(G: np.ndarray) -> np.ndarray:
    """Histogram of codeword weights of the row space of ``G`` (``K <= 24``)."""
    G = np.asarray(G, dtype=np.uint8)
    K, N = G.shape
    if K > MAX_EXACT_K:
        raise MemoryError(f"exact enumeration limited to K <= {MAX_EXACT_K}")
    hist = np.zeros(N + 1, dtype=np.int64)
    if K == 0:
        hist[0] = 1
        return hist
    packed = _pack_rows(G)
    k_lo = min(K, 12)
    lo = _span(packed[:k_lo])
    hi = _span(packed[k_lo:])
    for h in hi:
        w = np.bitwise_count(lo ^ h).sum(axis=1)
        hist += np.bincount(w, minlength=N + 1)
    return hist


def exact_weight_distribution(code) -> WeightDistribution:
    """Exact weight distribution of one code by enumerating all inputs.

    ``code`` must provide ``N``, ``K`` and ``generator_matrix()``.
    """
    if code.K > MAX_EXACT_K:
        raise MemoryError(f"exact enumeration limited to K <= {MAX_EXACT_K}")
    hist = weight_histogram(code.generator_matrix())
    return WeightDistribution.from_counts(code.N, code.K, hist)
