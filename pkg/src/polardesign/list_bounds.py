"""Entropy profiles bounding the log list size an SCL decoder needs.

At step ``m`` the profile tracks the conditional entropy of the information
bits decided so far.  Information bits add ``H[n][m]``; frozen bits subtract
how much the known value reveals, estimated in one of four ways:

low    ``1 - H[n][m]`` (the loosest decrement, floored at zero)
tight  ``H[n-|Q|][m~] - H[n][m]`` with ``Q`` from the greedy sub-transform search
apx    no decrement below index ``lam``, the tight decrement from ``lam`` on
up     no decrement at all
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numba
import numpy as np

from .channel import EntropyTable
from .polar_core import as_index_set, compress_index

VARIANTS = ("low", "tight", "apx", "up")


@dataclass(frozen=True)
class BoundProfile:
    variant: str
    values: np.ndarray = field(repr=False)
    lam: int | None = None

    @property
    def peak(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.values))

    def to_text(self) -> str:
        return "".join(f"{m} {v:.10g}\n" for m, v in enumerate(self.values))


def flat_entropies(H: EntropyTable) -> np.ndarray:
    """All levels concatenated; level ``k`` starts at offset ``2**k - 1``."""
    return np.concatenate(H.levels)


@numba.njit(cache=True)
def _greedy_q(m, prefix, count):
    """Greedy choice of layer set Q as a bit mask.

    ``prefix[:count]`` holds the information indices below ``m``.  Keeps adding
    the layer (set bit of ``m``) that the fewest surviving prefix indices also
    have set, smallest layer on ties, until no prefix index has every bit in Q.
    """
    lam = prefix[:count].copy()
    size = count
    Q = 0
    while size > 0:
        best_q = -1
        best_c = size + 1
        t = 0
        mm = m
        while mm:
            if (mm & 1) and not (Q >> t) & 1:
                c = 0
                for k in range(size):
                    c += (lam[k] >> t) & 1
                if c < best_c:
                    best_c = c
                    best_q = t
            mm >>= 1
            t += 1
        Q |= 1 << best_q
        w = 0
        for k in range(size):
            if (lam[k] >> best_q) & 1:
                lam[w] = lam[k]
                w += 1
        size = w
    return Q


@numba.njit(cache=True)
def _compress(m, Q):
    out = 0
    k = 0
    t = 0
    while m >> t:
        if not (Q >> t) & 1:
            out |= ((m >> t) & 1) << k
            k += 1
        t += 1
    return out


@numba.njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        c += x & 1
        x >>= 1
    return c


@numba.njit(cache=True)
def _profile(info, Hflat, n, mode, lam):
    # mode: 0 low, 1 tight/apx (threshold lam), 2 up
    N = 1 << n
    top = N - 1
    out = np.empty(N)
    prefix = np.empty(N, dtype=np.int64)
    count = 0
    d = 0.0
    for m in range(N):
        h = Hflat[top + m]
        if info[m]:
            d += h
            prefix[count] = m
            count += 1
        elif mode == 0:
            d = max(d - (1.0 - h), 0.0)
        elif mode == 1 and m >= lam and d > 0.0:
            Q = _greedy_q(m, prefix, count)
            lvl = n - _popcount(Q)
            hb = Hflat[(1 << lvl) - 1 + _compress(m, Q)]
            d = max(d - (hb - h), 0.0)
        out[m] = d
    return out


def _info_mask(A, N: int) -> np.ndarray:
    mask = np.zeros(N, dtype=np.uint8)
    mask[as_index_set(A, N)] = 1
    return mask


def _run(A, H: EntropyTable, mode: int, lam: int) -> np.ndarray:
    N = 1 << H.n
    return _profile(_info_mask(A, N), flat_entropies(H), H.n, mode, lam)


def d_low_profile(A, H: EntropyTable) -> BoundProfile:
    return BoundProfile("low", _run(A, H, 0, 0))


def d_tight_profile(A, H: EntropyTable) -> BoundProfile:
    return BoundProfile("tight", _run(A, H, 1, 0))


def d_apx_profile(A, H: EntropyTable, lam: int) -> BoundProfile:
    N = 1 << H.n
    if not 0 <= lam <= N:
        raise ValueError(f"lambda must lie in [0, {N}]")
    return BoundProfile("apx", _run(A, H, 1, int(lam)), lam=int(lam))


def d_up_profile(A, H: EntropyTable) -> BoundProfile:
    return BoundProfile("up", _run(A, H, 2, 0))


def profile(variant: str, A, H: EntropyTable, lam: int | None = None) -> BoundProfile:
    if variant == "low":
        return d_low_profile(A, H)
    if variant == "tight":
        return d_tight_profile(A, H)
    if variant == "apx":
        if lam is None:
            raise ValueError("the apx profile needs an explicit lambda")
        return d_apx_profile(A, H, lam)
    if variant == "up":
        return d_up_profile(A, H)
    raise ValueError(f"unknown variant {variant!r}")


def d_apx_peak(info_mask: np.ndarray, Hflat: np.ndarray, n: int, lam: int) -> float:
    """Fast path for the optimizer: peak of the apx profile from precomputed inputs."""
    return float(_profile(info_mask, Hflat, n, 1, lam).max())


def _layers(Q_mask: int) -> frozenset:
    return frozenset(t for t in range(Q_mask.bit_length()) if (Q_mask >> t) & 1)


def construct_set_Q(n: int, m: int, A_prefix) -> frozenset:
    """Greedy layer set ``Q`` for step ``m`` given the information indices below ``m``."""
    if m <= 0 or m >= 1 << n:
        raise ValueError("m must lie in [1, 2**n)")
    prefix = as_index_set(A_prefix, 1 << n)
    if prefix.size and prefix[-1] >= m:
        raise ValueError("prefix indices must be < m")
    return _layers(int(_greedy_q(m, prefix, prefix.size)))


def is_admissible_Q(n: int, m: int, A_prefix, Q) -> bool:
    """``Q`` selects only set bits of ``m`` and no prefix index has all of them set."""
    mask = 0
    for q in Q:
        mask |= 1 << q
    if m & mask != mask:
        return False
    return not any((int(i) & mask) == mask for i in A_prefix)


def bound_index(n: int, m: int, Q) -> tuple:
    """Level and index ``(n - |Q|, |S(Q) ∩ [m]|)`` of the entropy that bounds step ``m``."""
    return n - len(Q), compress_index(m, Q)


def optimal_Q(n: int, m: int, A_prefix, H: EntropyTable) -> frozenset:
    """Exhaustive search over minimal admissible layer sets (small ``n`` only).

    Ties go to the smaller set, then the lexicographically smaller one.
    """
    if m <= 0 or m >= 1 << n:
        raise ValueError("m must lie in [1, 2**n)")
    prefix = [int(i) for i in A_prefix]
    M = [t for t in range(n) if (m >> t) & 1]
    admissible = []
    for k in range(len(M) + 1):
        for Q in combinations(M, k):
            if not is_admissible_Q(n, m, prefix, Q):
                continue
            Qs = frozenset(Q)
            if any(P <= Qs for P in admissible):
                continue
            admissible.append(Qs)
    best = None
    for Q in admissible:
        lvl, idx = bound_index(n, m, Q)
        key = (H.at(lvl, idx), len(Q), tuple(sorted(Q)))
        if best is None or key < best[0]:
            best = (key, Q)
    return best[1]


def bound_value(n: int, m: int, Q, H: EntropyTable) -> float:
    lvl, idx = bound_index(n, m, Q)
    return H.at(lvl, idx)


def default_lambda(N: int, K: int) -> int | None:
    """Published thresholds: 32 for (128, 64) and 96 for (512, 256)."""
    return {(128, 64): 32, (512, 256): 96}.get((N, K))
