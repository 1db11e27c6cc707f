"""Bit-channel reliabilities and entropies for BPSK over AWGN.

Two estimators live here:

* the Gaussian approximation of density evolution (LLR means), used to rank
  bit-channels and to predict the SC error probability;
* a mutual-information recursion built on the three-constant J-function
  approximation, used for the entropies that feed the list-size bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from scipy import integrate

from .polar_core import weights_of_range

# Chung's fit of phi(x) = 1 - E[tanh(L/2)], L ~ N(x, 2x)
_PHI_A, _PHI_B, _PHI_C = 0.4527, 0.86, 0.0218
_PHI_SWITCH = 10.0

# Brannstrom's J(sigma) fit
_J_H1, _J_H2, _J_H3 = 0.3073, 0.8935, 1.1064
J_MAX = 1.0 - 1e-12


def channel_llr_mean(EbN0_dB: float, R: float) -> float:
    """Mean of the channel LLR for the all-zero word, ``4 R Eb/N0``."""
    return 4.0 * R * 10.0 ** (EbN0_dB / 10.0)


def _log_phi_tail(x):
    return 0.5 * np.log(np.pi / x) - x / 4.0 + np.log1p(-10.0 / (7.0 * x))


def log_phi(x):
    """``log phi(x)`` using the two-piece approximation, clipped at 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x < _PHI_SWITCH
    out[lo] = -_PHI_A * np.maximum(x[lo], 0.0) ** _PHI_B + _PHI_C
    out[~lo] = _log_phi_tail(x[~lo])
    return np.minimum(out, 0.0)


_LOG_PHI_SWITCH = -_PHI_A * _PHI_SWITCH**_PHI_B + _PHI_C


def phi_inverse_log(ly):
    """Invert :func:`log_phi` given ``log y``; vectorized bisection on the tail."""
    ly = np.asarray(ly, dtype=float)
    out = np.empty_like(ly)
    head = ly >= _LOG_PHI_SWITCH
    out[head] = np.maximum((_PHI_C - ly[head]) / _PHI_A, 0.0) ** (1.0 / _PHI_B)
    if np.any(~head):
        target = ly[~head]
        lo = np.full(target.shape, _PHI_SWITCH)
        hi = np.full(target.shape, 2 * _PHI_SWITCH)
        while True:
            grow = _log_phi_tail(hi) > target
            if not grow.any():
                break
            hi[grow] *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            above = _log_phi_tail(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-12 * hi):
                break
        out[~head] = 0.5 * (lo + hi)
    return out


def check_node_mean(mu):
    """LLR mean after a check node combining two channels of mean ``mu``."""
    lp = log_phi(mu)
    # 1 - (1 - p)^2 = p (2 - p)
    return phi_inverse_log(lp + np.log(2.0 - np.exp(lp)))


def gaussian_approx_means(n: int, EbN0_dB: float, R: float) -> np.ndarray:
    """LLR means of all ``2**n`` bit-channels.

    Child ``2i`` is the check-node (minus) channel of parent ``i`` and child
    ``2i + 1`` the variable-node (plus) channel, so index bits are consumed
    from the most significant end.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 < R <= 1.0:
        raise ValueError("rate must lie in (0, 1]")
    mu = np.array([channel_llr_mean(EbN0_dB, R)])
    for _ in range(n):
        nxt = np.empty(2 * mu.size)
        nxt[0::2] = check_node_mean(mu)
        nxt[1::2] = 2.0 * mu
        mu = nxt
    return mu


def J(sigma):
    s = np.maximum(np.asarray(sigma, dtype=float), 0.0)
    val = (1.0 - 2.0 ** (-_J_H1 * s ** (2.0 * _J_H2))) ** _J_H3
    return np.clip(val, 0.0, J_MAX)


def J_inverse(I):
    I = np.clip(np.asarray(I, dtype=float), 1e-300, J_MAX)
    return (-np.log2(1.0 - I ** (1.0 / _J_H3)) / _J_H1) ** (1.0 / (2.0 * _J_H2))


def biawgn_capacity(EbN0_dB: float, R: float) -> float:
    """Symmetric capacity of BPSK over AWGN, by quadrature over the LLR density."""
    mu = channel_llr_mean(EbN0_dB, R)
    if mu <= 0.0:
        return 0.0
    s = np.sqrt(2.0 * mu)
    f = lambda l: np.exp(-0.5 * ((l - mu) / s) ** 2) * np.logaddexp(0.0, -l)
    val, _ = integrate.quad(f, mu - 40 * s, mu + 40 * s, limit=400, epsabs=1e-14)
    loss = val / (s * np.sqrt(2 * np.pi) * np.log(2.0))
    return float(np.clip(1.0 - loss, 0.0, 1.0))


@dataclass(frozen=True)
class EntropyTable:
    """Bit-channel entropies ``H[level][i]`` for all levels ``0..n``.

    ``levels[k]`` holds the ``2**k`` entropies of the length-``2**k`` transform,
    so intermediate levels can be looked up by the tightened bounds.
    """

    n: int
    EbN0_dB: float
    R: float
    levels: tuple = field(repr=False)
    recursion: str = "dual"

    @property
    def H(self) -> np.ndarray:
        return self.levels[self.n]

    def at(self, level: int, i: int) -> float:
        return float(self.levels[level][i])


def mutual_information_levels(I0: float, n: int, recursion: str = "dual") -> list:
    """Propagate mutual information through ``n`` polarization levels.

    ``recursion='dual'`` evaluates both children with the J-function
    (``I+ = J(sqrt2 J^-1(I))``); ``'conserving'`` sets ``I+ = 2I - I-`` so the
    per-level total equals ``2**k I0`` exactly.
    """
    if recursion not in ("dual", "conserving"):
        raise ValueError(f"unknown recursion {recursion!r}")
    levels = [np.array([I0], dtype=float)]
    I = levels[0]
    r2 = np.sqrt(2.0)
    for _ in range(n):
        minus = 1.0 - J(r2 * J_inverse(1.0 - I))
        if recursion == "dual":
            plus = J(r2 * J_inverse(I))
        else:
            plus = np.clip(2.0 * I - minus, 0.0, 1.0)
        nxt = np.empty(2 * I.size)
        nxt[0::2] = minus
        nxt[1::2] = plus
        I = nxt
        levels.append(I)
    return levels


@lru_cache(maxsize=64)
def entropy_table(n: int, EbN0_dB: float, R: float, recursion: str = "dual") -> EntropyTable:
    """Entropy table at one operating point (cached; arrays are read-only)."""
    I0 = biawgn_capacity(EbN0_dB, R)
    levels = []
    for I in mutual_information_levels(I0, n, recursion):
        H = np.clip(1.0 - I, 0.0, 1.0)
        H.setflags(write=False)
        levels.append(H)
    return EntropyTable(n=n, EbN0_dB=float(EbN0_dB), R=float(R), levels=tuple(levels), recursion=recursion)


@dataclass(frozen=True)
class ReliabilitySequence:
    """Bit-channel indices sorted by ascending reliability, split by index weight.

    ``tau[v]`` is ``r`` restricted to weight-``v`` indices and ``z[v]`` lists the
    same indices in ascending numeric order.
    """

    n: int
    r: np.ndarray
    tau: tuple
    z: tuple

    @property
    def N(self) -> int:
        return 1 << self.n

    def least_reliable(self, count: int) -> np.ndarray:
        return np.sort(self.r[:count])

    def rank(self) -> np.ndarray:
        """``rank[i]`` = position of index ``i`` inside ``r``."""
        pos = np.empty(self.N, dtype=np.int64)
        pos[self.r] = np.arange(self.N)
        return pos


def reliability_from_means(mu: np.ndarray) -> ReliabilitySequence:
    N = mu.size
    n = N.bit_length() - 1
    # ascending mean, ties broken by ascending index
    r = np.lexsort((np.arange(N), mu)).astype(np.int64)
    wt = weights_of_range(N)
    tau = tuple(r[wt[r] == v] for v in range(n + 1))
    z = tuple(np.flatnonzero(wt == v) for v in range(n + 1))
    for v in range(n + 1):
        assert tau[v].size == comb(n, v)
    return ReliabilitySequence(n=n, r=r, tau=tau, z=z)


@lru_cache(maxsize=256)
def reliability_sequence(n: int, EbN0_dB: float, R: float) -> ReliabilitySequence:
    return reliability_from_means(gaussian_approx_means(n, EbN0_dB, R))


def reliability_frozen_set(n: int, K: int, EbN0_dB: float, R: float | None = None) -> np.ndarray:
    """The ``N - K`` least reliable indices (the reliability-based frozen set)."""
    N = 1 << n
    R = K / N if R is None else R
    return reliability_sequence(n, EbN0_dB, R).least_reliable(N - K)


def export_text(values) -> str:
    """One value per line, whitespace friendly."""
    arr = np.asarray(values)
    if arr.dtype.kind in "iu":
        return "\n".join(str(int(v)) for v in arr) + "\n"
    return "\n".join(f"{v:.12g}" for v in arr) + "\n"
