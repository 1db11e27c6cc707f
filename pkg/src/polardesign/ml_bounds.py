"""Frame-error estimates: union bound, tangential-sphere bound and the SC estimate.

Signal model: BPSK with unit symbol energy, noise variance
``sigma^2 = 1 / (2 R Eb/N0)``.  A weight-``t`` neighbour sits at Euclidean
distance ``2 sqrt(t)`` from the transmitted point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betainc, gammainc, gammaincc, log_ndtr, logsumexp, ndtr

from .weights import WeightDistribution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FerEstimate:
    value: float
    method: str
    EbN0_dB: float
    R: float
    raw: float | None = None
    fallback: bool = False

    def __float__(self) -> float:
        return self.value


def log_qfunc(x):
    """``log Q(x)``; stays finite far into the tail."""
    return log_ndtr(-np.asarray(x, dtype=float))


def qfunc(x):
    return ndtr(-np.asarray(x, dtype=float))


def noise_variance(EbN0_dB: float, R: float) -> float:
    return 1.0 / (2.0 * R * 10.0 ** (EbN0_dB / 10.0))


def _terms(W: WeightDistribution):
    t = W.support
    t = t[(t > 0)]
    return t, W.logW[t]


def union_bound(W: WeightDistribution, EbN0_dB: float, R: float) -> FerEstimate:
    """``sum_t W_t Q(sqrt(2 t R Eb/N0))``, clamped to 1 (raw value kept)."""
    t, lw = _terms(W)
    if t.size == 0:
        return FerEstimate(0.0, "union", EbN0_dB, R, raw=0.0)
    snr = R * 10.0 ** (EbN0_dB / 10.0)
    raw = float(np.exp(logsumexp(lw + log_qfunc(np.sqrt(2.0 * t * snr)))))
    return FerEstimate(min(raw, 1.0), "union", EbN0_dB, R, raw=raw)


def _cone_mass(r, beta0, A, N):
    """Sum of ``A_k`` times the normalized solid angle of each spherical cap."""
    cos = np.clip(beta0 / r, 0.0, 1.0)
    sin2 = 1.0 - cos**2
    return float(np.sum(A * 0.5 * betainc((N - 2) / 2.0, 0.5, sin2)))


def tsb_radius(beta0: np.ndarray, A: np.ndarray, N: int, tol: float = 1e-10):
    """Cone radius solving the optimality condition, or None when it has no root."""
    if 0.5 * A.sum() <= 1.0:
        return None
    lo = float(beta0.min())
    hi = 2.0 * lo
    while _cone_mass(hi, beta0, A, N) < 1.0:
        hi *= 2.0
        if hi > 1e12:
            return None
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if _cone_mass(mid, beta0, A, N) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def tsb(W: WeightDistribution, N: int, EbN0_dB: float, R: float, epsrel: float = 1e-6) -> FerEstimate:
    """Poltyrev's tangential-sphere bound on the frame error probability.

    The all-ones neighbour (``t = N``) lies on the cone axis and is covered by
    the term for noise beyond the origin.  The result never exceeds the
    clamped union bound.
    """
    ub = union_bound(W, EbN0_dB, R)
    t, lw = _terms(W)
    t_in = t < N
    t, lw = t[t_in], lw[t_in]
    if t.size == 0:
        return FerEstimate(0.0 if ub.value == 0.0 else ub.value, "tsb", EbN0_dB, R, raw=ub.raw)
    A = np.exp(lw)
    s2 = noise_variance(EbN0_dB, R)
    s = np.sqrt(s2)
    rootN = np.sqrt(N)
    beta0 = np.sqrt(t) / np.sqrt(1.0 - t / N)
    r = tsb_radius(beta0, A, N)
    if r is None:
        log.debug("tsb: no cone radius root, using union bound")
        return FerEstimate(ub.value, "tsb", EbN0_dB, R, raw=ub.raw, fallback=True)

    a_in = (N - 2) / 2.0
    a_out = (N - 1) / 2.0

    def inner(z1):
        scale = 1.0 - z1 / rootN
        rz = r * scale
        bk = beta0 * scale
        live = bk < rz
        out = gammaincc(a_out, rz * rz / (2.0 * s2))
        if live.any():
            b = bk[live]
            w = A[live]

            def f(u):
                z2 = b + u * (rz - b)
                dens = np.exp(-0.5 * (z2 / s) ** 2) / (s * np.sqrt(2 * np.pi))
                return w * (rz - b) * dens * gammainc(a_in, np.maximum(rz * rz - z2 * z2, 0.0) / (2.0 * s2))

            vals, _ = integrate.quad_vec(f, 0.0, 1.0, epsrel=epsrel * 1e-2, epsabs=0.0)
            out += vals.sum()
        return min(out, 1.0) * np.exp(-0.5 * (z1 / s) ** 2) / (s * np.sqrt(2 * np.pi))

    lo, hi = -12.0 * s, min(12.0 * s, rootN)
    body, _ = integrate.quad(inner, lo, hi, epsrel=epsrel, epsabs=0.0, limit=200)
    tail = float(qfunc(hi / s))
    raw = body + tail
    return FerEstimate(float(min(raw, ub.value)), "tsb", EbN0_dB, R, raw=raw)


def sc_fer_estimate(frozen, means: np.ndarray, EbN0_dB: float = float("nan"), R: float = float("nan")) -> FerEstimate:
    """``1 - prod_{i not frozen} (1 - Q(sqrt(mu_i / 2)))`` from Gaussian-approximation means."""
    means = np.asarray(means, dtype=float)
    mask = np.ones(means.size, dtype=bool)
    mask[np.asarray(list(frozen), dtype=np.int64)] = False
    if not mask.any():
        return FerEstimate(0.0, "sc", EbN0_dB, R)
    q = qfunc(np.sqrt(means[mask] / 2.0))
    val = float(-np.expm1(np.sum(np.log1p(-q))))
    return FerEstimate(val, "sc", EbN0_dB, R)
