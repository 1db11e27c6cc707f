"""Precoded polar codes: encoder with frozen-bit expressions and an SC/SCL decoder.

Every frozen bit ``u_i`` is a GF(2) combination of the information bits with
smaller index.  The default coefficients are read off the binary expansion of
104348/33215 (a rational approximation of pi) with one running counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .polar_core import as_index_set, complement, log2_exact, polar_transform

OMEGA_NUM, OMEGA_DEN = 104348, 33215


def omega_bits(count: int) -> np.ndarray:
    """First ``count`` bits of 104348/33215 in binary, integer part first.

    Exact long division: the integer part 3 gives "11", then each fractional
    bit comes from doubling the remainder.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    q, rem = divmod(OMEGA_NUM, OMEGA_DEN)
    head = [int(b) for b in bin(q)[2:]]
    out = np.zeros(count, dtype=np.uint8)
    k = 0
    for b in head[:count]:
        out[k] = b
        k += 1
    while k < count:
        rem *= 2
        out[k] = rem >= OMEGA_DEN
        rem -= OMEGA_DEN * int(out[k])
        k += 1
    return out


@dataclass(frozen=True)
class PrecodedCode:
    """Frozen set plus coefficient matrix ``coef[f, a]`` (frozen row, info column).

    ``coef[f, a]`` may be 1 only when ``info[a] < frozen[f]``.
    """

    N: int
    frozen: np.ndarray
    coef: np.ndarray = field(repr=False)
    omega_offsets: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        log2_exact(self.N)
        info = complement(self.frozen, self.N)
        object.__setattr__(self, "info", info)
        if self.coef.shape != (self.frozen.size, info.size):
            raise ValueError("coefficient matrix shape mismatch")
        bad = self.coef.astype(bool) & (info[None, :] > self.frozen[:, None])
        if bad.any():
            raise ValueError("frozen bit depends on a later information bit")

    @property
    def K(self) -> int:
        return self.N - self.frozen.size

    @property
    def n(self) -> int:
        return log2_exact(self.N)

    @staticmethod
    def _allowed(N, frozen):
        info = complement(frozen, N)
        return info, info[None, :] < frozen[:, None]

    @classmethod
    def with_omega(cls, N: int, frozen) -> "PrecodedCode":
        """Coefficients from the pi-sequence with a single global counter.

        Frozen indices are visited in ascending order and, for each, the
        information indices below it in ascending order.
        """
        frozen = as_index_set(frozen, N)
        info, allowed = cls._allowed(N, frozen)
        per_row = allowed.sum(axis=1)
        offsets = np.concatenate([[0], np.cumsum(per_row)[:-1]]).astype(np.int64)
        bits = omega_bits(int(per_row.sum()))
        coef = np.zeros(allowed.shape, dtype=np.uint8)
        coef[allowed] = bits  # row-major order matches the counter order
        return cls(N, frozen, coef, offsets)

    @classmethod
    def random_expressions(cls, N: int, frozen, rng: np.random.Generator) -> "PrecodedCode":
        """Independent uniform coefficients (one member of the averaging ensemble)."""
        frozen = as_index_set(frozen, N)
        _, allowed = cls._allowed(N, frozen)
        coef = (rng.integers(0, 2, size=allowed.shape, dtype=np.uint8) & allowed).astype(np.uint8)
        return cls(N, frozen, coef)

    @classmethod
    def plain(cls, N: int, frozen) -> "PrecodedCode":
        """Frozen bits fixed to zero (classic polar code)."""
        frozen = as_index_set(frozen, N)
        return cls(N, frozen, np.zeros((frozen.size, N - frozen.size), dtype=np.uint8))

    def input_words(self, info_bits) -> np.ndarray:
        """Transform input ``u`` for one or a batch of information words."""
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape[-1] != self.K:
            raise ValueError(f"expected {self.K} information bits, got {info_bits.shape[-1]}")
        u = np.zeros(info_bits.shape[:-1] + (self.N,), dtype=np.uint8)
        u[..., self.info] = info_bits
        if self.frozen.size and self.K:
            u[..., self.frozen] = (info_bits.astype(np.int64) @ self.coef.T.astype(np.int64)) & 1
        return u

    def encode(self, info_bits) -> np.ndarray:
        return polar_transform(self.input_words(info_bits))

    def generator_matrix(self) -> np.ndarray:
        return self.encode(np.eye(self.K, dtype=np.uint8))

    def dependency_words(self) -> np.ndarray:
        """Row ``i`` packs the information positions frozen bit ``i`` depends on."""
        dep = np.zeros((self.N, self.N), dtype=np.uint8)
        if self.frozen.size and self.K:
            dep[np.ix_(self.frozen, self.info)] = self.coef
        words = (self.N + 63) // 64
        packed = np.packbits(dep, axis=1, bitorder="little")
        packed = np.pad(packed, ((0, 0), (0, words * 8 - packed.shape[1])))
        return np.ascontiguousarray(packed.view(np.uint64))

    def frozen_mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=np.uint8)
        mask[self.frozen] = 1
        return mask


@dataclass(frozen=True)
class DecoderConfig:
    list_size: int = 1
    llr_clamp: float = 40.0
    exact: bool = True  # exact boxplus and metric; False selects min-sum

    def __post_init__(self):
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")


@numba.njit(cache=True, inline="always")
def _f(a, b, exact):
    s = 1.0 if (a >= 0) == (b >= 0) else -1.0
    m = s * min(abs(a), abs(b))
    if exact:
        m += np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))
    return m


@numba.njit(cache=True, inline="always")
def _penalty(llr, bit, exact):
    """Metric increment for deciding ``bit`` against LLR ``llr``."""
    x = -llr if bit == 0 else llr
    if exact:
        return max(x, 0.0) + np.log1p(np.exp(-abs(x)))
    return abs(llr) if x > 0.0 else 0.0


@numba.njit(cache=True)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@numba.njit(cache=True)
def _ctz(i):
    k = 0
    while not (i >> k) & 1:
        k += 1
    return k


@numba.njit(cache=True)
def _scl_frame(llr, n, frozen, dep, L, exact, alpha, beta, tmp, uw, pm, bits, active, out_u):
    """Decode one frame; fills ``out_u`` with the best path's input word.

    Per path, ``alpha`` holds the LLRs of every depth back to back (sizes N,
    N/2, ..., 1) and ``beta`` the re-encoded bits of each left child waiting
    for its right sibling.  ``uw`` packs the decided input bits.
    """
    N = 1 << n
    W = uw.shape[1]
    off = np.empty(n + 2, dtype=np.int64)
    off[0] = 0
    for d in range(n + 1):
        off[d + 1] = off[d] + (N >> d)
    leaf = off[n]
    active[:] = False
    active[0] = True
    alpha[0, :N] = llr
    uw[0, :] = 0
    pm[0] = 0.0
    cand_pm = np.empty(2 * L)
    keep = np.zeros((L, 2), dtype=np.bool_)
    for i in range(N):
        start = 1 if i == 0 else n - _ctz(i)
        for l in range(L):
            if not active[l]:
                continue
            a = alpha[l]
            for d in range(start, n + 1):
                size = N >> d
                po = off[d - 1]
                co = off[d]
                if d == start and i != 0:
                    for j in range(size):
                        x = a[po + j]
                        a[co + j] = a[po + j + size] + (-x if beta[l, co + j] else x)
                else:
                    for j in range(size):
                        a[co + j] = _f(a[po + j], a[po + j + size], exact)
        if frozen[i]:
            for l in range(L):
                if active[l]:
                    par = 0
                    for w in range(W):
                        par += _popcount64(uw[l, w] & dep[i, w])
                    bits[l] = par & 1
                    pm[l] += _penalty(alpha[l, leaf], bits[l], exact)
        else:
            # candidate c = 2*l + bit; inactive slots get +inf so they sort last
            for l in range(L):
                for b in range(2):
                    cand_pm[2 * l + b] = pm[l] + _penalty(alpha[l, leaf], b, exact) if active[l] else np.inf
            idx = np.argsort(cand_pm, kind="mergesort")
            keep[:, :] = False
            for k in range(L):
                c = idx[k]
                if cand_pm[c] == np.inf:
                    break
                keep[c >> 1, c & 1] = True
            free = np.empty(L, dtype=np.int64)
            n_free = 0
            for l in range(L):
                if not (keep[l, 0] or keep[l, 1]):
                    active[l] = False
                    free[n_free] = l
                    n_free += 1
            parents = np.flatnonzero(active)
            fp = 0
            for l in parents:
                lam = alpha[l, leaf]
                if keep[l, 0] and keep[l, 1]:
                    s = free[fp]
                    fp += 1
                    alpha[s, :] = alpha[l, :]
                    beta[s, :] = beta[l, :]
                    uw[s, :] = uw[l, :]
                    pm[s] = pm[l] + _penalty(lam, 1, exact)
                    bits[s] = 1
                    active[s] = True
                    pm[l] += _penalty(lam, 0, exact)
                    bits[l] = 0
                else:
                    b = 0 if keep[l, 0] else 1
                    pm[l] += _penalty(lam, b, exact)
                    bits[l] = b
        # record decisions and propagate partial sums upward
        for l in range(L):
            if not active[l]:
                continue
            bit = bits[l]
            if bit:
                uw[l, i >> 6] |= np.uint64(1) << np.uint64(i & 63)
            tmp[l, 0] = bit
            size = 1
            d = n
            node = i
            while d > 0:
                bo = off[d]
                if node & 1 == 0:
                    for j in range(size):
                        beta[l, bo + j] = tmp[l, j]
                    break
                for j in range(size):
                    v = tmp[l, j]
                    tmp[l, j] = beta[l, bo + j] ^ v
                    tmp[l, j + size] = v
                size *= 2
                node >>= 1
                d -= 1
    best = -1
    for l in range(L):
        if active[l] and (best < 0 or pm[l] < pm[best]):
            best = l
    for j in range(N):
        out_u[j] = (uw[best, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)
    return pm[best]


@numba.njit(cache=True)
def _scl_batch(llrs, n, frozen, dep, L, exact, clamp):
    B, N = llrs.shape
    W = dep.shape[1]
    alpha = np.empty((L, 2 * N))
    beta = np.zeros((L, 2 * N), dtype=np.uint8)
    tmp = np.empty((L, N), dtype=np.uint8)
    uw = np.zeros((L, W), dtype=np.uint64)
    pm = np.empty(L)
    bits = np.empty(L, dtype=np.uint8)
    active = np.empty(L, dtype=np.bool_)
    out = np.empty((B, N), dtype=np.uint8)
    metrics = np.empty(B)
    llr = np.empty(N)
    for b in range(B):
        for j in range(N):
            llr[j] = min(max(llrs[b, j], -clamp), clamp)
        metrics[b] = _scl_frame(llr, n, frozen, dep, L, exact, alpha, beta, tmp, uw, pm, bits, active, out[b])
    return out, metrics


class SCLDecoder:
    """SC list decoder bound to one code; holds no per-frame state between calls."""

    def __init__(self, code: PrecodedCode, cfg: DecoderConfig = DecoderConfig()):
        self.code = code
        self.cfg = cfg
        self._frozen = code.frozen_mask()
        self._dep = code.dependency_words()

    def decode_inputs(self, llrs):
        """Best-path input words ``u`` and path metrics for a batch of LLR vectors."""
        llrs = np.ascontiguousarray(np.atleast_2d(llrs), dtype=np.float64)
        if llrs.shape[1] != self.code.N:
            raise ValueError("LLR length does not match the code")
        return _scl_batch(llrs, self.code.n, self._frozen, self._dep, self.cfg.list_size,
                          self.cfg.exact, self.cfg.llr_clamp)

    def decode(self, llrs):
        u, metric = self.decode_inputs(llrs)
        return u[:, self.code.info], metric


def scl_decode(code: PrecodedCode, llrs, cfg: DecoderConfig = DecoderConfig()):
    """Decode one LLR vector; returns ``(info_bits, path_metric)``."""
    info, metric = SCLDecoder(code, cfg).decode(np.asarray(llrs)[None, :])
    return info[0], float(metric[0])
