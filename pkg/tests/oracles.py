"""Independent reference implementations used as test oracles.

Everything here is written directly from definitions, favouring clarity over
speed, and shares no code paths with the package beyond ``kron_matrix``.
"""

import itertools

import numpy as np

from polardesign.channel import EntropyTable
from polardesign.polar_core import kron_matrix


# ---------------------------------------------------------------- GF(2)


def gf2_rank(M) -> int:
    """Rank over GF(2) by elimination on a copy."""
    A = np.array(M, dtype=np.uint8) & 1
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = np.flatnonzero(A[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        A[[r, p]] = A[[p, r]]
        hit = np.flatnonzero(A[:, c])
        hit = hit[hit != r]
        A[hit] ^= A[r]
        r += 1
        if r == rows:
            break
    return r


class Basis:
    """Incremental GF(2) basis over integer bit masks."""

    def __init__(self):
        self.rows = {}  # leading bit -> vector

    def insert(self, v: int) -> bool:
        while v:
            top = v.bit_length() - 1
            if top not in self.rows:
                self.rows[top] = v
                return True
            v ^= self.rows[top]
        return False

    def copy(self):
        b = Basis()
        b.rows = dict(self.rows)
        return b

    @property
    def rank(self) -> int:
        return len(self.rows)


# ---------------------------------------------------------------- BEC


def bec_entropy_table(n: int, eps: float) -> EntropyTable:
    """Exact BEC bit-channel erasure probabilities, child 2i minus, 2i+1 plus."""
    levels = [np.array([eps])]
    for _ in range(n):
        z = levels[-1]
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        levels.append(nxt)
    for arr in levels:
        arr.setflags(write=False)
    return EntropyTable(n=n, EbN0_dB=float("nan"), R=float("nan"), levels=tuple(levels))


def _columns(n: int) -> list:
    """Column ``j`` of the transform as a bit mask over the input coordinates."""
    G = kron_matrix(n)
    N = 1 << n
    return [sum(int(G[i, j]) << i for i in range(N)) for j in range(N)]


def bec_exact_D(n: int, frozen, eps: float) -> np.ndarray:
    """``D_m = H(U_{A<=m} | Y, U_{F<=m})`` on a BEC with uniform inputs.

    Averaged over all erasure patterns; each conditional entropy of linear
    functions of a uniform vector is a difference of GF(2) ranks.
    """
    N = 1 << n
    frozen = set(int(i) for i in frozen)
    cols = _columns(n)
    D = np.zeros(N)
    for seen in itertools.product([0, 1], repeat=N):
        k = sum(seen)
        p = (1 - eps) ** k * eps ** (N - k)
        known = Basis()
        for j in range(N):
            if seen[j]:
                known.insert(cols[j])
        full = known.copy()
        for m in range(N):
            if m in frozen:
                known.insert(1 << m)
            full.insert(1 << m)
            D[m] += p * (full.rank - known.rank)
    return D


def bec_bit_channel_entropies(n: int, eps: float) -> np.ndarray:
    """``H(U_i | Y, U_{<i})`` by the same rank enumeration."""
    N = 1 << n
    cols = _columns(n)
    H = np.zeros(N)
    for seen in itertools.product([0, 1], repeat=N):
        k = sum(seen)
        p = (1 - eps) ** k * eps ** (N - k)
        known = Basis()
        for j in range(N):
            if seen[j]:
                known.insert(cols[j])
        for i in range(N):
            before = known.rank
            probe = known.copy()
            probe.insert(1 << i)
            H[i] += p * (probe.rank - before)
            known.insert(1 << i)
    return H


# ---------------------------------------------------------------- decoders


def _f(a, b):
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def sc_reference(llr, frozen_value, clamp=40.0):
    """Recursive SC decoder for ``x = u G^{(x)n}``.

    ``frozen_value(i, u)`` returns None for information bits, else the frozen
    bit value given the decisions ``u[:i]``.
    """
    llr = np.clip(np.asarray(llr, dtype=float), -clamp, clamp)
    N = llr.size
    u = np.zeros(N, dtype=np.uint8)

    def rec(l, offset):
        size = l.size
        if size == 1:
            v = frozen_value(offset, u)
            u[offset] = (1 if l[0] < 0 else 0) if v is None else v
            return u[offset: offset + 1].copy()
        h = size // 2
        xa = rec(_f(l[:h], l[h:]), offset)
        xb = rec(l[h:] + (1 - 2.0 * xa) * l[:h], offset + h)
        return np.concatenate([xa ^ xb, xb])

    rec(llr, 0)
    return u


def code_frozen_rule(code):
    """``frozen_value`` callback for a PrecodedCode."""
    row = {int(f): k for k, f in enumerate(code.frozen)}

    def value(i, u):
        k = row.get(i)
        if k is None:
            return None
        return int(np.dot(code.coef[k].astype(int), u[code.info].astype(int)) & 1)

    return value


def ml_reference(code, llr):
    """Brute-force ML over all ``2**K`` codewords; returns (info bits, unique)."""
    K = code.K
    infos = np.array(list(itertools.product([0, 1], repeat=K)), dtype=np.uint8)[:, ::-1]
    cw = code.encode(infos)
    metric = (1.0 - 2.0 * cw) @ np.asarray(llr, dtype=float)
    order = np.argsort(-metric, kind="stable")
    unique = metric[order[0]] - metric[order[1]] > 1e-9 if K else True
    return infos[order[0]], bool(unique)


# ---------------------------------------------------------------- Pareto


def pareto_brute(points):
    """O(k^2) dominance filter on (d_apx_peak, p_ml.value)."""
    keep = []
    for p in points:
        dominated = any(
            q.d_apx_peak <= p.d_apx_peak and q.p_ml.value <= p.p_ml.value
            and (q.d_apx_peak < p.d_apx_peak or q.p_ml.value < p.p_ml.value)
            for q in points)
        if not dominated:
            keep.append(p)
    return keep
