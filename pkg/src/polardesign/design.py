"""Genetic search for frozen sets under a list-size budget.

Every candidate is scored by an ML error estimate (union bound on the
ensemble-averaged weight distribution inside the loop, tangential-sphere bound
for the returned set) and must keep the peak of the apx list-size profile below
a threshold ``T_D``.  Three flavours share one evolution loop:

* ``gen_alg_t``  free mutation and half-swap crossover over all indices;
* ``gen_alg_ts`` the same, restricted to indices left open by a reliability core;
* ``gen_alg_tb`` per-member mutation alphabets that keep a banded structure.

Frozen sets travel as boolean masks internally and as sorted index arrays at
the API boundary.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import logsumexp

from .channel import (
    EntropyTable,
    ReliabilitySequence,
    gaussian_approx_means,
    reliability_sequence,
)
from .list_bounds import _profile, flat_entropies
from .ml_bounds import FerEstimate, log_qfunc, sc_fer_estimate, tsb, union_bound
from .polar_core import as_index_set, log2_exact, weights_of_range
from .weights import LN2, average_weight_distribution, p_table

log = logging.getLogger(__name__)

MUTATION_BUDGET = 10_000


class InfeasibleDesign(RuntimeError):
    """No frozen set in the starting population meets the constraints."""


@dataclass(frozen=True)
class GeneticConfig:
    T_POP: int = 5
    T_D: float = 1.0
    theta: int = 50
    S: int = 160
    B: tuple = (37, 8)
    X: tuple = (8, 6)
    lam: int = 32
    rho: int = 5
    rng_seed: int = 0
    design_EbN0: float = 3.5  # P_ML operating point
    reliability_EbN0: float = 3.5  # reliability sequence and population seeds
    scoring: str = "tsb-final"

    def __post_init__(self):
        if self.T_POP < 2:
            raise ValueError("T_POP must be >= 2")
        if not self.T_D > 0:
            raise ValueError("T_D must be positive")
        if self.theta < 1 or self.rho < 1:
            raise ValueError("theta and rho must be >= 1")
        if self.S < 0 or min(self.B) < 0:
            raise ValueError("S and B must be non-negative")
        if self.scoring not in ("union", "tsb-final"):
            raise ValueError("scoring must be 'union' or 'tsb-final'")


@dataclass(frozen=True)
class StructureStats:
    ell: int
    alpha: tuple
    beta: tuple
    chi: tuple
    Delta: int
    S_min: int


@dataclass(frozen=True)
class ParetoPoint:
    frozen_set: np.ndarray = field(repr=False)
    d_apx_peak: float
    p_ml: FerEstimate
    p_sc: FerEstimate
    p_ml_union: float = float("nan")
    iterations: int = 0
    found_at: int = 0
    T_D: float = float("nan")
    seed: int = 0
    algorithm: str = ""


# ---------------------------------------------------------------- scoring


class Scorer:
    """Caches (apx peak, union-bound P_ML) per frozen set fingerprint.

    The union bound is linear in the per-index weight spectra, so
    ``sum_t W_t Q_t = sum_{i in A} 2^(K - rank i) u_i`` with
    ``u_i = sum_t P(N, i, t) Q_t`` computed once.
    """

    def __init__(self, N: int, K: int, H: EntropyTable, lam: int, EbN0_dB: float):
        self.N, self.K, self.n = N, K, log2_exact(N)
        if H.n != self.n:
            raise ValueError("entropy table length does not match N")
        self.H = H
        self.lam = int(lam)
        self.EbN0_dB = EbN0_dB
        self.R = K / N
        self._Hflat = flat_entropies(H)
        t = np.arange(N + 1)
        logq = log_qfunc(np.sqrt(2.0 * t * self.R * 10.0 ** (EbN0_dB / 10.0)))
        logq[0] = -np.inf
        with np.errstate(divide="ignore"):
            self._logu = logsumexp(p_table(N)[N] + logq[None, :], axis=1)
        self._shift = (K - np.arange(1, K + 1)) * LN2
        self.cache: dict = {}
        self.evaluations = 0

    def d_apx(self, frozen_mask: np.ndarray) -> float:
        info = (~frozen_mask).astype(np.uint8)
        return float(_profile(info, self._Hflat, self.n, 1, self.lam).max())

    def p_ml(self, frozen_mask: np.ndarray) -> float:
        A = np.flatnonzero(~frozen_mask)
        a = self._logu[A] + self._shift[: A.size]
        top = a.max()
        return float(np.exp(top) * np.exp(a - top).sum())

    def score(self, frozen_mask: np.ndarray) -> tuple:
        key = frozen_mask.tobytes()
        hit = self.cache.get(key)
        if hit is None:
            hit = (self.d_apx(frozen_mask), self.p_ml(frozen_mask))
            self.cache[key] = hit
            self.evaluations += 1
        return hit


def _mask(indices, N) -> np.ndarray:
    m = np.zeros(N, dtype=bool)
    m[np.asarray(indices, dtype=np.int64)] = True
    return m


# ---------------------------------------------------------------- population


def reliability_frozen_mask(seq: ReliabilitySequence, K: int, S: int = 0) -> np.ndarray:
    """Mask of ``R_S``: the ``N - K - S`` least reliable indices (empty if negative)."""
    return _mask(seq.r[: max(seq.N - K - S, 0)], seq.N)


def interpolation_family(seq: ReliabilitySequence, K: int) -> list:
    """Frozen sets walking from ``R_0`` towards a Reed-Muller-like set.

    Each step freezes the least reliable information index of the minimum
    information weight and unfreezes the most reliable frozen index of higher
    weight, until no information index of the starting minimum weight is left.
    """
    N = seq.N
    wt = weights_of_range(N)
    rank = seq.rank()
    F = reliability_frozen_mask(seq, K)
    ell = int(wt[~F].min())
    family = [F.copy()]
    while True:
        low = np.flatnonzero(~F & (wt == ell))
        high = np.flatnonzero(F & (wt > ell))
        if low.size == 0 or high.size == 0:
            break
        F[low[np.argmin(rank[low])]] = True
        F[high[np.argmax(rank[high])]] = False
        family.append(F.copy())
    return family


def initialize_population(N: int, K: int, seq: ReliabilitySequence, center_EbN0: float,
                          span: float = 2.0, step: float = 0.25) -> list:
    """Reliability-based sets over an Eb/N0 grid plus the interpolation family.

    Returned as sorted index arrays, duplicates removed, order deterministic.
    """
    n = log2_exact(N)
    R = K / N
    seen, out = set(), []

    def add(mask):
        key = mask.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(np.flatnonzero(mask))

    for eb in np.arange(center_EbN0 - span, center_EbN0 + span + step / 2, step):
        add(reliability_frozen_mask(reliability_sequence(n, round(float(eb), 6), R), K))
    for mask in interpolation_family(seq, K):
        add(mask)
    return out


# ---------------------------------------------------------------- operators


def _pick(rng, candidates: np.ndarray) -> int:
    return int(candidates[rng.integers(candidates.size)])


def _mutate(F: np.ndarray, Z: np.ndarray, T_D: float, scorer: Scorer, rng, accept=None):
    """Swap one frozen and one non-frozen index of ``Z`` until feasible.

    Returns ``(child, ok)``; after ``MUTATION_BUDGET`` failed draws the parent
    comes back with ``ok = False``.
    """
    fz = Z[F[Z]]
    nf = Z[~F[Z]]
    if fz.size == 0 or nf.size == 0:
        return F, False
    for _ in range(MUTATION_BUDGET):
        child = F.copy()
        child[_pick(rng, nf)] = True
        child[_pick(rng, fz)] = False
        if accept is not None and not accept(child):
            continue
        if scorer.score(child)[0] <= T_D:
            return child, True
    return F, False


def mutation(F, T_D: float, Z, H: EntropyTable, lam: int, rng, scorer: Scorer | None = None):
    """Public wrapper on index arrays; returns ``(child_indices, ok)``."""
    N = 1 << H.n
    Fm = _mask(as_index_set(F, N), N)
    scorer = scorer or Scorer(N, N - int(Fm.sum()), H, lam, 3.0)
    child, ok = _mutate(Fm, as_index_set(Z, N), T_D, scorer, rng)
    return np.flatnonzero(child), ok


def _crossover(F0: np.ndarray, F1: np.ndarray, Z: np.ndarray, T_D: float, scorer: Scorer, rng):
    N = F0.size
    b = int(rng.integers(2))
    lo, hi = (F0, F1) if b == 0 else (F1, F0)
    child = np.concatenate([lo[: N // 2], hi[N // 2:]])
    target = int(lo.sum())
    zmask = np.zeros(N, dtype=bool)
    zmask[Z] = True
    while child.sum() > target:
        pool = np.flatnonzero(child & zmask)
        if pool.size == 0:
            return None
        child[_pick(rng, pool)] = False
    while child.sum() < target:
        pool = np.flatnonzero(~child & zmask)
        if pool.size == 0:
            return None
        child[_pick(rng, pool)] = True
    if scorer.score(child)[0] > T_D:
        return None
    return child


def crossover(F0, F1, T_D: float, Z, H: EntropyTable, lam: int, rng, scorer: Scorer | None = None):
    """Half-swap crossover with random repair inside ``Z``; None when infeasible."""
    N = 1 << H.n
    a, b = _mask(as_index_set(F0, N), N), _mask(as_index_set(F1, N), N)
    scorer = scorer or Scorer(N, N - int(a.sum()), H, lam, 3.0)
    child = _crossover(a, b, as_index_set(Z, N), T_D, scorer, rng)
    return None if child is None else np.flatnonzero(child)


# ---------------------------------------------------------------- structure


def _alpha(F: np.ndarray, seq: ReliabilitySequence, v: int, ell: int) -> int:
    tau = seq.tau[v]
    if v < ell:
        return tau.size
    open_ = np.flatnonzero(~F[tau])
    return int(open_[0]) if open_.size else tau.size


def _chi(F: np.ndarray, seq: ReliabilitySequence, v: int) -> int:
    """Largest weight-``v`` index value that is not frozen, or -1."""
    z = seq.z[v]
    open_ = z[~F[z]]
    return int(open_[-1]) if open_.size else -1


def _beta(F: np.ndarray, seq: ReliabilitySequence, v: int, chi: int) -> int:
    """Largest reliability position of a frozen weight-``v`` index below ``chi``, or -1."""
    tau = seq.tau[v]
    q = np.flatnonzero(F[tau] & (tau < chi))
    return int(q[-1]) if q.size else -1


def min_info_weight(F: np.ndarray) -> int:
    wt = weights_of_range(F.size)
    if F.all():
        raise ValueError("no information bits: minimum information weight undefined")
    return int(wt[~F].min())


def s_min(F: np.ndarray, seq: ReliabilitySequence, K: int) -> int:
    """Smallest ``S`` in ``[N-K]`` with ``R_S`` inside ``F``; ``N-K`` when none."""
    covered = np.cumsum(~F[seq.r]) == 0  # covered[j]: r_0..r_j all frozen
    prefix = int(covered.sum())  # longest frozen reliability prefix
    return max(seq.N - K - prefix, 0)


def _stats(F: np.ndarray, seq: ReliabilitySequence, K: int) -> StructureStats:
    n = seq.n
    ell = min_info_weight(F)
    alpha = tuple(_alpha(F, seq, v, ell) for v in range(n + 1))
    chi = tuple(_chi(F, seq, v) if v >= ell else -1 for v in range(n + 1))
    beta = tuple(_beta(F, seq, v, chi[v]) if v >= ell else -1 for v in range(n + 1))
    z = seq.z[ell]
    delta = int(np.sum(F[z] & (z > chi[ell])))
    return StructureStats(ell, alpha, beta, chi, delta, s_min(F, seq, K))


def structure_stats(F, seq: ReliabilitySequence, K: int | None = None) -> StructureStats:
    N = seq.N
    F = _mask(as_index_set(F, N), N)
    return _stats(F, seq, N - int(F.sum()) if K is None else K)


def satisfies_b_constraint(F: np.ndarray, seq: ReliabilitySequence, B) -> bool:
    """Banded structure: windows of width ``B`` for the two lowest weights, prefixes above."""
    if F.all():
        return False
    st = _stats(F, seq, seq.N - int(F.sum()))
    ell = st.ell
    for k in range(2):
        v = ell + k
        if v <= seq.n and not st.beta[v] < st.alpha[v] + B[k]:
            return False
    for v in range(ell + 2, seq.n + 1):
        if st.beta[v] != st.alpha[v] - 1:
            return False
    return True


def _s_sets(seq: ReliabilitySequence, K: int, S: int):
    N = seq.N
    wt = weights_of_range(N)
    R0 = reliability_frozen_mask(seq, K)
    ell = int(wt[~R0].min())
    h_fr = reliability_frozen_mask(seq, K, S) | (wt < ell)
    h_inf = (wt >= ell + 2) & ~R0
    return h_fr, h_inf, ell


def s_constraint_sets(N: int, K: int, seq: ReliabilitySequence, S: int):
    """``(H_fr, H_inf, Z)``: always frozen, never frozen, and free indices."""
    if seq.N != N:
        raise ValueError("reliability sequence length does not match N")
    if S < 0:
        raise ValueError("S must be non-negative")
    h_fr, h_inf, _ = _s_sets(seq, K, S)
    return np.flatnonzero(h_fr), np.flatnonzero(h_inf), np.flatnonzero(~(h_fr | h_inf))


def satisfies_s_constraint(F: np.ndarray, seq: ReliabilitySequence, K: int, S: int) -> bool:
    """Check the three conditions through the ``alpha`` markers of ``F``, ``R_S`` and ``R_0``."""
    n = seq.n
    R0 = reliability_frozen_mask(seq, K)
    RS = reliability_frozen_mask(seq, K, S)
    ell = min_info_weight(R0)
    lF = min_info_weight(F)
    for v in range(n + 1):
        aF = _alpha(F, seq, v, lF)
        if v < ell:
            if aF != seq.tau[v].size:
                return False
            continue
        if aF < _alpha(RS, seq, v, min_info_weight(RS) if not RS.all() else n + 1):
            return False
        if v >= ell + 2:
            a0 = _alpha(R0, seq, v, ell)
            if F[seq.tau[v][a0:]].any():
                return False
    return True


def _flex_Z(F: np.ndarray, seq: ReliabilitySequence, B, X, R0_stats: StructureStats) -> np.ndarray:
    n = seq.n
    st = _stats(F, seq, seq.N - int(F.sum()))
    ell = st.ell
    Z = set()
    for k in range(2):
        v = ell + k
        if v > n:
            break
        tau = seq.tau[v]
        b0 = R0_stats.beta[v] if v >= R0_stats.ell else -1
        anchor = min(st.beta[v], b0) + X[k]
        for i in range(B[k]):
            q = anchor - i
            if 0 <= q < tau.size:
                Z.add(int(tau[q]))
        if st.chi[v] >= 0:
            Z.add(st.chi[v])
    for v in range(ell + 2, n + 1):
        q = st.beta[v]
        if 0 <= q < seq.tau[v].size:
            Z.add(int(seq.tau[v][q]))
    return np.array(sorted(Z), dtype=np.int64)


def flexible_set_Z(F, seq: ReliabilitySequence, B, X, K: int | None = None) -> np.ndarray:
    """Mutation alphabet that keeps the banded structure of ``F``."""
    N = seq.N
    Fm = _mask(as_index_set(F, N), N)
    K = N - int(Fm.sum()) if K is None else K
    R0 = reliability_frozen_mask(seq, K)
    return _flex_Z(Fm, seq, B, X, _stats(R0, seq, K))


# ---------------------------------------------------------------- evolution


@dataclass
class _Run:
    scorer: Scorer
    rng: np.random.Generator
    population: list  # list of (p_ml, key, mask)
    best: float = np.inf
    iterations: int = 0
    found_at: int = 0


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))


def _prune(pop: list, T_POP: int) -> list:
    pop.sort(key=lambda e: (e[0], e[1]))
    return pop[:T_POP]


def _entry(mask: np.ndarray, scorer: Scorer) -> tuple:
    return (scorer.score(mask)[1], mask.tobytes(), mask)


def _merge(pop: list, children, scorer: Scorer) -> list:
    keys = {e[1] for e in pop}
    for c in children:
        if c is None:
            continue
        key = c.tobytes()
        if key in keys:
            continue
        keys.add(key)
        pop.append(_entry(c, scorer))
    return pop


def _evolve(run: _Run, cfg: GeneticConfig, extend) -> _Run:
    run.population = _prune(run.population, cfg.T_POP)
    run.best = run.population[0][0]
    stall = 0
    while stall < cfg.theta:
        run.iterations += 1
        run.population = _prune(extend(run), cfg.T_POP)
        if run.population[0][0] < run.best:
            run.best = run.population[0][0]
            run.found_at = run.iterations
            stall = 0
        else:
            stall += 1
    return run


def _start(cfg: GeneticConfig, N: int, K: int, H: EntropyTable, seq: ReliabilitySequence, keep=None):
    scorer = Scorer(N, K, H, cfg.lam, cfg.design_EbN0)
    pop = []
    seen = set()
    for F in initialize_population(N, K, seq, cfg.reliability_EbN0):
        m = _mask(F, N)
        if scorer.score(m)[0] > cfg.T_D:
            continue
        if keep is not None and not keep(m):
            continue
        if m.tobytes() not in seen:
            seen.add(m.tobytes())
            pop.append(_entry(m, scorer))
    if not pop:
        raise InfeasibleDesign(
            f"no initial frozen set satisfies the constraints at T_D={cfg.T_D}; raise T_D or relax B/S")
    return _Run(scorer, _rng(cfg.rng_seed), pop)


def _extend_free(Z: np.ndarray, cfg: GeneticConfig):
    def extend(run: _Run):
        pop = list(run.population)
        members = [e[2] for e in pop]
        kids = [_mutate(F, Z, cfg.T_D, run.scorer, run.rng)[0] for F in members]
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                kids.append(_crossover(members[a], members[b], Z, cfg.T_D, run.scorer, run.rng))
        return _merge(pop, kids, run.scorer)

    return extend


@lru_cache(maxsize=256)
def _final_ml(key: bytes, N: int, K: int, EbN0_dB: float, scoring: str) -> FerEstimate:
    info = np.flatnonzero(~np.frombuffer(key, dtype=bool))
    W = average_weight_distribution(N, info)
    if scoring == "tsb-final":
        return tsb(W, N, EbN0_dB, K / N)
    return union_bound(W, EbN0_dB, K / N)


def _finish(run: _Run, cfg: GeneticConfig, N: int, K: int, algorithm: str) -> ParetoPoint:
    mask = run.population[0][2]
    frozen = np.flatnonzero(mask)
    d, p_union = run.scorer.score(mask)
    p_ml = _final_ml(mask.tobytes(), N, K, cfg.design_EbN0, cfg.scoring)
    n = log2_exact(N)
    means = gaussian_approx_means(n, cfg.design_EbN0, K / N)
    p_sc = sc_fer_estimate(frozen, means, cfg.design_EbN0, K / N)
    return ParetoPoint(frozen, d, p_ml, p_sc, p_union, run.iterations, run.found_at,
                       cfg.T_D, cfg.rng_seed, algorithm)


def gen_alg_t(cfg: GeneticConfig, N: int, K: int, H: EntropyTable, seq: ReliabilitySequence) -> ParetoPoint:
    """Unconstrained search: mutation and crossover over all indices."""
    run = _start(cfg, N, K, H, seq)
    run = _evolve(run, cfg, _extend_free(np.arange(N), cfg))
    return _finish(run, cfg, N, K, "t")


def gen_alg_ts(cfg: GeneticConfig, N: int, K: int, H: EntropyTable, seq: ReliabilitySequence) -> ParetoPoint:
    """Search restricted to indices left free by the reliability core ``R_S``."""
    h_fr, h_inf, _ = _s_sets(seq, K, cfg.S)
    keep = lambda m: bool(np.all(m[h_fr]) and not np.any(m[h_inf]))
    run = _start(cfg, N, K, H, seq, keep)
    Z = np.flatnonzero(~(h_fr | h_inf))
    run = _evolve(run, cfg, _extend_free(Z, cfg))
    return _finish(run, cfg, N, K, "ts")


def gen_alg_tb(cfg: GeneticConfig, N: int, K: int, H: EntropyTable, seq: ReliabilitySequence) -> ParetoPoint:
    """Three constrained mutations per member, each inside that member's flexible set."""
    R0_stats = _stats(reliability_frozen_mask(seq, K), seq, K)
    seen: dict = {}

    def keep(m):
        key = m.tobytes()
        ok = seen.get(key)
        if ok is None:
            ok = seen[key] = satisfies_b_constraint(m, seq, cfg.B)
        return ok

    run = _start(cfg, N, K, H, seq, keep)

    def extend(r: _Run):
        pop = list(r.population)
        kids = []
        for _, _, F in r.population:
            Z = _flex_Z(F, seq, cfg.B, cfg.X, R0_stats)
            for _ in range(3):
                kids.append(_mutate(F, Z, cfg.T_D, r.scorer, r.rng, accept=keep)[0])
        return _merge(pop, kids, r.scorer)

    run = _evolve(run, cfg, extend)
    return _finish(run, cfg, N, K, "tb")


ALGORITHMS = {"t": gen_alg_t, "ts": gen_alg_ts, "tb": gen_alg_tb}


def best_of_runs(algorithm: str, cfg: GeneticConfig, N: int, K: int, H: EntropyTable,
                 seq: ReliabilitySequence) -> tuple:
    """``rho`` independent runs with seeds ``seed + 0 .. seed + rho - 1``.

    Returns ``(winner, runs, wall_seconds)``; the winner has the lowest
    in-loop P_ML (ties to the earlier run).
    """
    fn = ALGORITHMS[algorithm]
    runs = []
    t0 = time.perf_counter()
    for k in range(cfg.rho):
        runs.append(fn(replace(cfg, rng_seed=cfg.rng_seed + k), N, K, H, seq))
    wall = time.perf_counter() - t0
    winner = min(runs, key=lambda p: p.p_ml_union)
    return winner, runs, wall


def pareto_front(points) -> list:
    """Points not dominated in (apx peak, P_ML), sorted by apx peak.

    ``q`` dominates ``p`` when it is no worse in both coordinates and better in
    one; exact duplicates do not dominate each other and are all kept.
    """
    pts = sorted(points, key=lambda p: (p.d_apx_peak, p.p_ml.value))
    front = []
    best_p, best_d = np.inf, None
    for p in pts:
        if p.p_ml.value < best_p or (p.p_ml.value == best_p and p.d_apx_peak == best_d):
            front.append(p)
            best_p, best_d = p.p_ml.value, p.d_apx_peak
    return front


def omega_S(N: int, K: int, seq: ReliabilitySequence, S: int) -> tuple:
    """Sizes ``(N_fr, N_inf, |Z|, K - N_inf)``; the count of S-constrained sets is C(|Z|, K - N_inf)."""
    h_fr, h_inf, z = s_constraint_sets(N, K, seq, S)
    return h_fr.size, h_inf.size, z.size, K - h_inf.size


def omega_count(N: int, K: int, seq: ReliabilitySequence, S: int) -> int:
    _, _, z, k = omega_S(N, K, seq, S)
    return comb(z, k) if 0 <= k <= z else 0
