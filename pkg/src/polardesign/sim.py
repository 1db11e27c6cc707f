"""Monte Carlo frame-error simulation over BPSK / AWGN.

Randomness is keyed by ``(seed, block)`` with a fixed block of frames, so frame
``f`` always sees the same information word and noise no matter how the run is
split up or which code is being decoded.  Codes of equal ``(N, K)`` simulated
with one seed therefore share every frame (common random numbers).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .codec import DecoderConfig, PrecodedCode, SCLDecoder

log = logging.getLogger(__name__)

BLOCK = 256


@dataclass(frozen=True)
class StopRule:
    target_errors: int = 1000
    max_frames: int = 10_000_000

    def __post_init__(self):
        if self.target_errors < 1 or self.max_frames < 1:
            raise ValueError("stop criteria must be positive")

    @classmethod
    def for_length(cls, N: int, max_frames: int = 10_000_000) -> "StopRule":
        """Published stop rules: 1000 errors at N=128, 400 at N=512."""
        return cls(1000 if N <= 128 else 400, max_frames)


@dataclass(frozen=True)
class SimResult:
    N: int
    K: int
    L: int
    EbN0_dB: float
    frames: int
    errors: int
    code_id: str = "-"
    seed: int = 0

    @property
    def fer(self) -> float:
        return self.errors / self.frames if self.frames else 0.0

    @property
    def ci95(self) -> float:
        """Normal-approximation half-width of the 95% interval."""
        if not self.frames:
            return 0.0
        p = self.fer
        return 1.959963984540054 * np.sqrt(p * (1.0 - p) / self.frames)

    def interval(self) -> tuple:
        return max(self.fer - self.ci95, 0.0), min(self.fer + self.ci95, 1.0)

    def row(self) -> str:
        return (f"{self.N} {self.K} {self.L} {self.EbN0_dB:g} {self.frames} {self.errors} "
                f"{self.fer:.6e} {self.ci95:.6e} {self.code_id} {self.seed}")


ROW_HEADER = "N K L EbN0 frames errors fer ci95 code_id seed"


def noise_sigma2(EbN0_dB: float, R: float) -> float:
    return 1.0 / (2.0 * R * 10.0 ** (EbN0_dB / 10.0))


def awgn_bpsk_llrs(codeword, EbN0_dB: float, R: float, rng: np.random.Generator) -> np.ndarray:
    """BPSK map ``b -> 1 - 2b``, add AWGN, return channel LLRs ``2 y / sigma^2``."""
    c = np.asarray(codeword)
    s2 = noise_sigma2(EbN0_dB, R)
    y = 1.0 - 2.0 * c + rng.normal(0.0, np.sqrt(s2), size=c.shape)
    return 2.0 * y / s2


def frame_block(seed: int, block: int, K: int, N: int):
    """Information words and unit-variance noise for frames ``block*BLOCK ...``."""
    rng = np.random.default_rng([seed, block])
    info = rng.integers(0, 2, size=(BLOCK, K), dtype=np.uint8)
    noise = rng.standard_normal((BLOCK, N))
    return info, noise


def paired_simulation(codes, cfg: DecoderConfig, EbN0_dB: float, stop: StopRule, seed: int,
                      code_ids=None, stop_on: str = "any") -> list:
    """Simulate several codes of equal ``(N, K)`` on identical frames.

    Stops once one code (``stop_on='any'``) or every code (``'all'``) has
    ``target_errors`` errors, at the exact frame where that happens, or at
    ``max_frames``.  All codes see the same number of frames.
    """
    codes = list(codes)
    N, K = codes[0].N, codes[0].K
    if any((c.N, c.K) != (N, K) for c in codes):
        raise ValueError("paired codes must share N and K")
    if stop_on not in ("any", "all"):
        raise ValueError("stop_on must be 'any' or 'all'")
    code_ids = list(code_ids) if code_ids is not None else [str(i) for i in range(len(codes))]
    decoders = [SCLDecoder(c, cfg) for c in codes]
    s = np.sqrt(noise_sigma2(EbN0_dB, K / N))
    errors = np.zeros(len(codes), dtype=np.int64)
    frames = 0
    block = 0
    done = False
    while not done:
        info, noise = frame_block(seed, block, K, N)
        take = min(BLOCK, stop.max_frames - frames)
        info, noise = info[:take], noise[:take]
        flags = np.zeros((len(codes), take), dtype=bool)
        for k, (code, dec) in enumerate(zip(codes, decoders)):
            c = code.encode(info)
            y = 1.0 - 2.0 * c + s * noise
            decoded, _ = dec.decode(2.0 * y / (s * s))
            flags[k] = np.any(decoded != info, axis=1)
        cum = errors[:, None] + np.cumsum(flags, axis=1)
        hit = cum >= stop.target_errors
        reached = hit.any(axis=0) if stop_on == "any" else hit.all(axis=0)
        if reached.any():
            last = int(np.argmax(reached))
            errors = cum[:, last]
            frames += last + 1
            done = True
        else:
            errors = cum[:, -1]
            frames += take
            done = frames >= stop.max_frames
        block += 1
    log.debug("paired simulation: %d frames, errors %s", frames, errors.tolist())
    return [SimResult(N, K, cfg.list_size, float(EbN0_dB), frames, int(e), cid, seed)
            for e, cid in zip(errors, code_ids)]


def fer_simulation(code: PrecodedCode, cfg: DecoderConfig, EbN0_dB: float, stop: StopRule, seed: int,
                   code_id: str = "-") -> SimResult:
    return paired_simulation([code], cfg, EbN0_dB, stop, seed, [code_id])[0]
