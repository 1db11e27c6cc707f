"""Published parameter sets for the three code sizes studied.

``entropy_EbN0`` is the operating point of the entropy table used for the
list-size constraint; ``design_EbN0`` is where P_ML is scored and
``reliability_EbN0`` feeds the reliability ordering and the B/S structure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .design import GeneticConfig


@dataclass(frozen=True)
class Preset:
    N: int
    K: int
    lam: int | None
    theta_free: int  # GenAlgT / GenAlgTS
    theta_tb: int
    B: tuple
    X: tuple
    design_EbN0: float
    reliability_EbN0: float
    entropy_EbN0: float = 0.5
    target_errors: int = 1000
    T_POP: int = 5
    rho: int = 5
    S: int = 160

    def config(self, algorithm: str = "tb", **overrides) -> GeneticConfig:
        if self.lam is None and "lam" not in overrides:
            raise ValueError(f"no published lambda for ({self.N}, {self.K}); pass one explicitly")
        cfg = GeneticConfig(
            T_POP=self.T_POP,
            theta=self.theta_tb if algorithm == "tb" else self.theta_free,
            S=self.S,
            B=self.B,
            X=self.X,
            lam=self.lam if self.lam is not None else 0,
            rho=self.rho,
            design_EbN0=self.design_EbN0,
            reliability_EbN0=self.reliability_EbN0,
        )
        return replace(cfg, **overrides)


PRESETS = {
    (128, 64): Preset(128, 64, lam=32, theta_free=50, theta_tb=20, B=(37, 8), X=(8, 6),
                      design_EbN0=3.5, reliability_EbN0=3.5),
    (512, 256): Preset(512, 256, lam=96, theta_free=200, theta_tb=30, B=(37, 23), X=(8, 6),
                       design_EbN0=2.0, reliability_EbN0=2.75, target_errors=400),
    (512, 128): Preset(512, 128, lam=None, theta_free=200, theta_tb=30, B=(24, 5), X=(6, 0),
                       design_EbN0=1.5, reliability_EbN0=2.25, target_errors=400),
}


def preset(N: int, K: int) -> Preset:
    try:
        return PRESETS[(N, K)]
    except KeyError:
        known = ", ".join(f"{n},{k}" for n, k in PRESETS)
        raise KeyError(f"no published parameters for ({N}, {K}); known: {known}") from None
