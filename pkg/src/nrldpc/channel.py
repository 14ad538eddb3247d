"""AWGN channel for the all-zero codeword, producing a-priori LLRs.

QPSK with Gray mapping over AWGN is per-dimension identical to antipodal
signaling, so the channel is BPSK-equivalent: unit-energy +1 symbols plus
Gaussian noise, LLR = 2*y/sigma^2. The 0 bit maps to positive values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    """Channel operating point.

    sigma2_override, when set, is used for the LLR scaling only (noise is
    still drawn at the true variance): mismatched noise-variance experiments.
    """

    ebn0_db: float
    code_rate: float
    seed: int = 0
    modulation: str = "qpsk_equivalent"
    sigma2_override: float | None = None

    def noise_variance(self) -> float:
        """sigma^2 = 1 / (2 * rate * 10^(EbN0/10)) for unit-energy symbols."""
        if not 0.0 < self.code_rate <= 1.0:
            raise ValueError("code rate must be in (0, 1]")
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.ebn0_db / 10.0))


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, frame_index).

    Philox gives every frame its own stream, so frames are reproducible
    independently of execution order or worker count.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, frame_index & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def transmit_all_zero(cfg: ChannelConfig, n_vars: int, frame_index: int = 0) -> np.ndarray:
    """A-priori LLR vector for one all-zero frame.

    gamma_n = 2*y_n/sigma^2 with y_n = +1 + N(0, sigma^2). Deterministic
    given (cfg.seed, frame_index); E[gamma_n] = 2/sigma^2 > 0.
    """
    if n_vars < 1:
        raise ValueError("n_vars must be >= 1")
    sigma2 = cfg.noise_variance()
    rng = frame_rng(cfg.seed, frame_index)
    y = 1.0 + rng.normal(0.0, math.sqrt(sigma2), size=n_vars)
    scale = cfg.sigma2_override if cfg.sigma2_override is not None else sigma2
    return 2.0 * y / scale
