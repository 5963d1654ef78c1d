"""Single-Gaussian per-bin noise model with SPP-gated recursive adaptation.

The model is initialized from a leading noise-only stretch of the utterance
and then updated frame by frame: bins judged speech-dominated keep their old
statistics, noise-dominated bins blend toward the current observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import MAGNITUDE_FLOOR
from .gauss import SIGMA_FLOOR


@dataclass(frozen=True)
class NoiseModel:
    """Per-bin mean and std-dev of the noise log-spectrum, shapes (K,)."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise ValueError("mu and sigma must be 1-D and equal length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("noise parameters must be finite")
        if np.any(sigma < SIGMA_FLOOR):
            raise ValueError(f"sigma must be >= {SIGMA_FLOOR}")

    @property
    def n_bins(self) -> int:
        return self.mu.shape[0]


def init_from_prefix(frames: np.ndarray) -> NoiseModel:
    """Sample mean and unbiased std over noise-only prefix frames, (N, K)."""
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("insufficient noise-only prefix: need at least 2 frames")
    return NoiseModel(
        mu=x.mean(axis=0),
        sigma=np.maximum(np.sqrt(x.var(axis=0, ddof=1)), SIGMA_FLOOR),
    )


def adapt(model: NoiseModel, z: np.ndarray, spp: np.ndarray, alpha: float) -> NoiseModel:
    """One recursive update gated by the speech presence probability.

    Noise-dominated bins (spp near 0) move toward the observation with
    smoothing ``alpha``; speech-dominated bins are frozen.  The updated mean
    feeds the deviation term of the std update.
    """
    z = np.asarray(z, dtype=np.float64)
    rho = np.asarray(spp, dtype=np.float64)
    if z.shape != model.mu.shape or rho.shape != model.mu.shape:
        raise ValueError("frame, SPP and model lengths differ")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValueError("SPP values must lie in [0, 1]")

    mu_new = rho * model.mu + (1.0 - rho) * (alpha * z + (1.0 - alpha) * model.mu)
    sigma_new = rho * model.sigma + (1.0 - rho) * (
        alpha * np.abs(z - mu_new) + (1.0 - alpha) * model.sigma
    )
    return NoiseModel(mu=mu_new, sigma=np.maximum(sigma_new, SIGMA_FLOOR))


def quiet_noise_model(n_bins: int) -> NoiseModel:
    """Noise model pinned at the magnitude floor: the no-noise limit.

    Useful for running the generative classifier on clean speech, where the
    mixture density then reduces to the clean-speech component densities.
    """
    return NoiseModel(
        mu=np.full(n_bins, np.log(MAGNITUDE_FLOOR)),
        sigma=np.full(n_bins, SIGMA_FLOOR),
    )
