"""Max-model mathematics for noisy log-spectra.

In the log-magnitude domain a noisy observation is well approximated by the
elementwise maximum of the clean-speech and noise log-spectra.  With Gaussian
bins on both sides everything is closed form:

    density of max(X, Y):       h(z) = f(z) G(z) + F(z) g(z)
    speech-dominance prob.:     rho  = f(z) G(z) / h(z)
    truncated mean:             E[X | X < z] = mu - sigma^2 f(z) / F(z)

Per-component versions (speech modeled by a class-conditional Gaussian
mixture) combine into the classic MMSE log-spectral estimator, and the
dominance probabilities double as per-bin speech presence probabilities for
soft spectral subtraction.  All functions are pure; models are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr

from .gauss import DENSITY_FLOOR, gaussian_cdf, gaussian_pdf
from .mog import PhonemeMog
from .noise import NoiseModel

LOG_DENSITY_FLOOR = np.log(DENSITY_FLOOR)

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class MixmaxDiagnostics:
    """Counters for the rare numerical fallbacks taken during enhancement."""

    uniform_posteriors: int = 0
    undecidable_bins: int = 0
    tail_fallbacks: int = 0

    def merge(self, other: "MixmaxDiagnostics") -> None:
        self.uniform_posteriors += other.uniform_posteriors
        self.undecidable_bins += other.undecidable_bins
        self.tail_fallbacks += other.tail_fallbacks

    @property
    def total(self) -> int:
        return self.uniform_posteriors + self.undecidable_bins + self.tail_fallbacks


# ---------------------------------------------------------------------------
# elementwise max-of-Gaussians density
# ---------------------------------------------------------------------------

def max_density(z, mu_x, sigma_x, mu_y, sigma_y):
    """Density of max(X, Y) for independent Gaussians; broadcasts freely."""
    f = gaussian_pdf(z, mu_x, sigma_x)
    big_f = gaussian_cdf(z, mu_x, sigma_x)
    g = gaussian_pdf(z, mu_y, sigma_y)
    big_g = gaussian_cdf(z, mu_y, sigma_y)
    return f * big_g + big_f * g


def component_densities(z: np.ndarray, mog: PhonemeMog, noise: NoiseModel):
    """Per-bin max-model densities for every mixture component.

    Returns ``(h, log_joint)`` where ``h`` has shape (m, K) and ``log_joint``
    is the length-m vector of per-component joint log-densities (bins are
    treated as independent, so the joint is the sum of per-bin logs).
    """
    z = np.asarray(z, dtype=np.float64)
    h = max_density(z[np.newaxis, :], mog.means, mog.stds,
                    noise.mu[np.newaxis, :], noise.sigma[np.newaxis, :])
    log_joint = np.sum(np.log(np.maximum(h, DENSITY_FLOOR)), axis=1)
    return h, log_joint


def generative_posterior(
    z: np.ndarray,
    mog: PhonemeMog,
    noise: NoiseModel,
    diag: MixmaxDiagnostics | None = None,
) -> np.ndarray:
    """Component posterior p(i | z) under the max-model mixture, length m.

    Computed in the log domain with max-subtraction.  If every component
    underflows to nothing (non-finite scores), a uniform posterior is
    returned and counted in ``diag``.
    """
    _, log_joint = component_densities(z, mog, noise)
    scores = np.log(mog.weights) + log_joint
    top = np.max(scores)
    if not np.isfinite(top):
        if diag is not None:
            diag.uniform_posteriors += 1
        return np.full(mog.n_components, 1.0 / mog.n_components)
    w = np.exp(scores - top)
    return w / np.sum(w)


def speech_dominance(
    z: np.ndarray,
    mog: PhonemeMog,
    noise: NoiseModel,
    diag: MixmaxDiagnostics | None = None,
) -> np.ndarray:
    """P(speech exceeds noise | observation, component), shape (m, K).

    Bins where the mixture density itself underflows carry no information
    either way; those come back as 0.5 and are counted in ``diag``.
    """
    z = np.asarray(z, dtype=np.float64)
    zb = z[np.newaxis, :]
    f = gaussian_pdf(zb, mog.means, mog.stds)
    big_g = gaussian_cdf(zb, noise.mu[np.newaxis, :], noise.sigma[np.newaxis, :])
    g = gaussian_pdf(zb, noise.mu[np.newaxis, :], noise.sigma[np.newaxis, :])
    big_f = gaussian_cdf(zb, mog.means, mog.stds)

    numer = f * big_g
    h = numer + big_f * g
    undecidable = h < DENSITY_FLOOR
    if diag is not None:
        diag.undecidable_bins += int(np.count_nonzero(undecidable))
    rho = np.where(undecidable, 0.5, numer / np.where(undecidable, 1.0, h))
    return np.clip(rho, 0.0, 1.0)


def conditional_mean_below(
    z: np.ndarray,
    mog: PhonemeMog,
    diag: MixmaxDiagnostics | None = None,
) -> np.ndarray:
    """E[X_k | X_k < z_k, component i] for all i, k; shape (m, K).

    The inverse Mills ratio f/F is evaluated as exp(log f − log F) so the
    deep lower tail stays finite.  Once F itself drops below the density
    floor the asymptote z − σ is used instead (counted in ``diag``); either
    way the result sits strictly below z.
    """
    z = np.asarray(z, dtype=np.float64)
    a = (z[np.newaxis, :] - mog.means) / mog.stds
    log_cdf = log_ndtr(a)
    # log of the standard normal pdf at a, shifted by -log sigma for the
    # actual density; the sigma^2 * f/F term then reduces to sigma * ratio.
    log_pdf = -0.5 * a * a - _LOG_SQRT_2PI
    with np.errstate(over="ignore"):
        ratio = np.exp(log_pdf - log_cdf)
    mean = mog.means - mog.stds * ratio

    fallback = (log_cdf < LOG_DENSITY_FLOOR) | ~np.isfinite(mean)
    if diag is not None:
        diag.tail_fallbacks += int(np.count_nonzero(fallback))
    return np.where(fallback, z[np.newaxis, :] - mog.stds, mean)


def mmse_estimate(
    z: np.ndarray,
    posterior: np.ndarray,
    mog: PhonemeMog,
    noise: NoiseModel,
    diag: MixmaxDiagnostics | None = None,
) -> np.ndarray:
    """Posterior-weighted MMSE estimate of the clean log-spectrum, length K.

    Per component the estimate keeps the observation where speech dominates
    and falls back to the truncated-Gaussian mean where noise does:
    x̂ = rho·z + (1−rho)·E[X | X < z].
    """
    z = np.asarray(z, dtype=np.float64)
    p = np.asarray(posterior, dtype=np.float64)
    if p.shape != (mog.n_components,):
        raise ValueError("posterior length must match component count")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("posterior must be a probability vector")
    rho = speech_dominance(z, mog, noise, diag)
    below = conditional_mean_below(z, mog, diag)
    per_component = rho * z[np.newaxis, :] + (1.0 - rho) * below
    return p @ per_component


def hybrid_spp(
    p_nn: np.ndarray,
    z: np.ndarray,
    mog: PhonemeMog,
    noise: NoiseModel,
    diag: MixmaxDiagnostics | None = None,
) -> np.ndarray:
    """Speech presence probability per bin: classifier-weighted dominance.

    Mixes the per-component dominance probabilities with an externally
    supplied component posterior (typically from the discriminative
    classifier) instead of the generative one.
    """
    p = np.asarray(p_nn, dtype=np.float64)
    if p.shape != (mog.n_components,):
        raise ValueError("posterior length must match component count")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("posterior must be a probability vector")
    rho = speech_dominance(z, mog, noise, diag)
    return np.clip(p @ rho, 0.0, 1.0)


def soft_subtract(z: np.ndarray, spp: np.ndarray, beta: float) -> np.ndarray:
    """Soft spectral subtraction in the log domain: z − (1−rho)·β.

    Fully speech-dominated bins pass through untouched; fully noise-dominated
    bins are attenuated by the flat reduction level β (natural-log units).
    """
    z = np.asarray(z, dtype=np.float64)
    rho = np.asarray(spp, dtype=np.float64)
    if z.shape != rho.shape:
        raise ValueError("observation and SPP lengths differ")
    if beta < 0:
        raise ValueError("noise-reduction level must be >= 0")
    return z - (1.0 - rho) * beta
