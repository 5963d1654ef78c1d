"""Max-model densities, dominance probabilities, conditional means, estimators.

The closed forms are checked three independent ways: Simpson quadrature for
density normalization, finite differences of the product CDF for the density
formula, and rejection sampling for the conditional expectations.
"""

import numpy as np
import pytest

from nnmm.gauss import gaussian_cdf
from nnmm.mixmax import (
    MixmaxDiagnostics,
    component_densities,
    conditional_mean_below,
    generative_posterior,
    hybrid_spp,
    max_density,
    mmse_estimate,
    soft_subtract,
    speech_dominance,
)
from nnmm.mog import PhonemeMog
from nnmm.noise import NoiseModel

from oracles import density_integral, mc_max_window, mc_truncated_mean


def single_mog(mu, sigma):
    """One-component model over len(mu) bins."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    return PhonemeMog(weights=np.array([1.0]), means=mu[None, :], stds=sigma[None, :])


def noise_of(mu, sigma):
    return NoiseModel(mu=np.atleast_1d(np.asarray(mu, dtype=float)),
                      sigma=np.atleast_1d(np.asarray(sigma, dtype=float)))


# ---------------------------------------------------------------------------
# Density of the elementwise max
# ---------------------------------------------------------------------------


class TestMaxDensity:
    def test_noise_free_limit_reduces_to_speech_density(self):
        """With the noise far below, h collapses onto the clean density f."""
        z = np.linspace(-3, 3, 41)
        h = max_density(z, 0.0, 1.0, -40.0, 0.5)
        f = np.exp(-0.5 * z**2) / np.sqrt(2 * np.pi)
        np.testing.assert_allclose(h, f, rtol=1e-6)

    def test_identical_pair_gives_2fF(self):
        z = np.linspace(-2, 4, 25)
        h = max_density(z, 1.0, 0.7, 1.0, 0.7)
        f = np.exp(-0.5 * ((z - 1) / 0.7) ** 2) / (0.7 * np.sqrt(2 * np.pi))
        big_f = gaussian_cdf(z, 1.0, 0.7)
        np.testing.assert_allclose(h, 2 * f * big_f, rtol=1e-12)

    def test_integrates_to_one(self):
        """Quadrature over a wide grid: the max of two Gaussians is a density."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            mx, my = rng.uniform(-4, 4, 2)
            sx, sy = rng.uniform(0.3, 3.0, 2)
            lo = min(mx - 12 * sx, my - 12 * sy)
            hi = max(mx + 12 * sx, my + 12 * sy)
            total = density_integral(lambda z: max_density(z, mx, sx, my, sy), lo, hi)
            assert abs(total - 1.0) < 1e-5

    def test_is_derivative_of_product_cdf(self):
        """h(z) must equal d/dz [F(z) G(z)] (max CDF), by central differences."""
        rng = np.random.default_rng(8)
        eps = 1e-5
        for _ in range(10):
            mx, my = rng.uniform(-2, 2, 2)
            sx, sy = rng.uniform(0.4, 2.0, 2)
            z = rng.uniform(-3, 3, 15)
            fd = (
                gaussian_cdf(z + eps, mx, sx) * gaussian_cdf(z + eps, my, sy)
                - gaussian_cdf(z - eps, mx, sx) * gaussian_cdf(z - eps, my, sy)
            ) / (2 * eps)
            np.testing.assert_allclose(max_density(z, mx, sx, my, sy), fd,
                                       rtol=1e-6, atol=1e-12)

    def test_mixture_density_integrates_to_one(self):
        """Sum of weighted per-component max densities is itself a density."""
        mog = PhonemeMog(weights=np.array([0.3, 0.7]),
                         means=np.array([[0.0], [2.5]]),
                         stds=np.array([[0.8], [1.4]]))
        noise = noise_of([0.5], [1.1])

        def mixture(z):
            out = np.zeros_like(z)
            for i in range(2):
                out += mog.weights[i] * max_density(
                    z, mog.means[i, 0], mog.stds[i, 0], noise.mu[0], noise.sigma[0])
            return out

        total = density_integral(mixture, -20.0, 25.0)
        assert abs(total - 1.0) < 1e-5

    def test_component_densities_shapes_and_log_joint(self):
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=np.zeros((2, 4)), stds=np.ones((2, 4)))
        noise = noise_of(np.zeros(4), np.ones(4))
        h, log_joint = component_densities(np.zeros(4), mog, noise)
        assert h.shape == (2, 4)
        np.testing.assert_allclose(log_joint, np.log(h).sum(axis=1), rtol=1e-12)


# ---------------------------------------------------------------------------
# Generative posterior
# ---------------------------------------------------------------------------


class TestGenerativePosterior:
    def test_single_component_is_certain(self):
        mog = single_mog([0.0, 1.0], [1.0, 1.0])
        noise = noise_of([0.0, 0.0], [1.0, 1.0])
        np.testing.assert_allclose(generative_posterior(np.zeros(2), mog, noise), [1.0])

    def test_z_at_far_separated_component_mean(self):
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=np.array([[0.0, 0.0], [30.0, 30.0]]),
                         stds=np.ones((2, 2)))
        noise = noise_of([-5.0, -5.0], [1.0, 1.0])
        p = generative_posterior(np.array([30.0, 30.0]), mog, noise)
        assert p[1] > 0.99

    def test_symmetric_components_give_uniform(self):
        mog = PhonemeMog(weights=np.array([0.25, 0.25, 0.5]),
                         means=np.zeros((3, 2)), stds=np.ones((3, 2)))
        noise = noise_of(np.zeros(2), np.ones(2))
        p = generative_posterior(np.ones(2), mog, noise)
        np.testing.assert_allclose(p[0], p[1], rtol=1e-12)
        assert abs(p.sum() - 1.0) < 1e-12

    def test_sums_to_one_random(self):
        rng = np.random.default_rng(9)
        mog = PhonemeMog(weights=np.full(4, 0.25),
                         means=rng.normal(0, 2, (4, 8)),
                         stds=rng.uniform(0.5, 2, (4, 8)))
        noise = noise_of(rng.normal(0, 1, 8), rng.uniform(0.5, 2, 8))
        for _ in range(5):
            p = generative_posterior(rng.normal(0, 3, 8), mog, noise)
            assert abs(p.sum() - 1.0) < 1e-9
            assert np.all(p >= 0)

    def test_non_finite_scores_fall_back_to_uniform(self):
        mog = single_mog([0.0], [1.0])
        noise = noise_of([0.0], [1.0])
        diag = MixmaxDiagnostics()
        p = generative_posterior(np.array([np.nan]), mog, noise, diag)
        np.testing.assert_allclose(p, [1.0])
        assert diag.uniform_posteriors == 1


# ---------------------------------------------------------------------------
# Speech dominance
# ---------------------------------------------------------------------------


class TestSpeechDominance:
    def test_identical_distributions_are_coin_flips(self):
        mog = single_mog(np.zeros(5), np.ones(5))
        noise = noise_of(np.zeros(5), np.ones(5))
        rho = speech_dominance(np.linspace(-2, 2, 5), mog, noise)
        np.testing.assert_allclose(rho, 0.5, rtol=1e-12)

    def test_speech_far_above_noise_dominates(self):
        mog = single_mog([0.0], [1.0])
        noise = noise_of([-30.0], [1.0])
        rho = speech_dominance(np.array([0.5]), mog, noise)
        np.testing.assert_allclose(rho, 1.0, atol=1e-12)

    def test_noise_far_above_speech_dominates(self):
        mog = single_mog([-30.0], [1.0])
        noise = noise_of([0.0], [1.0])
        rho = speech_dominance(np.array([0.5]), mog, noise)
        np.testing.assert_allclose(rho, 0.0, atol=1e-12)

    def test_monte_carlo_rejection_oracle(self):
        """Closed form matches empirical P(Y<X | max in window) within 3 SE."""
        rng = np.random.default_rng(10)
        mog = single_mog([1.0], [1.2])
        noise = noise_of([0.0], [0.9])
        for z in [-0.5, 0.5, 1.5, 2.5]:
            est = mc_max_window(rng, 400_000, 1.0, 1.2, 0.0, 0.9, z, 0.02)
            rho = speech_dominance(np.array([z]), mog, noise)[0, 0]
            assert abs(rho - est["p_dominance"]) < 3 * est["p_se"], (
                f"z={z}: closed {rho:.4f} vs mc {est['p_dominance']:.4f}"
            )

    def test_undecidable_bin_flagged(self):
        """Where both densities underflow the bin reports exactly one half."""
        mog = single_mog([0.0], [1.0])
        noise = noise_of([0.0], [1.0])
        diag = MixmaxDiagnostics()
        rho = speech_dominance(np.array([60.0]), mog, noise, diag)
        assert rho[0, 0] == 0.5
        assert diag.undecidable_bins == 1

    def test_range_always_valid(self):
        rng = np.random.default_rng(11)
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=rng.normal(0, 3, (2, 6)),
                         stds=rng.uniform(0.3, 2, (2, 6)))
        noise = noise_of(rng.normal(0, 3, 6), rng.uniform(0.3, 2, 6))
        for _ in range(20):
            rho = speech_dominance(rng.normal(0, 5, 6), mog, noise)
            assert np.all(rho >= 0) and np.all(rho <= 1)


# ---------------------------------------------------------------------------
# Conditional mean below the observation
# ---------------------------------------------------------------------------


class TestConditionalMean:
    def test_at_the_mean(self):
        """Cut at mu: mean of the lower half-Gaussian is mu - sigma*sqrt(2/pi)."""
        mog = single_mog([2.0], [1.5])
        out = conditional_mean_below(np.array([2.0]), mog)
        np.testing.assert_allclose(out[0, 0], 2.0 - 1.5 * np.sqrt(2 / np.pi), rtol=1e-12)

    def test_inactive_truncation(self):
        mog = single_mog([1.0], [0.5])
        out = conditional_mean_below(np.array([1.0 + 10 * 0.5]), mog)
        np.testing.assert_allclose(out[0, 0], 1.0, atol=1e-6)

    def test_monte_carlo_truncation_oracle(self):
        rng = np.random.default_rng(12)
        for mu, sigma, z in [(0.5, 1.3, 1.0), (-1.0, 0.7, -1.5), (2.0, 2.0, 0.0)]:
            mc_mean, se = mc_truncated_mean(rng, 400_000, mu, sigma, z)
            closed = conditional_mean_below(np.array([z]), single_mog([mu], [sigma]))[0, 0]
            assert abs(closed - mc_mean) < 3 * se, f"({mu},{sigma},{z})"

    def test_always_below_cut(self):
        rng = np.random.default_rng(13)
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=rng.normal(0, 2, (2, 9)),
                         stds=rng.uniform(0.3, 2, (2, 9)))
        for _ in range(30):
            z = rng.normal(0, 6, 9)
            out = conditional_mean_below(z, mog)
            assert np.all(out < z[None, :])

    def test_deep_tail_fallback(self):
        """Once F underflows, z - sigma is substituted and counted."""
        mog = single_mog([0.0], [1.0])
        diag = MixmaxDiagnostics()
        out = conditional_mean_below(np.array([-40.0]), mog, diag)
        np.testing.assert_allclose(out[0, 0], -41.0)
        assert diag.tail_fallbacks == 1

    def test_near_tail_still_analytic(self):
        """Just above the underflow cliff the stable log-domain path is used."""
        mog = single_mog([0.0], [1.0])
        diag = MixmaxDiagnostics()
        out = conditional_mean_below(np.array([-30.0]), mog, diag)
        assert diag.tail_fallbacks == 0
        # asymptotic inverse Mills ratio: lambda(-a) ~ a + 1/a
        expected = -30.0 - 1.0 / (30.0 + 1.0 / 30.0)
        np.testing.assert_allclose(out[0, 0], expected, rtol=1e-3)
        assert out[0, 0] < -30.0


# ---------------------------------------------------------------------------
# MMSE estimator
# ---------------------------------------------------------------------------


class TestMmse:
    def test_negligible_noise_passes_observation(self):
        mog = single_mog([0.0, 1.0], [1.0, 1.0])
        noise = noise_of([-40.0, -40.0], [0.5, 0.5])
        z = np.array([0.3, 0.8])
        out = mmse_estimate(z, np.array([1.0]), mog, noise)
        np.testing.assert_allclose(out, z, atol=1e-6)

    def test_one_hot_posterior_reduces_to_single_component(self):
        rng = np.random.default_rng(14)
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=rng.normal(0, 1, (2, 5)),
                         stds=rng.uniform(0.5, 1.5, (2, 5)))
        noise = noise_of(rng.normal(0, 1, 5), rng.uniform(0.5, 1.5, 5))
        z = rng.normal(0, 2, 5)
        rho = speech_dominance(z, mog, noise)
        below = conditional_mean_below(z, mog)
        expected = rho[1] * z + (1 - rho[1]) * below[1]
        out = mmse_estimate(z, np.array([0.0, 1.0]), mog, noise)
        np.testing.assert_allclose(out, expected, rtol=1e-12)

    def test_never_exceeds_observation(self):
        rng = np.random.default_rng(15)
        mog = PhonemeMog(weights=np.array([0.4, 0.6]),
                         means=rng.normal(0, 2, (2, 7)),
                         stds=rng.uniform(0.3, 2, (2, 7)))
        noise = noise_of(rng.normal(0, 2, 7), rng.uniform(0.3, 2, 7))
        for _ in range(25):
            z = rng.normal(0, 5, 7)
            p = rng.dirichlet([1, 1])
            out = mmse_estimate(z, p, mog, noise)
            assert np.all(out <= z + 1e-9)

    def test_scalar_monte_carlo_oracle(self):
        """Windowed rejection sampling of E[X | max(X,Y) near z], m=1."""
        rng = np.random.default_rng(16)
        mog = single_mog([0.0], [1.0])
        noise = noise_of([0.5], [0.8])
        for z in [0.2, 1.0, 2.0]:
            est = mc_max_window(rng, 400_000, 0.0, 1.0, 0.5, 0.8, z, 0.02)
            closed = mmse_estimate(np.array([z]), np.array([1.0]), mog, noise)[0]
            assert abs(closed - est["mean_x"]) < 3 * est["mean_x_se"], f"z={z}"

    def test_bad_posterior_rejected(self):
        mog = single_mog([0.0], [1.0])
        noise = noise_of([0.0], [1.0])
        with pytest.raises(ValueError, match="probability"):
            mmse_estimate(np.zeros(1), np.array([0.4]), mog, noise)


# ---------------------------------------------------------------------------
# Hybrid SPP and soft subtraction
# ---------------------------------------------------------------------------


class TestHybridSpp:
    def test_all_dominant_gives_one(self):
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=np.zeros((2, 3)), stds=np.ones((2, 3)))
        noise = noise_of(np.full(3, -35.0), np.ones(3))
        spp = hybrid_spp(np.array([0.3, 0.7]), np.zeros(3), mog, noise)
        np.testing.assert_allclose(spp, 1.0, atol=1e-12)

    def test_one_hot_selects_component_row(self):
        rng = np.random.default_rng(17)
        mog = PhonemeMog(weights=np.array([0.5, 0.5]),
                         means=rng.normal(0, 1, (2, 4)),
                         stds=rng.uniform(0.5, 1.5, (2, 4)))
        noise = noise_of(rng.normal(0, 1, 4), rng.uniform(0.5, 1.5, 4))
        z = rng.normal(0, 2, 4)
        rho = speech_dominance(z, mog, noise)
        np.testing.assert_allclose(
            hybrid_spp(np.array([1.0, 0.0]), z, mog, noise), rho[0], rtol=1e-12)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(18)
        m, k = 4, 6
        mog = PhonemeMog(weights=np.full(m, 1 / m),
                         means=rng.normal(0, 1, (m, k)),
                         stds=rng.uniform(0.5, 1.5, (m, k)))
        noise = noise_of(rng.normal(0, 1, k), rng.uniform(0.5, 1.5, k))
        z = rng.normal(0, 2, k)
        p = rng.dirichlet(np.ones(m))

        rho = speech_dominance(z, mog, noise)
        naive = np.zeros(k)
        for kk in range(k):
            for i in range(m):
                naive[kk] += p[i] * rho[i, kk]
        np.testing.assert_allclose(hybrid_spp(p, z, mog, noise), naive, rtol=1e-12)


class TestSoftSubtract:
    def test_full_presence_passes(self):
        z = np.array([1.0, -2.0])
        np.testing.assert_allclose(soft_subtract(z, np.ones(2), 2.5), z)

    def test_full_absence_subtracts_beta(self):
        z = np.array([1.0, -2.0])
        np.testing.assert_allclose(soft_subtract(z, np.zeros(2), 2.5), z - 2.5)

    def test_halfway(self):
        np.testing.assert_allclose(soft_subtract(np.array([3.0]), np.array([0.5]), 2.0), [2.0])

    def test_shift_equivariance(self):
        rng = np.random.default_rng(19)
        z = rng.normal(0, 2, 8)
        rho = rng.uniform(0, 1, 8)
        a = soft_subtract(z + 1.7, rho, 2.5)
        b = soft_subtract(z, rho, 2.5) + 1.7
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            soft_subtract(np.zeros(2), np.zeros(2), -1.0)


class TestDiagnostics:
    def test_merge_accumulates(self):
        a = MixmaxDiagnostics(uniform_posteriors=1, undecidable_bins=2, tail_fallbacks=3)
        b = MixmaxDiagnostics(tail_fallbacks=4)
        a.merge(b)
        assert (a.uniform_posteriors, a.undecidable_bins, a.tail_fallbacks) == (1, 2, 7)
        assert a.total == 10
