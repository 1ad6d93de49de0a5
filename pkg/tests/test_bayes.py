import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindley_interf.bayes import (
    Flat,
    PointMass,
    PosteriorReport,
    PriorSpec,
    WrappedNormal,
    gaussian_closed_form_posterior,
    log_marginal_likelihood_alt,
    marginal_likelihood_alt,
    posterior_null,
    posterior_null_from_logs,
)
from lindley_interf.errors import ConfigError, Indeterminate
from lindley_interf.homodyne import HomodyneModel, SqueezedCoherentState
from lindley_interf.numerics import gaussian_pdf

from oracles import homodyne_alt_riemann, midpoint
from routes import gaussian_route


class TestPosteriorNull:
    @pytest.mark.parametrize("ln,la", [(0.3, 0.7), (0.0, 1.0), (1.0, 0.0), (1e-300, 1e300)])
    def test_null_certain(self, ln, la):
        assert posterior_null(ln, la, 1.0) == 1.0

    def test_null_impossible(self):
        assert posterior_null(0.4, 0.2, 0.0) == 0.0

    def test_equal_evidence(self):
        assert posterior_null(0.37, 0.37, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_arithmetic_identity(self):
        assert posterior_null(0.1, 0.9, 0.9) == pytest.approx(0.5, abs=1e-15)

    def test_both_zero_is_indeterminate(self):
        with pytest.raises(Indeterminate):
            posterior_null(0.0, 0.0, 0.5)

    def test_one_zero_likelihood(self):
        assert posterior_null(0.0, 1.0, 0.5) == 0.0
        assert posterior_null(1.0, 0.0, 0.5) == 1.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            posterior_null(-0.1, 0.3, 0.5)

    def test_underflowing_likelihoods(self):
        # ratio 1e-20 / 1e-19 is representable only through logs
        z = posterior_null_from_logs(-700.0 * math.log(10), -699.0 * math.log(10), 0.5)
        assert z == pytest.approx(1 / 11, rel=1e-12)

    @given(
        z0=st.floats(0.01, 0.99),
        a=st.floats(-50, 50),
        b=st.floats(-50, 50),
    )
    @settings(max_examples=300)
    def test_strictly_decreasing_in_bayes_factor(self, z0, a, b):
        if a == b:
            return
        lo, hi = sorted((a, b))
        # log-BF separation large enough to be resolved by the logistic
        if hi - lo < 1e-6:
            return
        z_lo = posterior_null_from_logs(0.0, lo, z0)
        z_hi = posterior_null_from_logs(0.0, hi, z0)
        assert z_hi <= z_lo
        if 1e-300 < z_hi < 1 - 1e-12:
            assert z_hi < z_lo

    @given(z0=st.floats(0.0, 1.0), lbf=st.floats(-700, 700))
    def test_report_identity(self, z0, lbf):
        z = posterior_null_from_logs(0.0, lbf, z0)
        rep = PosteriorReport(z, 0.0, lbf, z0)
        assert 0.0 <= rep.posterior_null <= 1.0
        assert rep.posterior_alt == 1.0 - rep.posterior_null
        if 0 < z0 < 1 and abs(lbf) < 30:
            expected = 1.0 / (1.0 + (1 - z0) / z0 * rep.bayes_factor)
            assert rep.posterior_null == pytest.approx(expected, rel=1e-12)


class TestGaussianClosedForm:
    def test_tau_zero_returns_prior(self):
        for z0 in (0.1, 0.5, 0.9):
            assert gaussian_closed_form_posterior(3.0, 0.0, 1.0, 0.0, z0) == pytest.approx(z0, abs=1e-15)

    def test_derived_value(self):
        # quadrature of the N(0,1) prior against N(phi,1) at x=2
        l1 = midpoint(lambda p: gaussian_pdf(2.0, p, 1.0) * gaussian_pdf(p, 0.0, 1.0), -12, 12, 200_000)
        l0 = gaussian_pdf(2.0, 0.0, 1.0)
        ref = 1.0 / (1.0 + l1 / l0)
        assert ref == pytest.approx(0.3422, abs=1e-4)
        assert gaussian_closed_form_posterior(2.0, 0.0, 1.0, 1.0, 0.5) == pytest.approx(ref, abs=1e-10)

    def test_large_tau_drives_to_one_for_moderate_outcome(self):
        # x = 2 sigma: the sqrt(sigma^2 / tau^2) factor dominates
        assert gaussian_closed_form_posterior(2.0, 0.0, 1.0, 1e8, 0.5) > 1 - 1e-6

    @pytest.mark.xfail(strict=True, reason="z(1e8) = 0.99732 at x = 5 sigma; see decisions ledger")
    def test_large_tau_any_outcome(self):
        # at x=5 the factor exp(12.5) is not yet negligible against tau = 1e8,
        # so z only reaches 0.9973
        assert gaussian_closed_form_posterior(5.0, 0.0, 1.0, 1e8, 0.5) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("x", [0.5, 1.0, 3.0])
    def test_bracketing(self, x):
        z0 = 0.3
        assert gaussian_closed_form_posterior(x, 0.0, 1.0, 1e-6, z0) == pytest.approx(z0, abs=1e-9)
        assert gaussian_closed_form_posterior(x, 0.0, 1.0, 1e12, z0) > 1 - 1e-9

    def test_huge_deviation_does_not_overflow(self):
        assert gaussian_closed_form_posterior(60.0, 0.0, 1.0, 5.0, 0.5) == 0.0

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            gaussian_closed_form_posterior(1.0, 0.0, 0.0, 1.0, 0.5)

    @pytest.mark.parametrize("sigma,tau,k", [(0.1, 0.1, 0.0), (1.0, 3.0, 2.5), (10.0, 0.3, 6.0), (0.4, 10.0, -4.0)])
    def test_matches_quadrature_route(self, sigma, tau, k):
        x = 0.2 + k * sigma
        z_cf = gaussian_closed_form_posterior(x, 0.2, sigma, tau, 0.5)
        assert gaussian_route(x, 0.2, sigma, tau, 0.5) == pytest.approx(z_cf, abs=1e-7)


class TestPriors:
    def test_flat_validation(self):
        with pytest.raises(ConfigError):
            Flat(1.0, 1.0)

    def test_wrapped_validation(self):
        with pytest.raises(ConfigError):
            WrappedNormal(0.0, 0.0, math.pi)

    def test_weight_validation(self):
        with pytest.raises(ConfigError):
            PriorSpec(1.2, 0.0, Flat(0, 1))

    def test_wrapped_default_support(self):
        assert WrappedNormal(math.pi / 2, 0.5, math.pi).support == pytest.approx((0.0, math.pi))

    def test_flat_samples_in_support(self):
        s = Flat(-1.0, 2.0).sample(np.random.default_rng(0), 1000)
        assert s.min() >= -1.0 and s.max() <= 2.0

    def test_wrapped_samples_in_support(self):
        w = WrappedNormal(0.1, 2.0, math.pi, lo=0.0)
        s = w.sample(np.random.default_rng(0), 5000)
        assert s.min() >= 0.0 and s.max() <= math.pi


class TestMarginalLikelihood:
    def test_constant_flat(self):
        assert marginal_likelihood_alt(lambda p: 0.25, Flat(0, math.pi)) == pytest.approx(0.25, rel=1e-10)

    def test_constant_wrapped(self):
        prior = PriorSpec(0.5, math.pi / 2, WrappedNormal(math.pi / 2, 0.5, math.pi))
        assert marginal_likelihood_alt(lambda p: 3.0, prior) == pytest.approx(3.0, rel=1e-10)

    def test_point_mass_rejected(self):
        with pytest.raises(ValueError):
            marginal_likelihood_alt(lambda p: 1.0, PointMass(0.3))

    def test_zero_likelihood(self):
        assert log_marginal_likelihood_alt(lambda p: np.full_like(p, -np.inf), Flat(0, 1)) == -math.inf

    def test_homodyne_matches_riemann_oracle(self):
        q = 14.142
        state = SqueezedCoherentState(10.0, squeeze_mag=1.0)
        model = HomodyneModel(state)
        val = marginal_likelihood_alt(lambda b: model.likelihood(q, b), Flat(-math.pi, math.pi))
        ref = homodyne_alt_riemann(q)
        assert val == pytest.approx(ref, rel=1e-6)

    def test_tiny_likelihood_is_relative(self):
        # integrand ~1e-250 everywhere: tolerance must act relative to the value
        val = log_marginal_likelihood_alt(lambda p: -575.0 + np.sin(p), Flat(0, math.pi))
        exact = -575.0 + math.log(midpoint(lambda p: np.exp(np.sin(p)), 0, math.pi, 200_000) / math.pi)
        assert val == pytest.approx(exact, abs=1e-10)
