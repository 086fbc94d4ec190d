import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from sel_lab import specfun
from sel_lab.specfun import (
    BesselDomainError,
    bessel_eval,
    bessel_i,
    bessel_ive,
    bessel_k,
    bessel_kve,
    bessel_scaled_all,
    i_scaled_by,
    k_scaled_by,
    regime_i,
    regime_k,
)

ORDERS = [0.0, 0.3, 0.5, 1.0, 2.7, 10.0]
XS = np.geomspace(0.1, 30.0, 200)


class TestClosedForms:
    def test_half_integer_i(self):
        # I_{1/2}(x) = sqrt(2/(pi x)) sinh x
        for x in (0.01, 0.5, 1.0, 3.0, 17.0, 80.0):
            want = math.sqrt(2 / (math.pi * x)) * math.sinh(x)
            assert bessel_i(0.5, x) == pytest.approx(want, rel=1e-10)
        assert bessel_i(0.5, 1.0) == pytest.approx(0.937674888245, rel=1e-11)

    def test_half_integer_k(self):
        for x in (0.01, 0.5, 1.0, 3.0, 17.0, 80.0):
            want = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
            assert bessel_k(0.5, x) == pytest.approx(want, rel=1e-10)
        assert bessel_k(0.5, 1.0) == pytest.approx(0.461068504447, rel=1e-11)

    def test_three_halves(self):
        for x in (0.2, 1.0, 5.0, 40.0):
            ki = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 1 / x)
            ii = math.sqrt(2 / (math.pi * x)) * (math.cosh(x) - math.sinh(x) / x)
            assert bessel_k(1.5, x) == pytest.approx(ki, rel=1e-10)
            assert bessel_i(1.5, x) == pytest.approx(ii, rel=1e-10)

    def test_i0_series_oracle(self):
        oracle = sum((0.5) ** (2 * m) / math.factorial(m) ** 2 for m in range(40))
        assert abs(bessel_i(0, 1.0) - oracle) <= 1e-12

    def test_i0_at_zero(self):
        assert bessel_i(0, 1e-12) == pytest.approx(1.0, abs=1e-15)

    def test_k0_log(self):
        ratios = [bessel_k(0, x) / (-math.log(x)) for x in (1e-4, 1e-8, 1e-16, 1e-100)]
        assert all(abs(r - 1) < a for r, a in zip(ratios, (0.2, 0.1, 0.05, 0.01)))
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)

    def test_k_small_x_power(self):
        nu = 2.7
        for x in (1e-6, 1e-8):
            want = 0.5 * math.gamma(nu) * (2 / x) ** nu
            assert bessel_k(nu, x) == pytest.approx(want, rel=1e-6)


class TestAgainstScipy:
    @pytest.mark.parametrize("nu", [0.0, 1e-6, 0.3, 0.5, 0.49999, 0.50001, 1.0, 2.7, 3.00002, 10.0, 24.9, 50.0])
    def test_scaled_values(self, nu):
        for x in np.geomspace(1e-3, 700, 160):
            assert bessel_ive(nu, x) == pytest.approx(sc.ive(nu, x), rel=1e-10)
            kv = sc.kve(nu, x)
            if np.isfinite(kv):
                assert bessel_kve(nu, x) == pytest.approx(kv, rel=1e-10)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 50), st.floats(1e-2, 700))
    def test_random(self, nu, x):
        assert bessel_ive(nu, x) == pytest.approx(sc.ive(nu, x), rel=1e-10)
        kv = sc.kve(nu, x)
        if np.isfinite(kv) and kv < 1e300:
            assert bessel_kve(nu, x) == pytest.approx(kv, rel=1e-10)

    def test_derivatives(self):
        for nu in ORDERS:
            for x in XS[::7]:
                e = bessel_eval(nu, x)
                assert e.deriv_i == pytest.approx(sc.ivp(nu, x), rel=1e-10, abs=1e-300)
                assert e.deriv_k == pytest.approx(sc.kvp(nu, x), rel=1e-10)


class TestIdentities:
    def test_wronskian(self):
        for nu in ORDERS:
            for x in XS:
                e = bessel_eval(nu, x)
                w = x * (e.value_i * e.deriv_k - e.deriv_i * e.value_k)
                assert abs(w + 1) <= 1e-9

    def test_ode_residual(self):
        for nu in ORDERS:
            for x in XS:
                h = 2e-3 * min(x, 1.0)
                for fn in (bessel_i, bessel_k):
                    ym2, ym, y0, yp, yp2 = (fn(nu, x + j * h) for j in (-2, -1, 0, 1, 2))
                    d2 = (-yp2 + 16 * yp - 30 * y0 + 16 * ym - ym2) / (12 * h * h)
                    d1 = (-yp2 + 8 * yp - 8 * ym + ym2) / (12 * h)
                    res = x * x * d2 + x * d1 - (x * x + nu * nu) * y0
                    assert abs(res) <= 1e-6 * max(abs(y0), x * x * abs(y0))

    def test_recurrence(self):
        for nu in (1.0, 1.3, 2.7, 10.0, 33.3):
            for x in XS[::5]:
                lhs = bessel_i(nu - 1, x) - bessel_i(nu + 1, x)
                rhs = 2 * nu / x * bessel_i(nu, x)
                assert lhs == pytest.approx(rhs, rel=1e-9)
                lhs = bessel_k(nu + 1, x) - bessel_k(nu - 1, x)
                rhs = 2 * nu / x * bessel_k(nu, x)
                assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_positivity_and_monotonicity(self):
        for nu in ORDERS + [50.0]:
            for x in np.geomspace(1e-3, 600, 80):
                try:
                    e = bessel_eval(nu, x)
                except OverflowError:
                    continue
                assert e.positive and e.monotone


class TestRegimes:
    def test_regime_labels(self):
        assert regime_i(0, 1.0) == "series"
        assert regime_i(40, 15.0) == "series"
        assert regime_i(0, 5.0) == "wronskian"
        assert regime_i(1, 61.0) == "asymptotic"
        assert regime_k(0, 1.0) == "temme"
        assert regime_k(0, 3.0) == "steed"
        assert regime_k(0, 31.0) == "asymptotic"

    @pytest.mark.parametrize("nu", ORDERS + [40.0])
    def test_overlap(self, nu):
        # values from adjacent regimes agree on their shared boundary
        xb = max(2.0, nu / 2)
        assert i_scaled_by("series", nu, xb) == pytest.approx(i_scaled_by("wronskian", nu, xb), rel=1e-9)
        xa = 30 * (1 + nu)
        assert i_scaled_by("wronskian", nu, xa) == pytest.approx(i_scaled_by("asymptotic", nu, xa), rel=1e-9)
        assert k_scaled_by("temme", nu, 2.0) == pytest.approx(k_scaled_by("steed", nu, 2.0), rel=1e-9)
        assert k_scaled_by("steed", nu, xa) == pytest.approx(k_scaled_by("asymptotic", nu, xa), rel=1e-9)

    def test_gamma_taylor_coefficients(self):
        mpmath.mp.dps = 30
        want = mpmath.taylor(lambda z: 1 / mpmath.gamma(1 + z), 0, len(specfun._RGAMMA) - 1)
        for a, b in zip(specfun._RGAMMA, want):
            assert a == pytest.approx(float(b), rel=1e-15, abs=1e-30)

    @pytest.mark.parametrize("mu", [0.0, 1e-9, 5e-5, -5e-5, 1.5e-4, 0.2, -0.4999, 0.5])
    def test_gamma_parts(self, mu):
        gam1, gam2, gampl, gammi = specfun._gamma_parts(mu)
        assert gampl == pytest.approx(1 / math.gamma(1 + mu), rel=1e-15)
        assert gammi == pytest.approx(1 / math.gamma(1 - mu), rel=1e-15)
        mpmath.mp.dps = 40
        if mu != 0:
            m = mpmath.mpf(mu)
            g1 = (1 / mpmath.gamma(1 - m) - 1 / mpmath.gamma(1 + m)) / (2 * m)
            assert gam1 == pytest.approx(float(g1), rel=1e-14)
        else:
            assert gam1 == pytest.approx(-0.5772156649015329, rel=1e-15)

    def test_near_integer_order_continuity(self):
        x = 0.7
        base = bessel_k(3.0, x)
        for d in (1e-12, 1e-8, 5e-5, 2e-4):
            assert bessel_k(3.0 + d, x) == pytest.approx(sc.kv(3.0 + d, x), rel=1e-12)
            assert abs(bessel_k(3.0 + d, x) - base) <= 1e-2 * base


class TestErrors:
    def test_domain(self):
        with pytest.raises(BesselDomainError):
            bessel_i(0, 0)
        with pytest.raises(BesselDomainError):
            bessel_k(-0.5, 1)
        with pytest.raises(BesselDomainError):
            bessel_k(1, math.nan)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            bessel_i(0, 800)
        with pytest.raises(OverflowError):
            bessel_k(50, 1e-10)
        # scaled variant stays finite
        assert math.isfinite(bessel_ive(0, 800))

    def test_underflow_is_zero_not_error(self):
        assert bessel_k(0, 800) == 0.0 or bessel_k(0, 800) < 1e-300

    def test_scaled_bundle(self):
        s = bessel_scaled_all(1.0, 2.0)
        assert s.ive == pytest.approx(sc.ive(1, 2), rel=1e-13)
        assert s.kve_d == pytest.approx(sc.kvp(1, 2) * math.exp(2), rel=1e-13)
