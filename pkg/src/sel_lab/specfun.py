"""Modified Bessel functions I_nu, K_nu of real order nu >= 0 and argument x > 0.

Regimes (all in double precision, pure Python scalars):

* I_nu: ascending power series for x <= max(2, nu/2); continued fraction for
  I_{nu+1}/I_nu normalized by the Wronskian I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x
  in the mid range; Hankel asymptotic expansion for x >= 30(1+nu).
* K_nu: Temme's series for x <= 2; Steed's continued fraction for
  2 < x < 30(1+nu); Hankel asymptotic expansion beyond.  The first two produce
  K_mu, K_{mu+1} with |mu| <= 1/2 and reach nu by forward recurrence, which is
  stable for K.

The exponentially scaled values ``ive = e^{-x} I`` and ``kve = e^{x} K`` are the
primary outputs; unscaled values raise ``OverflowError`` when out of range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = 1e-16
MAX_ITER = 100_000
ASYMPTOTIC_FACTOR = 30.0
TEMME_MAX_X = 2.0
SMALL_MU = 1e-4

# Taylor coefficients of 1/Gamma(1+z) about z = 0
_RGAMMA = (
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
)


class BesselDomainError(ValueError):
    """Raised for x <= 0, nu < 0 or non-finite input."""


def _check(nu, x):
    nu = float(nu)
    x = float(x)
    if not (math.isfinite(nu) and math.isfinite(x)):
        raise BesselDomainError(f"non-finite input nu={nu!r}, x={x!r}")
    if nu < 0:
        raise BesselDomainError(f"order must be >= 0, got nu={nu}")
    if x <= 0:
        raise BesselDomainError(f"argument must be > 0, got x={x}")
    return nu, x


def _asymptotic_threshold(nu: float) -> float:
    return ASYMPTOTIC_FACTOR * (1.0 + nu)


# ---------------------------------------------------------------------------
# I regimes (each returns the scaled value e^{-x} I_nu(x))


def i_series_scaled(nu: float, x: float) -> float:
    """Power series sum_k (x/2)^{2k+nu} / (k! Gamma(nu+k+1)), scaled by e^{-x}."""
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (nu + k))
        total += term
        if term < EPS * total:
            break
        if k > MAX_ITER:
            raise ArithmeticError("I series did not converge")
    log_pref = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0) - x
    return total * math.exp(log_pref)


def i_ratio_cf(nu: float, x: float) -> float:
    """I_{nu+1}(x)/I_nu(x) by the continued fraction 1/(2(nu+1)/x + 1/(2(nu+2)/x + ...))."""
    tiny = 1e-300
    xi = 1.0 / x
    f = tiny
    C = f
    D = 0.0
    for k in range(1, MAX_ITER):
        bk = 2.0 * (nu + k) * xi
        D = bk + D
        D = tiny if D == 0.0 else D
        C = bk + 1.0 / C
        C = tiny if C == 0.0 else C
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < EPS:
            return f
    raise ArithmeticError("I ratio continued fraction did not converge")


def i_wronskian_scaled(nu: float, x: float) -> float:
    """I_nu from the continued-fraction ratio and K via the Wronskian, scaled by e^{-x}."""
    r = i_ratio_cf(nu, x)
    k0, k1 = _k_pair_scaled(nu, x)
    return 1.0 / (x * (k1 + r * k0))


def _hankel_terms(nu: float, x: float, sign: float) -> float:
    """sum_k sign^k a_k(nu)/x^k with a_k = prod_{j<=k} (4nu^2-(2j-1)^2)/(k! 8^k)."""
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(1, 400):
        term *= sign * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        a = abs(term)
        if a > prev:
            break
        total += term
        if a < EPS * abs(total):
            break
        prev = a
    return total


def i_asymptotic_scaled(nu: float, x: float) -> float:
    """Large-argument expansion e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum (-1)^k a_k / x^k."""
    return _hankel_terms(nu, x, -1.0) / math.sqrt(2.0 * math.pi * x)


# ---------------------------------------------------------------------------
# K regimes (each returns the scaled pair e^{x} (K_mu, K_{mu+1}) at |mu| <= 1/2)


def _split_order(nu: float) -> tuple[int, float]:
    nl = int(nu + 0.5)
    return nl, nu - nl


def _gamma_parts(mu: float) -> tuple[float, float, float, float]:
    """gam1 = (1/G(1-mu) - 1/G(1+mu))/(2mu), gam2 = (1/G(1-mu) + 1/G(1+mu))/2,
    plus 1/G(1+mu) and 1/G(1-mu), all from the Taylor series of 1/Gamma(1+z)."""
    even = 0.0
    odd = 0.0
    m2 = mu * mu
    pw = 1.0
    for k in range(0, len(_RGAMMA), 2):
        even += _RGAMMA[k] * pw
        if k + 1 < len(_RGAMMA):
            odd += _RGAMMA[k + 1] * pw
        pw *= m2
    gampl = even + mu * odd
    gammi = even - mu * odd
    return -odd, even, gampl, gammi


def _x_over_sin(t: float) -> float:
    if abs(t) < SMALL_MU:
        t2 = t * t
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return t / math.sin(t)


def _sinh_over_x(t: float) -> float:
    if abs(t) < SMALL_MU:
        t2 = t * t
        return 1.0 + t2 / 6.0 + t2 * t2 / 120.0
    return math.sinh(t) / t


def k_temme_scaled(mu: float, x: float) -> tuple[float, float]:
    """Temme's series for K_mu, K_{mu+1} (|mu| <= 1/2, x <= 2), scaled by e^{x}."""
    mu2 = mu * mu
    x2 = 0.5 * x
    fact = _x_over_sin(math.pi * mu)
    d = -math.log(x2)
    e = mu * d
    fact2 = _sinh_over_x(e)
    gam1, gam2, gampl, gammi = _gamma_parts(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    ee = math.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = 1.0
    dd = x2 * x2
    total1 = p
    for i in range(1, MAX_ITER):
        ff = (i * ff + p + q) / (i * i - mu2)
        c *= dd / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * EPS:
            break
    else:
        raise ArithmeticError("Temme series did not converge")
    scale = math.exp(x)
    return total * scale, total1 * (2.0 / x) * scale


def k_steed_scaled(mu: float, x: float) -> tuple[float, float]:
    """Steed's continued fraction for K_mu, K_{mu+1} (|mu| <= 1/2, x >= 2), scaled by e^{x}."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu2
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAX_ITER):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < EPS:
            break
    else:
        raise ArithmeticError("Steed continued fraction did not converge")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = k0 * (mu + x + 0.5 - h) / x
    return k0, k1


def k_asymptotic_scaled(nu: float, x: float) -> float:
    """Large-argument expansion e^{x} K_nu(x) ~ (pi/(2x))^{1/2} sum a_k / x^k."""
    return math.sqrt(math.pi / (2.0 * x)) * _hankel_terms(nu, x, 1.0)


def _recur_up(mu: float, nl: int, x: float, k0: float, k1: float) -> tuple[float, float]:
    xi2 = 2.0 / x
    for i in range(1, nl + 1):
        k0, k1 = k1, (mu + i) * xi2 * k1 + k0
        if not math.isfinite(k1):
            raise OverflowError("K recurrence overflowed")
    return k0, k1


def _k_pair_scaled(nu: float, x: float) -> tuple[float, float]:
    """e^{x} (K_nu(x), K_{nu+1}(x))."""
    if x >= _asymptotic_threshold(nu):
        return k_asymptotic_scaled(nu, x), k_asymptotic_scaled(nu + 1.0, x)
    nl, mu = _split_order(nu)
    if x <= TEMME_MAX_X:
        k0, k1 = k_temme_scaled(mu, x)
    else:
        k0, k1 = k_steed_scaled(mu, x)
    return _recur_up(mu, nl, x, k0, k1)


def _i_scaled(nu: float, x: float) -> float:
    if x <= max(2.0, 0.5 * nu):
        return i_series_scaled(nu, x)
    if x >= _asymptotic_threshold(nu):
        return i_asymptotic_scaled(nu, x)
    return i_wronskian_scaled(nu, x)


def _i_pair_scaled(nu: float, x: float) -> tuple[float, float]:
    if x >= _asymptotic_threshold(nu):
        return i_asymptotic_scaled(nu, x), i_asymptotic_scaled(nu + 1.0, x)
    if x <= max(2.0, 0.5 * nu):
        i0 = i_series_scaled(nu, x)
        if i0 == 0.0:
            return 0.0, 0.0
        return i0, i0 * i_ratio_cf(nu, x)
    r = i_ratio_cf(nu, x)
    k0, k1 = _k_pair_scaled(nu, x)
    i0 = 1.0 / (x * (k1 + r * k0))
    return i0, r * i0


# ---------------------------------------------------------------------------
# public scalar API


def bessel_ive(nu, x) -> float:
    """e^{-x} I_nu(x)."""
    nu, x = _check(nu, x)
    return _i_scaled(nu, x)


def bessel_kve(nu, x) -> float:
    """e^{x} K_nu(x)."""
    nu, x = _check(nu, x)
    return _k_pair_scaled(nu, x)[0]


def _unscale(v: float, x: float, what: str) -> float:
    if v == 0.0:
        return 0.0
    lg = math.log(v) + x
    if lg > 709.78:
        raise OverflowError(f"{what} exceeds the floating range; use the scaled variant")
    return math.exp(lg)


def bessel_i(nu, x) -> float:
    """I_nu(x); raises OverflowError when the value is not representable."""
    nu, x = _check(nu, x)
    return _unscale(_i_scaled(nu, x), x, f"I_{nu}({x})")


def bessel_k(nu, x) -> float:
    """K_nu(x); raises OverflowError when the value is not representable."""
    nu, x = _check(nu, x)
    v = _k_pair_scaled(nu, x)[0]
    if not math.isfinite(v):
        raise OverflowError(f"K_{nu}({x}) exceeds the floating range")
    return v * math.exp(-x)


@dataclass(frozen=True)
class ScaledBessel:
    """Scaled values at (nu, x): ive, kve and their x-derivatives on the same scale,
    i.e. ``ive_d = e^{-x} I_nu'(x)`` and ``kve_d = e^{x} K_nu'(x)``."""

    nu: float
    x: float
    ive: float
    kve: float
    ive_d: float
    kve_d: float


def bessel_scaled_all(nu, x) -> ScaledBessel:
    """All scaled quantities in one pass.

    Derivatives use I_nu' = I_{nu+1} + (nu/x) I_nu and K_nu' = -K_{nu+1} + (nu/x) K_nu.
    """
    nu, x = _check(nu, x)
    i0, i1 = _i_pair_scaled(nu, x)
    k0, k1 = _k_pair_scaled(nu, x)
    t = nu / x
    return ScaledBessel(nu, x, i0, k0, i1 + t * i0, -k1 + t * k0)


@dataclass(frozen=True)
class BesselEval:
    nu: float
    x: float
    value_i: float
    value_k: float
    deriv_i: float
    deriv_k: float

    @property
    def positive(self) -> bool:
        return self.value_i > 0 and self.value_k > 0

    @property
    def monotone(self) -> bool:
        return self.deriv_i >= 0 and self.deriv_k <= 0


def bessel_eval(nu, x) -> BesselEval:
    """Unscaled I, K and derivatives; overflow raises."""
    s = bessel_scaled_all(nu, x)
    ex = s.x
    if ex > 709.78 or not math.isfinite(s.kve):
        raise OverflowError(f"Bessel values at x={ex} exceed the floating range")
    up, down = math.exp(ex), math.exp(-ex)
    return BesselEval(s.nu, s.x, s.ive * up, s.kve * down, s.ive_d * up, s.kve_d * down)


def bessel_ip(nu, x) -> float:
    return bessel_eval(nu, x).deriv_i


def bessel_kp(nu, x) -> float:
    return bessel_eval(nu, x).deriv_k


def scaled_arrays(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``bessel_scaled_all`` over an array of arguments."""
    x = np.asarray(x, dtype=float)
    out = np.empty((4,) + x.shape)
    flat = x.ravel()
    vals = out.reshape(4, -1)
    for j, xv in enumerate(flat):
        s = bessel_scaled_all(nu, xv)
        vals[0, j], vals[1, j], vals[2, j], vals[3, j] = s.ive, s.kve, s.ive_d, s.kve_d
    return out[0], out[1], out[2], out[3]


def regime_i(nu: float, x: float) -> str:
    if x <= max(2.0, 0.5 * nu):
        return "series"
    if x >= _asymptotic_threshold(nu):
        return "asymptotic"
    return "wronskian"


def regime_k(nu: float, x: float) -> str:
    if x >= _asymptotic_threshold(nu):
        return "asymptotic"
    if x <= TEMME_MAX_X:
        return "temme"
    return "steed"


def k_scaled_by(method: str, nu: float, x: float) -> float:
    """Evaluate e^{x} K_nu(x) with a forced regime; used to test regime overlap."""
    nu, x = _check(nu, x)
    if method == "asymptotic":
        return k_asymptotic_scaled(nu, x)
    nl, mu = _split_order(nu)
    k0, k1 = (k_temme_scaled if method == "temme" else k_steed_scaled)(mu, x)
    return _recur_up(mu, nl, x, k0, k1)[0]


def i_scaled_by(method: str, nu: float, x: float) -> float:
    """Evaluate e^{-x} I_nu(x) with a forced regime; used to test regime overlap."""
    nu, x = _check(nu, x)
    return {
        "series": i_series_scaled,
        "wronskian": i_wronskian_scaled,
        "asymptotic": i_asymptotic_scaled,
    }[method](nu, x)
