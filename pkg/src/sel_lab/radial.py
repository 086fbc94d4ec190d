"""Exact radial solutions of  lambda u - r^alpha (u'' + (N-1+c) u'/r - b u/r^2) = 0.

With s0 = (N-2+c)/2, nu = 2 sqrt(D_c)/|2-alpha| and z(r) = (2/|2-alpha|) sqrt(lambda) r^{(2-alpha)/2},

    u1(r) = r^{-s0} I_nu(z(r)),    u2(r) = r^{-s0} K_nu(z(r))

are positive solutions.  Everything is evaluated through the exponentially
scaled Bessel values so that logs and ratios stay finite where u1 or u2 would
overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from sel_lab.grid import RadialGridFunction
from sel_lab.params import OperatorParams
from sel_lab.specfun import scaled_arrays


class Region(str, enum.Enum):
    NEAR_ZERO = "NearZero"
    NEAR_INFINITY = "NearInfinity"


@dataclass(frozen=True)
class AsymptoticDescriptor:
    """u(r) ~ const * r^power * |log r|^(1 if log_factor) * exp(exp_rate * r^kappa) in ``region``.

    ``kappa`` = (2-alpha)/2; ``exp_rate`` is zero for pure power behavior.
    """

    solution: str
    region: Region
    power_exponent: float
    log_factor: bool
    exp_rate: float
    kappa: float


@dataclass(frozen=True)
class ScaledSample:
    """Scaled values on an array of radii: u1 = r^{-s0} e^{z} ive, u2 = r^{-s0} e^{-z} kve."""

    r: np.ndarray
    z: np.ndarray
    ive: np.ndarray
    kve: np.ndarray
    ive_d: np.ndarray
    kve_d: np.ndarray

    @property
    def beta_i(self) -> np.ndarray:
        """I'(z)/I(z)."""
        return self.ive_d / self.ive

    @property
    def beta_k(self) -> np.ndarray:
        """K'(z)/K(z)."""
        return self.kve_d / self.kve


class RadialSolutionPair:
    """The pair u1, u2 for given parameters and lambda > 0."""

    def __init__(self, params: OperatorParams, lam: float):
        N, alpha, b, c = params.as_floats()
        if alpha == 2.0:
            raise ValueError("alpha = 2 has power solutions; the Bessel pair needs alpha != 2")
        D = float(params.discriminant)
        if D < 0:
            raise ValueError(f"D_c = {D} < 0: no positive radial solutions (oscillatory regime)")
        lam = float(lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise ValueError(f"lambda must be a positive real, got {lam}")
        self.params = params
        self.lam = lam
        self.N, self.alpha, self.b, self.c = N, alpha, b, c
        self.D = D
        self.s0 = float(params.s0)
        self.kappa = (2.0 - alpha) / 2.0
        self.A = 2.0 / abs(2.0 - alpha)
        self.nu = self.A * math.sqrt(D)
        self.gamma = 2.0 / (2.0 - alpha)
        # Eq. constant c = ((2-alpha)^2/(4 lambda))^{1/(2-alpha)}: r = c t^gamma maps to the Bessel variable
        self.scaling_constant = ((2.0 - alpha) ** 2 / (4.0 * lam)) ** (1.0 / (2.0 - alpha))

    # -- sampling ------------------------------------------------------------

    def z(self, r):
        return self.A * math.sqrt(self.lam) * np.asarray(r, dtype=float) ** self.kappa

    def sample(self, r) -> ScaledSample:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        z = self.z(r)
        ive, kve, ive_d, kve_d = scaled_arrays(self.nu, z)
        return ScaledSample(r, z, ive, kve, ive_d, kve_d)

    def log_u1(self, r) -> np.ndarray:
        S = self.sample(r)
        return -self.s0 * np.log(S.r) + S.z + np.log(S.ive)

    def log_u2(self, r) -> np.ndarray:
        S = self.sample(r)
        return -self.s0 * np.log(S.r) - S.z + np.log(S.kve)

    def u1(self, r) -> np.ndarray:
        with np.errstate(over="raise"):
            return np.exp(self.log_u1(r))

    def u2(self, r) -> np.ndarray:
        with np.errstate(over="raise"):
            return np.exp(self.log_u2(r))

    def dlog_u1(self, r) -> np.ndarray:
        """u1'/u1."""
        S = self.sample(r)
        return (-self.s0 + self.kappa * S.z * S.beta_i) / S.r

    def dlog_u2(self, r) -> np.ndarray:
        """u2'/u2."""
        S = self.sample(r)
        return (-self.s0 + self.kappa * S.z * S.beta_k) / S.r

    def du1(self, r) -> np.ndarray:
        return self.u1(r) * self.dlog_u1(r)

    def du2(self, r) -> np.ndarray:
        return self.u2(r) * self.dlog_u2(r)

    def relative_residual(self, r, which: str = "u2") -> np.ndarray:
        """|lambda u - r^alpha(u'' + (N-1+c)u'/r - b u/r^2)| / (lambda |u|), computed analytically.

        The second derivative uses the Bessel equation for the inner function, so
        this checks the change of variables (exponent s0, order nu, argument constant).
        """
        S = self.sample(r)
        r = S.r
        z = S.z
        beta = S.beta_i if which == "u1" else S.beta_k
        k = self.kappa
        nu = self.nu
        # phi = log u = -s0 log r + log B(z)
        zp = k * z / r
        zpp = k * (k - 1.0) * z / r**2
        dbeta = 1.0 + nu * nu / z**2 - beta / z - beta**2
        phi1 = -self.s0 / r + beta * zp
        phi2 = self.s0 / r**2 + dbeta * zp**2 + beta * zpp
        upp_over_u = phi2 + phi1**2
        Lu = r**self.alpha * (upp_over_u + (self.N - 1 + self.c) * phi1 / r - self.b / r**2)
        return np.abs(self.lam - Lu) / self.lam

    def abel_constant(self, r) -> np.ndarray:
        """r^{N-1+c} W(u1, u2)(r), constant (= -kappa) by Abel's identity; computed in scaled form."""
        S = self.sample(r)
        r = S.r
        w_scaled = S.ive * S.kve_d - S.ive_d * S.kve  # e^{-z}I * e^{z}K' - ...
        return r ** (self.N - 1 + self.c) * r ** (-2 * self.s0) * w_scaled * self.kappa * S.z / r

    # -- asymptotics -----------------------------------------------------------

    def asymptotics(self) -> list[AsymptoticDescriptor]:
        return asymptotics(self)


def build_pair(params: OperatorParams, lam: float) -> RadialSolutionPair:
    return RadialSolutionPair(params, lam)


def asymptotics(pair: RadialSolutionPair) -> list[AsymptoticDescriptor]:
    """Leading behavior of u1, u2 near 0 and near infinity.

    Where z -> 0 (r -> 0 for alpha < 2, r -> inf for alpha > 2) the solutions are
    powers: u1 ~ r^{-s0 + kappa nu}, u2 ~ r^{-s0 - kappa nu} (times |log r| when
    nu = 0).  Where z -> inf both carry r^{-s0 - kappa/2} and exp(+-A sqrt(lambda) r^kappa).
    With alpha > 2 the regions trade places and kappa < 0 flips which root
    appears, so u2 ~ r^{-s1} and u1 ~ r^{-s2} at infinity.
    """
    k = pair.kappa
    rate = pair.A * math.sqrt(pair.lam)
    small, large = (Region.NEAR_ZERO, Region.NEAR_INFINITY) if k > 0 else (Region.NEAR_INFINITY, Region.NEAR_ZERO)
    critical = pair.nu == 0.0
    pw = k * pair.nu
    exp_power = -pair.s0 - k / 2.0
    return [
        AsymptoticDescriptor("u1", small, -pair.s0 + pw, False, 0.0, k),
        AsymptoticDescriptor("u2", small, -pair.s0 - pw, critical, 0.0, k),
        AsymptoticDescriptor("u1", large, exp_power, False, rate, k),
        AsymptoticDescriptor("u2", large, exp_power, False, -rate, k),
    ]


def find_descriptor(descs, solution: str, region) -> AsymptoticDescriptor:
    region = Region(region)
    for d in descs:
        if d.solution == solution and d.region is region:
            return d
    raise KeyError((solution, region))


def weighted_lp_membership(
    desc: AsymptoticDescriptor, N: int, p: float, weight_power: float = 0.0, log_power: float = 0.0
) -> bool:
    """Is r^{weight_power} |log r|^{log_power} u(r) in L^p(r^{N-1} dr) on the descriptor's region?

    Exponential decay wins over any power and exponential growth forbids
    membership.  Otherwise the power q = p(power + weight) + N - 1 decides
    (q > -1 near 0, q < -1 near infinity) and at q = -1 the log criterion
    int r^{-1} |log r|^sigma dr < inf  iff  sigma < -1  applies exactly.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if desc.exp_rate > 0:
        return False
    if desc.exp_rate < 0:
        return True
    q = p * (desc.power_exponent + weight_power) + N - 1
    sigma = p * (log_power + (1.0 if desc.log_factor else 0.0))
    tol = 1e-12 * max(1.0, abs(q))
    if abs(q + 1.0) <= tol:
        return sigma < -1.0
    if desc.region is Region.NEAR_ZERO:
        return q > -1.0
    return q < -1.0


def apply_operator(params: OperatorParams, g: RadialGridFunction) -> RadialGridFunction:
    """r^alpha (g'' + (N-1+c) g'/r - b g/r^2) at interior nodes of a log-uniform grid.

    In s = log r this is r^{alpha-2}(G_ss + (N-2+c) G_s - b G); both derivatives
    use fourth-order centered five-point stencils, so two nodes are lost at each end.
    """
    n = g.r.size
    if n < 5:
        raise ValueError(f"grid too short for the five-point stencil ({n} < 5 nodes)")
    h = g.h
    N, alpha, b, c = params.as_floats()
    G = g.values
    d1 = (G[:-4] - 8 * G[1:-3] + 8 * G[3:-1] - G[4:]) / (12 * h)
    d2 = (-G[:-4] + 16 * G[1:-3] - 30 * G[2:-2] + 16 * G[3:-1] - G[4:]) / (12 * h * h)
    r = g.r[2:-2]
    out = r ** (alpha - 2) * (d2 + (N - 2 + c) * d1 - b * G[2:-2])
    return RadialGridFunction(r, out, g.N, g.p, dict(g.meta))


def power_eigenvalue(params: OperatorParams, s: float) -> float:
    """L r^{-s} = -f(s) r^{alpha-2-s}: returns -f(s)."""
    N, alpha, b, c = params.as_floats()
    return -(b + s * (N - 2 + c - s))
