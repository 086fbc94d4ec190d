"""Radial resolvent  lambda u - L u = f  by a Green kernel and by finite differences.

Both methods work in s = log r.  With U(s) = u(e^s) and w = e^{s0 s} U the
equation becomes the Schroedinger form

    -w_ss + (D_c + lambda e^{(2-alpha)s}) w = e^{(2-alpha+s0)s} f,

whose centered three-point discretization is a symmetric tridiagonal M-matrix
when D_c >= 0 and lambda > 0.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from sel_lab.grid import RadialGridFunction, log_grid, smooth_bump
from sel_lab.params import OperatorParams, classify
from sel_lab.radial import RadialSolutionPair

__all__ = [
    "BoundaryMode",
    "DecayingBranch",
    "DirichletAnnulus",
    "Method",
    "NumericalFailure",
    "RadialGridFunction",
    "ResolventReport",
    "decay_probe",
    "fd_solve",
    "green_solve",
    "minimality_check",
]


class NumericalFailure(ArithmeticError):
    """Singular system, overflow, or other numerical breakdown."""


class MMatrixWarning(RuntimeWarning):
    pass


class Method(str, enum.Enum):
    GREEN = "Green"
    FINITE_DIFFERENCE = "FiniteDifference"
    ANNULUS_DIRICHLET = "AnnulusDirichlet"


class BoundaryMode:
    pass


@dataclass(frozen=True)
class _Decaying(BoundaryMode):
    def __repr__(self):
        return "DecayingBranch"


DecayingBranch = _Decaying()


@dataclass(frozen=True)
class DirichletAnnulus(BoundaryMode):
    """Zero Dirichlet data on |x| = eps and |x| = 1/eps."""

    eps: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError(f"annulus needs 0 < eps < 1, got {self.eps}")


@dataclass
class ResolventReport:
    lam: complex
    solution: RadialGridFunction
    method: Method
    norms: dict = field(default_factory=dict)
    discrepancy: float | None = None

    def weighted_norm(self, theta: float, p: float | None = None) -> float:
        alpha = self.solution.meta.get("alpha", 0.0)
        return self.solution.lp_norm(p, theta * (alpha - 2.0))


def _check_lambda(lam, allow_complex: bool):
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError("lambda must be finite")
    if lam.imag == 0:
        if lam.real <= 0:
            raise ValueError(f"lambda must have positive real part, got {lam}")
        return lam.real
    if not allow_complex:
        raise ValueError("the Green path takes real lambda > 0 only")
    if lam.real <= 0:
        raise ValueError(f"lambda must have positive real part, got {lam}")
    return lam


def _finish(params, f, values, lam, method, thetas):
    N, alpha, b, c = params.as_floats()
    meta = dict(f.meta)
    meta.update(alpha=alpha, lam=lam)
    sol = RadialGridFunction(f.r, values, f.N, f.p, meta)
    norms = {"p": sol.lp_norm()}
    for t in thetas:
        norms[f"theta={t:g}"] = sol.lp_norm(None, t * (alpha - 2.0))
    return ResolventReport(lam, sol, method, norms)


# ---------------------------------------------------------------------------
# Green kernel


def _branches(params: OperatorParams, lam: float, r: np.ndarray):
    """zeta (increasing in s), scaled regular/decaying factors and the kernel constant.

    phi0(r) = r^{-s0} e^{zeta} v0  (admissible at r -> 0)
    phiinf(r) = r^{-s0} e^{-zeta} vinf  (admissible at r -> inf)
    and -p W(phi0, phiinf) = const with p = r^{N-1+c}.
    """
    N, alpha, b, c = params.as_floats()
    D = float(params.discriminant)
    s = np.log(r)
    if alpha == 2.0:
        mu = math.sqrt(D + lam)
        one = np.ones_like(r)
        return mu * s, one, one, 2.0 * mu
    pair = RadialSolutionPair(params, lam)
    S = pair.sample(r)
    const = abs(2.0 - alpha) / 2.0
    if alpha < 2:
        return S.z, S.ive, S.kve, const
    return -S.z, S.kve, S.ive, const


def _cumulative_weighted(y: np.ndarray, zeta: np.ndarray, h: float) -> np.ndarray:
    """A_i = e^{-zeta_i} int_{s_0}^{s_i} e^{zeta} y ds by a fourth-order panel rule.

    Each panel [s_i, s_{i+1}] uses h/24 (-y_{i-1} + 13 y_i + 13 y_{i+1} - y_{i+2})
    on the rescaled integrand e^{zeta - zeta_{i+1}} y; end panels fall back to
    the trapezoid rule.
    """
    n = y.size
    A = np.zeros(n, dtype=np.result_type(y, float))
    for i in range(n - 1):
        ref = zeta[i + 1]
        yi = y[i] * math.exp(zeta[i] - ref)
        yj = y[i + 1]
        if 1 <= i <= n - 3:
            ym = y[i - 1] * math.exp(zeta[i - 1] - ref)
            yp = y[i + 2] * math.exp(zeta[i + 2] - ref)
            panel = h / 24.0 * (-ym + 13.0 * yi + 13.0 * yj - yp)
        else:
            panel = 0.5 * h * (yi + yj)
        A[i + 1] = A[i] * math.exp(zeta[i] - ref) + panel
    return A


def green_solve(params: OperatorParams, lam, f: RadialGridFunction, thetas=()) -> ResolventReport:
    """Variation of parameters with the admissible branches at 0 and infinity.

    u(r) = [phiinf(r) int_0^r phi0 g + phi0(r) int_r^inf phiinf g] / (-p W),
    with g = rho^{N-1+c-alpha} f and dr = r ds.
    """
    lam = _check_lambda(lam, allow_complex=False)
    N, alpha, b, c = params.as_floats()
    D = float(params.discriminant)
    if alpha != 2 and D < 0:
        raise ValueError(f"D_c = {D} < 0: no positive Green kernel")
    r = f.r
    h = f.h
    F = np.asarray(f.values)
    if not np.any(F):
        return _finish(params, f, np.zeros_like(F, dtype=float), lam, Method.GREEN, thetas)
    zeta, v0, vinf, K = _branches(params, lam, r)
    s0 = float(params.s0)
    g = r ** (N - 1 + c - alpha) * F * r  # includes dr = r ds
    with np.errstate(over="raise", invalid="raise"):
        try:
            left = _cumulative_weighted(r ** (-s0) * v0 * g, zeta, h)
            right = _cumulative_weighted((r ** (-s0) * vinf * g)[::-1], -zeta[::-1], h)[::-1]
            u = r ** (-s0) * (vinf * left + v0 * right) / K
        except FloatingPointError as exc:
            raise NumericalFailure(f"Green quadrature overflowed: {exc}") from exc
    if not np.all(np.isfinite(u)):
        raise NumericalFailure("Green quadrature produced non-finite values")
    return _finish(params, f, u, lam, Method.GREEN, thetas)


# ---------------------------------------------------------------------------
# finite differences


def _robin_slopes(params: OperatorParams, lam, s_left: float, s_right: float) -> tuple[complex, complex]:
    """w'/w of the admissible branch at both ends of the s-window.

    Real lambda and D_c >= 0: exact Bessel log-derivatives.  Otherwise the
    power end uses the small-z expansion kappa (nu + z^2/(2(nu+1))) and the
    exponential end the WKB slope -+sqrt(Q) - Q'/(4Q), Q = D_c + lambda e^{(2-alpha)s}.
    """
    N, alpha, b, c = params.as_floats()
    D = float(params.discriminant)
    if alpha == 2.0:
        q = np.sqrt(complex(D + lam))
        return _real_if_possible(q), _real_if_possible(-q)
    kappa = (2.0 - alpha) / 2.0
    if isinstance(lam, float) and D >= 0:
        pair = RadialSolutionPair(params, lam)
        S = pair.sample(np.exp([s_left, s_right]))
        zl, zr = S.z
        if alpha < 2:
            return float(kappa * zl * S.beta_i[0]), float(kappa * zr * S.beta_k[1])
        return float(kappa * zl * S.beta_k[0]), float(kappa * zr * S.beta_i[1])
    nu = 2.0 * np.sqrt(complex(D)) / abs(2.0 - alpha)

    def power_end(s):
        z2 = (2.0 / abs(2.0 - alpha)) ** 2 * lam * math.exp((2.0 - alpha) * s)
        return kappa * (nu + z2 / (2.0 * (nu + 1.0)))

    def wkb(s, sign):
        e = lam * math.exp((2.0 - alpha) * s)
        Q = D + e
        dQ = (2.0 - alpha) * e
        return sign * np.sqrt(complex(Q)) - dQ / (4.0 * Q)

    if alpha < 2:
        return _real_if_possible(power_end(s_left)), _real_if_possible(wkb(s_right, -1.0))
    return _real_if_possible(wkb(s_left, 1.0)), _real_if_possible(power_end(s_right))


def _real_if_possible(x):
    x = complex(x)
    return x.real if x.imag == 0 else x


def _tridiag_solve(diag, lower, upper, rhs, lam):
    ab = np.zeros((3, diag.size), dtype=np.result_type(diag, rhs))
    ab[0, 1:] = upper
    ab[1] = diag
    ab[2, :-1] = lower
    try:
        return solve_banded((1, 1), ab, rhs)
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"singular finite-difference system at lambda={lam}: {exc}") from exc


def fd_system(params: OperatorParams, lam, s: np.ndarray, robin=None):
    """Banded pieces (diag, lower, upper) and the potential Q of the w-equation on ``s``.

    ``robin`` = (sigma_left, sigma_right) closes the system with ghost nodes;
    None gives homogeneous Dirichlet data just outside the node range.
    """
    N, alpha, b, c = params.as_floats()
    D = float(params.discriminant)
    h = float(s[1] - s[0])
    n = s.size
    Q = D + lam * np.exp((2.0 - alpha) * s)
    ih2 = 1.0 / (h * h)
    diag = 2.0 * ih2 + Q
    lower = np.full(n - 1, -ih2, dtype=diag.dtype)
    upper = np.full(n - 1, -ih2, dtype=diag.dtype)
    if robin is not None:
        sl, sr = robin
        dtype = np.result_type(diag, np.asarray(sl), np.asarray(sr))
        diag = diag.astype(dtype)
        lower = lower.astype(dtype)
        upper = upper.astype(dtype)
        diag[0] += 2.0 * h * sl * ih2
        diag[-1] -= 2.0 * h * sr * ih2
        upper[0] = -2.0 * ih2
        lower[-1] = -2.0 * ih2
    return diag, lower, upper, Q


def fd_solve(
    params: OperatorParams, lam, f: RadialGridFunction, bc_mode: BoundaryMode = DecayingBranch, thetas=()
) -> ResolventReport:
    """Second-order centered differences for the w-equation on the log grid of ``f``."""
    lam = _check_lambda(lam, allow_complex=True)
    N, alpha, b, c = params.as_floats()
    D = float(params.discriminant)
    s = f.s
    h = f.h
    s0 = float(params.s0)
    F = np.asarray(f.values)
    G = np.exp((2.0 - alpha + s0) * s) * F
    u = np.zeros(s.size, dtype=np.result_type(F, lam, float))
    if isinstance(bc_mode, DirichletAnnulus):
        lo = int(np.argmin(np.abs(s - math.log(bc_mode.eps))))
        hi = int(np.argmin(np.abs(s + math.log(bc_mode.eps))))
        if lo == 0 or hi == s.size - 1 or hi - lo < 3:
            raise ValueError(f"annulus eps={bc_mode.eps} does not fit inside the grid")
        # nodes lo and hi carry the Dirichlet data
        diag, lower, upper, Q = fd_system(params, lam, s[lo + 1 : hi])
        if np.isrealobj(Q) and np.any(Q < 0):
            warnings.warn(
                "potential D_c + lambda e^{(2-alpha)s} is negative somewhere; "
                "the difference matrix is not an M-matrix and positivity is not guaranteed",
                MMatrixWarning,
                stacklevel=2,
            )
        w = _tridiag_solve(diag, lower, upper, G[lo + 1 : hi], lam)
        u[lo + 1 : hi] = np.exp(-s0 * s[lo + 1 : hi]) * w
        method = Method.ANNULUS_DIRICHLET
    elif bc_mode is DecayingBranch:
        if alpha != 2 and D < 0:
            raise ValueError(f"D_c = {D} < 0: no decaying branch")
        robin = _robin_slopes(params, lam, float(s[0]), float(s[-1]))
        diag, lower, upper, Q = fd_system(params, lam, s, robin)
        w = _tridiag_solve(diag, lower, upper, G.astype(diag.dtype), lam)
        u = np.exp(-s0 * s) * w
        method = Method.FINITE_DIFFERENCE
    else:
        raise TypeError(f"unknown boundary mode {bc_mode!r}")
    if not np.all(np.isfinite(u)):
        raise NumericalFailure(f"finite-difference solve produced non-finite values at lambda={lam}")
    return _finish(params, f, u, lam, method, thetas)


def relative_lp_gap(a: RadialGridFunction, b: RadialGridFunction, p: float | None = None) -> float:
    den = b.lp_norm(p)
    diff = a.with_values(a.values - b.values).lp_norm(p)
    return diff / den if den > 0 else diff


def solve_both(params: OperatorParams, lam: float, f: RadialGridFunction, thetas=()):
    """Run the Green and FD paths and record their relative L^p discrepancy on both reports."""
    g = green_solve(params, lam, f, thetas)
    d = fd_solve(params, lam, f, DecayingBranch, thetas)
    gap = relative_lp_gap(d.solution, g.solution)
    g.discrepancy = d.discrepancy = gap
    return g, d


# ---------------------------------------------------------------------------
# probes


def default_bump(r: np.ndarray, a: float = 1.0, b: float = 2.0) -> np.ndarray:
    return smooth_bump(np.log(r), math.log(a), math.log(b))


@dataclass
class DecayFit:
    theta: float
    lambdas: list
    norms: list
    slope: float
    target: float

    @property
    def passed(self) -> bool:
        return self.slope <= self.target + 0.05


def decay_probe(params: OperatorParams, p: float, theta: float, lambda_list, f_profile=None, n: int | None = None) -> DecayFit:
    """Fit the slope of log || |x|^{theta(alpha-2)} u_lambda ||_p against log lambda.

    The data are the L^p-normalized dilations f(lambda^{1/(2-alpha)} r) of a fixed
    bump, the family on which the weighted resolvent bound is attained, so the
    expected slope is -(1-theta).
    """
    N, alpha, b, c = params.as_floats()
    if alpha == 2.0:
        raise ValueError("decay_probe needs alpha != 2")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    lams = [float(x) for x in lambda_list]
    if len(lams) < 2 or any(x <= 0 for x in lams) or any(np.diff(lams) <= 0):
        raise ValueError("lambda_list must be an increasing list of positive reals (at least two)")
    s, r = log_grid(alpha, n or 4000)
    prof = f_profile or default_bump
    norms = []
    for lam in lams:
        t = lam ** (1.0 / (2.0 - alpha))
        fv = prof(t * r)
        f = RadialGridFunction(r, fv, N, p)
        f = f.with_values(fv / f.lp_norm())
        rep = fd_solve(params, lam, f)
        norms.append(rep.solution.lp_norm(p, theta * (alpha - 2.0)))
    slope = float(np.polyfit(np.log(lams), np.log(norms), 1)[0])
    return DecayFit(theta, lams, norms, slope, -(1.0 - theta))


@dataclass
class MinimalityReport:
    epsilons: list
    monotone: bool
    max_violation: float
    gaps: list
    converged: bool
    solutions: list = field(repr=False, default_factory=list)
    limit: RadialGridFunction | None = field(repr=False, default=None)


def minimality_check(
    params: OperatorParams,
    p: float,
    lam: float,
    f: RadialGridFunction,
    epsilon_list,
    slack: float = 1e-10,
    tol: float = 1e-4,
) -> MinimalityReport:
    """Annulus solutions u_eps increase as eps decreases and converge to the decaying-branch solution."""
    if not classify(params, p).generates:
        raise ValueError(f"no realization of L generates in L^{p} for {params}")
    eps = [float(e) for e in epsilon_list]
    if any(np.diff(eps) >= 0):
        raise ValueError("epsilon_list must be strictly decreasing")
    if np.any(np.asarray(f.values) < 0):
        raise ValueError("minimality needs f >= 0")
    sols = [fd_solve(params, lam, f, DirichletAnnulus(e)).solution for e in eps]
    limit = fd_solve(params, lam, f).solution
    worst = 0.0
    for a, b_ in zip(sols, sols[1:]):
        worst = max(worst, float(np.max(np.real(a.values) - np.real(b_.values))))
    gaps = [relative_lp_gap(sv, limit, p) for sv in sols]
    return MinimalityReport(eps, worst <= slack, worst, gaps, gaps[-1] <= tol, sols, limit)
