"""Oscillation when D_c < 0 and the nonnegative source with no positive solution.

With w(s) = e^{s0 s} v(e^s) the radial resolvent equation becomes

    w'' = (k + lambda e^{(2-alpha)s}) w - g,    k = D_c,

and for k < 0 the potential stays below k/2 on a half line, where every
homogeneous solution oscillates.  A bump g placed where the variation of
parameters kernel is negative yields w(s*) < 0, i.e. no positive solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from sel_lab.params import OperatorParams

RTOL = 1e-10
ATOL = 1e-12
ZERO_TOL = 1e-8
DEFAULT_REACH = 40.0


class ConstructionFailure(ArithmeticError):
    pass


@dataclass
class OscillationRun:
    params: OperatorParams
    lam: float
    k: float
    rate: float
    m: float
    direction: int  # -1 integrate leftward (alpha < 2), +1 rightward (alpha > 2)
    s_far: float | None = None
    s: np.ndarray | None = field(default=None, repr=False)
    trajectory: np.ndarray | None = field(default=None, repr=False)  # rows: u1, u1', u2, u2'
    sign_changes: list = field(default_factory=list)
    sign_changes_u2: list = field(default_factory=list)
    wronskian: np.ndarray | None = field(default=None, repr=False)
    dense: object = field(default=None, repr=False)
    # counterexample
    s_star: float | None = None
    window: tuple | None = None
    witness_value: float | None = None
    witness_check: float | None = None
    g_mass: float | None = None

    def potential(self, s):
        return self.k + self.lam * np.exp(self.rate * np.asarray(s, dtype=float))

    def solutions(self, s):
        """(u1, u2) at s from the dense ODE output."""
        y = self.dense(np.asarray(s, dtype=float))
        return y[0], y[2]

    def kernel(self, s, t):
        """G(s, t) = u1(t) u2(s) - u1(s) u2(t)."""
        u1s, u2s = self.solutions(s)
        u1t, u2t = self.solutions(t)
        return u1t * u2s - u1s * u2t

    def zero_spacings(self) -> np.ndarray:
        z = np.sort(np.asarray(self.sign_changes))
        return np.diff(z)

    def g(self, t):
        """Unit-mass C^2 bump (1 - tau^2)^3 on the selected window."""
        a, b = self.window
        t = np.asarray(t, dtype=float)
        tau = (2 * t - (a + b)) / (b - a)
        out = np.where(np.abs(tau) < 1, (1 - tau**2) ** 3, 0.0)
        return out / self.g_mass

    def phi(self, r):
        """Source in the original variable, phi(r) = g(log r) r^{alpha - 3/2}."""
        r = np.asarray(r, dtype=float)
        alpha = float(self.params.alpha)
        return self.g(np.log(r)) * r ** (alpha - 1.5)


def transform(params: OperatorParams, lam: float, allow_nonoscillatory: bool = False) -> OscillationRun:
    """Coefficients k = D_c, rate 2 - alpha and the threshold m of the potential."""
    alpha = float(params.alpha)
    if alpha == 2.0:
        raise ValueError("the oscillation transform needs alpha != 2")
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    k = float(params.discriminant)
    if k >= 0 and not allow_nonoscillatory:
        raise ValueError(f"D_c = {k} >= 0: no oscillation")
    rate = 2.0 - alpha
    # k + lambda e^{rate s} <= k/2 on s <= m (alpha < 2) or s >= m (alpha > 2)
    m = math.log(-k / (2.0 * lam)) / rate if k < 0 else 0.0
    return OscillationRun(params, lam, k, rate, m, -1 if alpha < 2 else 1)


def integrate_homogeneous(run: OscillationRun, s_far: float | None = None, samples: int = 4000) -> OscillationRun:
    """Integrate zeta'' = (k + lambda e^{rate s}) zeta from m into the oscillatory half line.

    u1(m) = 0, u1'(m) = 1 and u2(m) = 1, u2'(m) = 0, so u1' u2 - u1 u2' = 1.
    """
    if s_far is None:
        s_far = run.direction * DEFAULT_REACH
    if (s_far - run.m) * run.direction <= 0:
        raise ValueError("s_far must lie on the oscillatory side of m")
    k, lam, rate = run.k, run.lam, run.rate

    def rhs(s, y):
        q = k + lam * math.exp(rate * s)
        return [y[1], q * y[0], y[3], q * y[2]]

    sol = solve_ivp(rhs, (run.m, s_far), [0.0, 1.0, 1.0, 0.0], method="RK45", rtol=RTOL, atol=ATOL, dense_output=True)
    if not sol.success:
        raise ConstructionFailure(f"integrator failed: {sol.message}")
    s = np.linspace(min(run.m, s_far), max(run.m, s_far), samples)
    y = sol.sol(s)
    run.s_far = s_far
    run.s = s
    run.trajectory = y
    run.dense = sol.sol
    run.wronskian = y[1] * y[2] - y[0] * y[3]
    run.sign_changes = _zeros(sol.sol, s, y[0], 0)
    run.sign_changes_u2 = _zeros(sol.sol, s, y[2], 2)
    return run


def _zeros(dense, s, v, row) -> list[float]:
    out = []
    for i in np.nonzero(v[:-1] * v[1:] < 0)[0]:
        out.append(brentq(lambda x: float(dense(x)[row]), s[i], s[i + 1], xtol=ZERO_TOL * 1e-2))
    # exact zeros at sample points (other than the start) also count
    for i in np.nonzero(v == 0)[0]:
        if 0 < i < len(s) - 1 and v[i - 1] * v[i + 1] < 0:
            out.append(float(s[i]))
    return sorted(out)


def build_counterexample(run: OscillationRun, s_star: float | None = None, quad_nodes: int = 2001) -> OscillationRun:
    """Place a C^2 bump where the kernel is negative and evaluate w(s*).

    For alpha < 2, w(s) = int_{-inf}^s G(s,t) g(t) dt; for alpha > 2,
    w(s) = -int_s^inf G(s,t) g(t) dt.  Both solve w'' = Q w - g and vanish on
    the far side, so w(s*) < 0 rules out a nonnegative solution.
    """
    if run.dense is None:
        integrate_homogeneous(run)
    if run.k >= 0:
        raise ConstructionFailure("no oscillation for D_c >= 0")
    d = run.direction
    s_star = run.m + d * 1.0 if s_star is None else float(s_star)
    # t-range on the far side of s*
    ts = np.linspace(s_star, run.s_far, 8000) if d > 0 else np.linspace(run.s_far, s_star, 8000)
    sign = 1.0 if d < 0 else -1.0  # w(s*) = sign * int G(s*,t) g(t) dt over the far side
    K = sign * run.kernel(s_star, ts)
    neg = K < 0
    # maximal runs of negativity strictly away from s*
    windows = []
    i = 0
    n = len(ts)
    while i < n:
        if neg[i]:
            j = i
            while j + 1 < n and neg[j + 1]:
                j += 1
            if 0 < i and j < n - 1:
                windows.append((ts[i], ts[j]))
            i = j + 1
        else:
            i += 1
    if not windows:
        raise ConstructionFailure("no negative window of the kernel in the search box")
    a, b = min(windows, key=lambda w: abs(0.5 * (w[0] + w[1]) - s_star))
    shrink = 0.1 * (b - a)
    a, b = a + shrink, b - shrink
    run.window = (float(a), float(b))
    run.s_star = s_star
    run.g_mass = 1.0
    t = np.linspace(a, b, quad_nodes)
    raw = run.g(t)
    run.g_mass = float(np.trapezoid(raw, t))
    gv = run.g(t)
    Kt = sign * run.kernel(s_star, t)
    run.witness_value = float(np.trapezoid(Kt * gv, t))
    run.witness_check = _direct_witness(run)
    return run


def _direct_witness(run: OscillationRun) -> float:
    """w(s*) from integrating w'' = Q w - g with zero data on the far side of the bump."""
    a, b = run.window
    start, end = (a, run.s_star) if run.direction < 0 else (b, run.s_star)
    k, lam, rate = run.k, run.lam, run.rate

    def rhs(s, y):
        q = k + lam * math.exp(rate * s)
        return [y[1], q * y[0] - float(run.g(s))]

    sol = solve_ivp(rhs, (start, end), [0.0, 0.0], method="RK45", rtol=RTOL, atol=1e-14, max_step=(b - a) / 50)
    if not sol.success:
        raise ConstructionFailure(f"direct integration failed: {sol.message}")
    return float(sol.y[0, -1])
