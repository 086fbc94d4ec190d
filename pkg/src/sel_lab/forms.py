"""Quadrature checks of the weighted L^p forms of L on separable test functions.

For u = g(r) Q(omega) with -Delta_S Q = n(n+N-2) Q the integrand of
int (-Lu) conj(u) |u|^{p-2} dx factors as a radial part times |Q|^p, and the
radial part is the n = 0 expression with b replaced by b + n(n+N-2).  All
integrals below are the radial factor (per unit int |Q|^p), computed in
s = log r where dx = r^N ds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from sel_lab.grid import smooth_bump, smooth_plateau
from sel_lab.params import OperatorParams, dissipativity_margin, f_eval, sectoriality_constant

REG_FACTOR = 1e-12
FORM_TOL = 1e-8
SUPPORT_PAD = 3


@dataclass
class TestFunction:
    """Profile g sampled on a uniform s-grid; harmonic order n; exponent p."""

    __test__ = False  # not a pytest class

    s: np.ndarray
    g: np.ndarray
    n: int = 0
    p: float = 2.0

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.g = np.asarray(self.g)
        if self.s.ndim != 1 or self.s.shape != self.g.shape or self.s.size < 2 * SUPPORT_PAD + 5:
            raise ValueError("profile and grid must be 1-D arrays of equal length (at least 11 nodes)")
        ds = np.diff(self.s)
        if not np.allclose(ds, ds[0], rtol=1e-9) or ds[0] <= 0:
            raise ValueError("s-grid must be uniform and increasing")
        if not np.all(np.isfinite(self.g)):
            raise ValueError("profile has non-finite values")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError("harmonic order must be a nonnegative integer")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        edge = np.concatenate([self.g[:SUPPORT_PAD], self.g[-SUPPORT_PAD:]])
        if np.any(np.abs(edge) > 1e-14 * max(1.0, float(np.abs(self.g).max()))):
            raise ValueError("profile support must lie strictly inside the grid")

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    def harmonic_shift(self, N: int) -> float:
        return float(self.n * (self.n + N - 2))


@dataclass
class FormReport:
    real_part: float
    imaginary_part: float
    lower_bound: float
    margin_used: float
    passed: bool
    scale: float = 1.0
    extra: dict = field(default_factory=dict)


def _derivatives(g: np.ndarray, h: float):
    """Fourth-order centered first and second derivatives; g vanishes near both ends."""
    G = np.concatenate([np.zeros(2, g.dtype), g, np.zeros(2, g.dtype)])
    d1 = (G[:-4] - 8 * G[1:-3] + 8 * G[3:-1] - G[4:]) / (12 * h)
    d2 = (-G[:-4] + 16 * G[1:-3] - 30 * G[2:-2] + 16 * G[3:-1] - G[4:]) / (12 * h * h)
    return d1, d2


def _minus_L(params: OperatorParams, tf: TestFunction) -> np.ndarray:
    """-r^{alpha-2} (g_ss + (N-2+c) g_s - (b + lambda_n) g)."""
    N, alpha, b, c = params.as_floats()
    d1, d2 = _derivatives(tf.g, tf.h)
    bn = b + tf.harmonic_shift(N)
    return -np.exp((alpha - 2.0) * tf.s) * (d2 + (N - 2.0 + c) * d1 - bn * tf.g)


def _power_factor(g: np.ndarray, p: float, regularize: bool = True) -> np.ndarray:
    """|g|^{p-2}, regularized as (|g|^2 + delta^2)^{(p-2)/2} with delta = 1e-12 max|g|."""
    a = np.abs(g)
    if not regularize:
        with np.errstate(divide="ignore"):
            return np.where(a > 0, a ** (p - 2.0), 0.0)
    d = REG_FACTOR * float(a.max()) if a.size else 0.0
    if d == 0.0:
        return np.zeros_like(a)
    return (a * a + d * d) ** ((p - 2.0) / 2.0)


def _integrate(values: np.ndarray, tf: TestFunction, N: int) -> complex:
    return np.trapezoid(values * np.exp(N * tf.s), tf.s)


def form_scale(params: OperatorParams, tf: TestFunction) -> float:
    """int r^{alpha-2} |g|^p dx, the natural size of the form."""
    N, alpha, b, c = params.as_floats()
    return float(_integrate(np.exp((alpha - 2.0) * tf.s) * np.abs(tf.g) ** tf.p, tf, params.N).real)


def dissipativity_form(params: OperatorParams, tf: TestFunction, regularize: bool = True) -> FormReport:
    """Re and Im of int (-Lu) conj(u) |u|^{p-2} dx; passes iff Re >= -1e-8 scale."""
    p = tf.p
    integrand = _minus_L(params, tf) * np.conj(tf.g) * _power_factor(tf.g, p, regularize)
    val = complex(_integrate(integrand, tf, params.N))
    scale = form_scale(params, tf)
    margin = float(dissipativity_margin(params, p))
    passed = val.real >= -FORM_TOL * scale
    extra = {"n": tf.n, "p": p}
    l_alpha = sectoriality_constant(params, p)
    if l_alpha is not None:
        extra["l_alpha"] = l_alpha
        extra["im_bound_ok"] = abs(val.imag) <= l_alpha * val.real + FORM_TOL * scale
    if regularize and p >= 2:
        raw = complex(_integrate(_minus_L(params, tf) * np.conj(tf.g) * _power_factor(tf.g, p, False), tf, params.N))
        extra["regularization_gap"] = abs(raw - val) / max(scale, 1e-300)
    return FormReport(val.real, val.imag, 0.0, margin, bool(passed), scale, extra)


def weighted_coercivity(params: OperatorParams, p: float, tf: TestFunction) -> FormReport:
    """Re int (-Lu) V^{p-1} conj(u)|u|^{p-2} >= M ||V u||_p^p with V = r^{alpha-2}, M = f(N/p+alpha-2)."""
    N, alpha, b, c = params.as_floats()
    M = float(f_eval(params, N / p + alpha - 2.0))
    if not M > 0:
        raise ValueError(f"weighted coercivity needs f(N/p + alpha - 2) > 0, got {M}")
    if tf.p != p:
        tf = TestFunction(tf.s, tf.g, tf.n, p)
    V = np.exp((alpha - 2.0) * tf.s)
    lhs = complex(_integrate(_minus_L(params, tf) * V ** (p - 1.0) * np.conj(tf.g) * _power_factor(tf.g, p), tf, params.N))
    norm = float(_integrate((V * np.abs(tf.g)) ** p, tf, params.N).real)
    bound = M * norm
    passed = lhs.real >= bound - FORM_TOL * max(norm, 1e-300)
    ratio = lhs.real / bound if bound > 0 else math.nan
    return FormReport(lhs.real, lhs.imag, bound, M, bool(passed), norm, {"ratio": ratio})


# ---------------------------------------------------------------------------
# logarithmic Hardy inequality on the unit ball


@dataclass(frozen=True)
class LogProfile:
    """v(s) and dv/ds for s = log r <= 0, with v(0) = 0."""

    v: object
    dv: object
    label: str = ""
    breaks: tuple = ()


def log_hardy(p: float, profile: LogProfile, reach: float = -math.inf) -> FormReport:
    """int_{B_1} |x|^{2-N} grad v . grad(v|v|^{p-2}) >= ((p-1)/p^2) int_{B_1} |x|^{-N} |log|x||^{-2} |v|^p.

    In s = log r both sides lose their N dependence (per unit sphere area):
    the left side is (p-1) int |v|^{p-2} v_s^2 ds, the right side
    ((p-1)/p^2) int |v|^p s^{-2} ds, over s < 0.
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    v0 = float(profile.v(0.0))
    if abs(v0) > 1e-12:
        raise ValueError("profile must vanish at r = 1")
    xs = np.linspace(max(reach, -60.0), 0.0, 6001)
    vs = np.array([float(profile.v(x)) for x in xs])
    # zeros of v are integrable singularities of |v|^{p-2} for p < 2; adaptive
    # quadrature split at the zeros handles them without regularization
    zeros = [brentq(profile.v, xs[i], xs[i + 1]) for i in np.nonzero(vs[:-1] * vs[1:] < 0)[0]]

    def left(x):
        v = abs(float(profile.v(x)))
        if v == 0.0:
            return 0.0
        return (p - 1.0) * v ** (p - 2.0) * float(profile.dv(x)) ** 2

    def right(x):
        return abs(float(profile.v(x))) ** p / (x * x)

    pts = sorted({-30.0, -10.0, -3.0, -1.0, *profile.breaks, *zeros})
    lo = reach
    lhs, e1 = _quad_pieces(left, lo, pts)
    rhs, e2 = _quad_pieces(right, lo, pts)
    const = (p - 1.0) / p**2
    bound = const * rhs
    slack = e1 + const * e2 + 1e-12 * max(lhs, bound)
    passed = lhs >= bound - slack
    ratio = lhs / bound if bound > 0 else math.nan
    return FormReport(lhs, 0.0, bound, const, bool(passed), rhs, {"ratio": ratio, "quad_error": slack})


def _quad_pieces(fn, lo, pts) -> tuple[float, float]:
    """Adaptive quadrature over [lo, 0] split at ``pts``; returns (value, error estimate).

    Endpoint singularities of |v|^{p-2} at zeros of v can trip the extrapolation
    table's roundoff detector; the error estimate is kept and used as slack.
    """
    edges = [lo] + [x for x in pts if x > lo] + [0.0]
    total = err = 0.0
    for a, b in zip(edges, edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, e = quad(fn, a, b, limit=400, epsabs=1e-13, epsrel=1e-10)
        total += val
        err += e
    return total, err


def ramp_profile(r0: float = 0.5) -> LogProfile:
    """Radial v = 1 for r <= r0, linear down to 0 at r = 1 (a W^{1,inf} profile)."""

    def v(s):
        r = math.exp(s)
        return 1.0 if r <= r0 else (1.0 - r) / (1.0 - r0)

    def dv(s):
        r = math.exp(s)
        return 0.0 if r <= r0 else -r / (1.0 - r0)

    return LogProfile(v, dv, f"ramp(r0={r0})")


def near_optimizer_profile(p: float, eta: float, T: float = 50.0) -> LogProfile:
    """v = t^{(1+eta)/p} on t = -s in [0, T], cut off linearly on [T, 2T].

    With w = |v|^{p/2} = t^{(1+eta)/2} the one-dimensional Hardy ratio is
    (1+eta)^2 up to a cutoff term of relative size O(eta), so the ratio tends
    to 1 as eta -> 0.
    """
    q = (1.0 + eta) / p

    def v(s):
        t = -s
        cut = 1.0 if t <= T else max(0.0, 2.0 - t / T)
        return t**q * cut

    def dv(s):
        t = -s
        if t <= 0 or t >= 2 * T:
            return 0.0
        if t <= T:
            return -q * t ** (q - 1.0)
        return -(q * t ** (q - 1.0) * (2.0 - t / T) - t**q / T)

    return LogProfile(v, dv, f"near-optimizer(eta={eta}, T={T})", (-2 * T, -T))


def log_hardy_corpus(rng: np.random.Generator, count: int = 50) -> list[LogProfile]:
    """(1 - e^{beta s}) (a + b e^{-((s-mu)/sigma)^2} cos(omega s)), possibly sign changing."""
    out = []
    for i in range(count):
        beta = float(rng.uniform(0.3, 3.0))
        a = float(rng.choice([0.0, rng.uniform(0.1, 2.0)]))
        bb = float(rng.uniform(-2.0, 2.0))
        mu = float(rng.uniform(-8.0, -0.5))
        sig = float(rng.uniform(0.3, 3.0))
        om = float(rng.uniform(0.0, 3.0))
        out.append(_corpus_member(beta, a, bb, mu, sig, om, f"corpus[{i}]"))
    return out


def _corpus_member(beta, a, bb, mu, sig, om, label) -> LogProfile:
    def parts(s):
        ramp = -math.expm1(beta * s)
        dramp = -beta * math.exp(beta * s)
        x = (s - mu) / sig
        gauss = math.exp(-x * x)
        cs, sn = math.cos(om * s), math.sin(om * s)
        body = a + bb * gauss * cs
        dbody = bb * gauss * (-2.0 * x / sig * cs - om * sn)
        return ramp, dramp, body, dbody

    def v(s):
        ramp, _, body, _ = parts(s)
        return ramp * body

    def dv(s):
        ramp, dramp, body, dbody = parts(s)
        return dramp * body + ramp * dbody

    return LogProfile(v, dv, label)


# ---------------------------------------------------------------------------
# random draws and suites


def random_profile(rng: np.random.Generator, s: np.ndarray, complex_values: bool = True, lo=-4.0, hi=4.0) -> np.ndarray:
    """Sum of one to three smooth bumps in s with random (complex) amplitudes and phase winding."""
    g = np.zeros(s.size, dtype=complex if complex_values else float)
    for _ in range(int(rng.integers(1, 4))):
        c = float(rng.uniform(lo + 1.0, hi - 1.0))
        w = float(rng.uniform(0.5, 1.0))
        amp = rng.normal() + (1j * rng.normal() if complex_values else 0.0)
        bump = smooth_bump(s, c - w, c + w)
        if complex_values:
            bump = bump * np.exp(1j * float(rng.uniform(-2, 2)) * s)
        g = g + amp * bump
    return g


def default_s_grid(lo: float = -6.0, hi: float = 6.0, n: int = 2401) -> np.ndarray:
    return np.linspace(lo, hi, n)


def random_dissipative_params(rng: np.random.Generator, p: float) -> OperatorParams:
    """Parameters with f((N+alpha-2)/p) >= 0; every fourth draw sits exactly on the margin 0."""
    while True:
        N = int(rng.integers(1, 7))
        alpha = round(float(rng.uniform(-1.0, 4.0)), 2)
        c = round(float(rng.uniform(-1.5, 1.5)), 2)
        k = (N + alpha - 2.0) / p
        b_edge = -k * (N - 2.0 + c - k)
        b = b_edge if rng.uniform() < 0.25 else b_edge + float(rng.uniform(0.0, 3.0))
        P = OperatorParams(N, alpha, b, c)
        if float(dissipativity_margin(P, p)) >= 0.0:
            return P


def dissipativity_suite(seed: int = 0, draws: int = 200) -> list[FormReport]:
    rng = np.random.default_rng(seed)
    s = default_s_grid()
    out = []
    for _ in range(draws):
        p = float(rng.choice([1.25, 1.5, 2.0, 3.0, 4.5]))
        params = random_dissipative_params(rng, p)
        tf = TestFunction(s, random_profile(rng, s), int(rng.integers(0, 4)), p)
        rep = dissipativity_form(params, tf)
        rep.extra["params"] = params
        rep.extra["p"] = p
        out.append(rep)
    return out


def violation_profile(params: OperatorParams, p: float, delta: float, s_lo=-20.0, s_hi=20.0, n: int = 8001, ramp=2.0) -> TestFunction:
    """r^{-(N+alpha-2)/p + delta} on a long plateau with smooth cutoffs."""
    N, alpha, b, c = params.as_floats()
    s = np.linspace(s_lo, s_hi, n)
    k = (N + alpha - 2.0) / p
    cut = smooth_plateau(s, s_lo + 1.0, s_hi - 1.0, ramp)
    return TestFunction(s, np.exp((delta - k) * s) * cut, 0, p)


def violation_search(params: OperatorParams, p: float, deltas=(0.2, 0.1, 0.05, 0.02, 0.01, 0.0)) -> tuple[float, FormReport]:
    """Sweep delta toward 0; return the first delta with Re <= -1e-3 scale, or the most negative one."""
    best = None
    for d in deltas:
        rep = dissipativity_form(params, violation_profile(params, p, d))
        rel = rep.real_part / rep.scale
        rep.extra["relative"] = rel
        rep.extra["delta"] = d
        if best is None or rel < best[1].extra["relative"]:
            best = (d, rep)
        if rel <= -1e-3:
            return d, rep
    return best


def coercivity_suite(seed: int = 0, draws: int = 20) -> list[FormReport]:
    rng = np.random.default_rng(seed)
    s = default_s_grid()
    out = []
    while len(out) < draws:
        p = float(rng.choice([1.5, 2.0, 3.0]))
        N = int(rng.integers(1, 7))
        alpha = round(float(rng.uniform(-1.0, 4.0)), 2)
        c = round(float(rng.uniform(-1.5, 1.5)), 2)
        b = round(float(rng.uniform(-1.0, 4.0)), 2)
        params = OperatorParams(N, alpha, b, c)
        if not float(f_eval(params, N / p + alpha - 2.0)) > 0.05:
            continue
        tf = TestFunction(s, random_profile(rng, s), int(rng.integers(0, 3)), p)
        rep = weighted_coercivity(params, p, tf)
        rep.extra["params"] = params
        rep.extra["p"] = p
        out.append(rep)
    return out


def coercivity_near_optimizer(params: OperatorParams, p: float, half_width: float) -> FormReport:
    """Profile r^{-(N/p+alpha-2)} on a plateau of half-width ``half_width`` in s."""
    N, alpha, b, c = params.as_floats()
    L = half_width + 3.0
    s = np.linspace(-L, L, int(400 * L) + 1)
    k = N / p + alpha - 2.0
    g = np.exp(-k * s) * smooth_plateau(s, -half_width - 1.0, half_width + 1.0, 1.0)
    return weighted_coercivity(params, p, TestFunction(s, g, 0, p))


def log_hardy_suite(seed: int = 0, count: int = 50, ps=(1.5, 2.0, 3.0)) -> dict:
    rng = np.random.default_rng(seed)
    corpus = log_hardy_corpus(rng, count)
    return {p: [log_hardy(p, v) for v in corpus] for p in ps}


# ---------------------------------------------------------------------------
# interpolation inequality


@dataclass
class InterpolationReport:
    epsilons: list
    max_C: dict
    per_profile: list = field(repr=False, default_factory=list)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(v) for v in self.max_C.values())


def _interp_norms(params: OperatorParams, p: float, s: np.ndarray, g: np.ndarray) -> tuple[float, float, float]:
    """|| |x|^{alpha-1} grad u ||_p, || L u ||_p, || |x|^{alpha-2} u ||_p for radial u (per unit sphere)."""
    N, alpha, b, c = params.as_floats()
    tf = TestFunction(s, g, 0, p)
    d1, _ = _derivatives(g, tf.h)
    w = np.exp((alpha - 2.0) * s)  # r^{alpha-1} u_r = r^{alpha-2} u_s
    grad = _lp(w * d1, s, N, p)
    Lu = _lp(_minus_L(params, tf), s, N, p)
    low = _lp(w * g, s, N, p)
    return grad, Lu, low


def _lp(vals, s, N, p):
    return float(np.trapezoid(np.abs(vals) ** p * np.exp(N * s), s)) ** (1.0 / p)


def interpolation_corpus(rng: np.random.Generator, count: int = 50) -> list[tuple]:
    """Bump descriptors (center, half-width, amplitude) in s, one to three per profile."""
    out = []
    for _ in range(count):
        out.append(
            tuple(
                (float(rng.uniform(-3, 3)), float(rng.uniform(0.4, 1.5)), float(rng.normal()))
                for _ in range(int(rng.integers(1, 4)))
            )
        )
    return out


def corpus_profile(desc, s: np.ndarray, shift: float = 0.0) -> np.ndarray:
    g = np.zeros_like(s)
    for c, w, a in desc:
        g += a * smooth_bump(s, c + shift - w, c + shift + w)
    return g


def interpolation_probe(
    params: OperatorParams,
    p: float,
    corpus,
    epsilons=(0.3, 0.1, 0.03),
    s: np.ndarray | None = None,
    shift: float = 0.0,
) -> InterpolationReport:
    """Smallest C with || |x|^{alpha-1} grad u || <= eps ||Lu|| + (C/eps) || |x|^{alpha-2} u ||, per eps.

    ``shift`` translates every profile in s, i.e. dilates the corpus by e^{-shift}.
    """
    s = np.linspace(-8.0, 8.0, 3201) if s is None else s
    rows = []
    maxc = {float(e): 0.0 for e in epsilons}
    for desc in corpus:
        g = corpus_profile(desc, s, shift)
        grad, Lu, low = _interp_norms(params, p, s, g)
        row = {}
        for e in epsilons:
            C = e * max(0.0, grad - e * Lu) / low if low > 0 else 0.0
            row[float(e)] = C
            maxc[float(e)] = max(maxc[float(e)], C)
        rows.append(row)
    return InterpolationReport([float(e) for e in epsilons], maxc, rows)
