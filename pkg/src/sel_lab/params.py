"""Parameter algebra and generation classifier for

    L = |x|^alpha Lap + c |x|^(alpha-1) (x/|x|).grad - b |x|^(alpha-2).

Everything here is closed form: the indicial quadratic f(s) = b + s(N-2+c-s),
its roots, the adjoint and Kelvin parameter maps, and the classification of
which realization of L generates a semigroup in L^p.

When every input is rational (ints, Fractions or decimal strings) the
classifier works in exact arithmetic; interval endpoints have the form
``a + k*sqrt(D)`` with rational ``a, k`` and comparisons against them are
decided exactly.  Float inputs fall back to a 1e-12 comparison band and a
value inside the band is reported as an endpoint hit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from numbers import Rational

FLOAT_BAND = 1e-12
FILTER_BAND = 1e-9

Number = "int | float | Fraction"


def as_number(x):
    """Coerce ``x`` to an int/Fraction (exact) or float.

    Strings are parsed as Fractions ("1/3", "0.25", "-2").
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Rational):
        return Fraction(x) if not isinstance(x, int) else x
    if isinstance(x, float):
        return x
    try:
        return float(x)
    except (TypeError, ValueError) as exc:
        raise TypeError(f"cannot interpret {x!r} as a number") from exc


def is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xs)


def _finite(x) -> bool:
    return isinstance(x, (int, Fraction)) or math.isfinite(x)


@dataclass(frozen=True)
class OperatorParams:
    """The tuple (N, alpha, b, c) defining L."""

    N: int
    alpha: object
    b: object
    c: object

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int):
            if isinstance(self.N, (float, Fraction)) and float(self.N).is_integer():
                object.__setattr__(self, "N", int(self.N))
            else:
                raise ValueError(f"dimension N must be an integer, got {self.N!r}")
        if self.N < 1:
            raise ValueError(f"dimension N must be >= 1, got {self.N}")
        for name in ("alpha", "b", "c"):
            v = as_number(getattr(self, name))
            if not _finite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    @cached_property
    def exact(self) -> bool:
        return is_exact(self.alpha, self.b, self.c)

    @cached_property
    def s0(self):
        """Vertex of f, (N-2+c)/2."""
        return _half(self.N - 2 + self.c)

    @cached_property
    def discriminant(self):
        """D_c = b + ((N-2+c)/2)^2."""
        return self.b + self.s0 * self.s0

    def as_floats(self) -> tuple[int, float, float, float]:
        return self.N, float(self.alpha), float(self.b), float(self.c)


def _half(x):
    return Fraction(x, 2) if isinstance(x, int) else x / 2


def _exact_sqrt(q: Fraction):
    """sqrt of a nonnegative rational if it is rational, else None."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def f_eval(params: OperatorParams, s):
    """f(s) = b + s(N-2+c-s)."""
    s = as_number(s)
    return params.b + s * (params.N - 2 + params.c - s)


class RootKind(str, enum.Enum):
    DISTINCT = "distinct"
    DOUBLE = "double"
    COMPLEX = "complex"


@dataclass(frozen=True)
class SpectralSummary:
    discriminant: object
    s0: object
    kind: RootKind
    s1: object = None
    s2: object = None

    @property
    def complex(self) -> bool:
        return self.kind is RootKind.COMPLEX


def spectral_summary(params: OperatorParams) -> SpectralSummary:
    D = params.discriminant
    s0 = params.s0
    if D < 0:
        return SpectralSummary(D, s0, RootKind.COMPLEX)
    if D == 0:
        return SpectralSummary(D, s0, RootKind.DOUBLE, s0, s0)
    root = _exact_sqrt(D) if params.exact else None
    if root is None:
        root = math.sqrt(D)
        s0f = float(s0)
        return SpectralSummary(D, s0, RootKind.DISTINCT, s0f - root, s0f + root)
    return SpectralSummary(D, s0, RootKind.DISTINCT, s0 - root, s0 + root)


def adjoint_params(params: OperatorParams) -> OperatorParams:
    """Parameters of the formal adjoint: c~ = 2 alpha - c, b~ = b + (c-alpha)(alpha-2+N)."""
    a, b, c, N = params.alpha, params.b, params.c, params.N
    return OperatorParams(N, a, b + (c - a) * (a - 2 + N), 2 * a - c)


def kelvin_params(params: OperatorParams) -> OperatorParams:
    """Parameters of T^-1 L T for the Kelvin transform T u = |x|^(2-N) u(x/|x|^2)."""
    a, b, c, N = params.alpha, params.b, params.c, params.N
    return OperatorParams(N, 4 - a, b + c * (N - 2), -c)


def dissipativity_margin(params: OperatorParams, p):
    """f((N+alpha-2)/p); L_min is dissipative in L^p iff this is >= 0."""
    p = _check_p(p)
    return f_eval(params, (params.N + params.alpha - 2) / _as_div(p))


def sectoriality_constant(params: OperatorParams, p):
    """The constant l_alpha bounding |Im| by Re of the L^p form, or None if undefined."""
    p = _check_p(p)
    N, a = params.N, params.alpha
    t = float(N + a - 2) / float(p)
    m = float(dissipativity_margin(params, p))
    gap = float(params.s0) - t
    base = (float(p) - 2.0) ** 2 / (4.0 * (float(p) - 1.0))
    if m > FLOAT_BAND:
        return math.sqrt(base + gap * gap / m)
    if abs(m) <= FLOAT_BAND and abs(gap) <= FLOAT_BAND:
        # 0/0 = 0
        return math.sqrt(base)
    return None


def _as_div(p):
    return Fraction(p) if isinstance(p, int) else p


def _check_p(p):
    p = as_number(p)
    if not _finite(p):
        raise ValueError(f"p must be finite, got {p!r}")
    if p <= 1:
        raise ValueError(f"p must lie in (1, inf), got {p}")
    return p


# ---------------------------------------------------------------------------
# quadratic-surd arithmetic: values a + k*sqrt(D) sharing one radicand


@dataclass(frozen=True)
class _Surd:
    a: object
    k: object = 0


class _Arith:
    """Sign decisions for a + k sqrt(D), exact or banded."""

    def __init__(self, D, exact: bool):
        self.D = D
        self.exact = exact
        self.sqrtD = math.sqrt(float(D)) if D > 0 else 0.0

    def sign(self, s: _Surd) -> int:
        a, k = s.a, s.k
        if self.exact:
            if k == 0 or self.D == 0:
                return (a > 0) - (a < 0)
            sk = (k > 0) - (k < 0)
            if a == 0:
                return sk
            sa = (a > 0) - (a < 0)
            if sa == sk:
                return sa
            lhs, rhs = a * a, k * k * self.D
            if lhs == rhs:
                return 0
            return sa if lhs > rhs else sk
        af, kf = float(a), float(k) * self.sqrtD
        v = af + kf
        scale = max(1.0, abs(af), abs(kf))
        if abs(v) <= FLOAT_BAND * scale:
            return 0
        return 1 if v > 0 else -1

    def cmp(self, x: _Surd, y: _Surd) -> int:
        if self.exact:
            # float filter: a gap far above rounding error settles the sign exactly
            vx, vy = self.value(x), self.value(y)
            if abs(vx - vy) > FILTER_BAND * (1.0 + abs(vx) + abs(vy)):
                return 1 if vx > vy else -1
        return self.sign(_Surd(x.a - y.a, x.k - y.k))

    def value(self, s: _Surd) -> float:
        return float(s.a) + float(s.k) * self.sqrtD


@dataclass(frozen=True)
class Interval:
    """A real interval with explicit endpoint openness (values as floats)."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, x: float) -> bool:
        if self.lo < x < self.hi:
            return True
        return (x == self.lo and self.lo_closed) or (x == self.hi and self.hi_closed)

    def to_dict(self) -> dict:
        return {
            "lo": _jsonable(self.lo),
            "hi": _jsonable(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
            "empty": self.empty,
        }


EMPTY = Interval(0.0, 0.0, False, False)
EVERYTHING = Interval(-math.inf, math.inf, False, False)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


class _SurdInterval:
    def __init__(self, lo: _Surd, hi: _Surd, lo_closed: bool, hi_closed: bool):
        self.lo, self.hi = lo, hi
        self.lo_closed, self.hi_closed = lo_closed, hi_closed

    def contains(self, ar: _Arith, x: _Surd) -> bool:
        cl, ch = ar.cmp(x, self.lo), ar.cmp(x, self.hi)
        left = cl > 0 or (cl == 0 and self.lo_closed)
        right = ch < 0 or (ch == 0 and self.hi_closed)
        return left and right

    def hits(self, ar: _Arith, x: _Surd) -> list[str]:
        out = []
        if ar.cmp(x, self.lo) == 0:
            out.append("lo")
        if ar.cmp(x, self.hi) == 0:
            out.append("hi")
        return out

    def to_interval(self, ar: _Arith) -> Interval:
        return Interval(ar.value(self.lo), ar.value(self.hi), self.lo_closed, self.hi_closed)


# ---------------------------------------------------------------------------
# classification


class Verdict(str, enum.Enum):
    GENERATES_MIN = "GeneratesMin"
    GENERATES_INT_ONLY = "GeneratesIntOnly"
    GENERATES_MAX = "GeneratesMax"
    GENERATES_MIN_AND_MAX = "GeneratesMinAndMax"
    NO_REALIZATION = "NoRealizationGenerates"
    ALPHA2_ALL_P = "Alpha2AllP"
    NEGATIVE_DISCRIMINANT = "NegativeDiscriminant"

    @property
    def generates(self) -> bool:
        return self not in (Verdict.NO_REALIZATION, Verdict.NEGATIVE_DISCRIMINANT)


class DomainKind(str, enum.Enum):
    WHOLE_SPACE = "WholeSpace"
    BALL = "Ball"
    EXTERIOR = "Exterior"


@dataclass(frozen=True)
class ThetaData:
    interval: Interval
    theta0: float | None = None


@dataclass(frozen=True)
class Classification:
    """Which realization of L generates in L^p, stated in terms of N/p.

    ``interval`` is the set of N/p values for which some realization between
    L_min and L_max generates; ``min_interval``/``max_interval`` are the N/p
    ranges where L_min resp. L_max themselves generate (whole space only).
    ``equal_min``/``equal_max`` flag L_int = L_min and L_int = L_max at the
    given p; they are None where the domain kind leaves them open.
    """

    verdict: Verdict
    domain_kind: DomainKind
    N_over_p: float
    interval: Interval
    min_interval: Interval | None = None
    max_interval: Interval | None = None
    theta_interval: Interval | None = None
    theta0: float | None = None
    equal_min: bool | None = None
    equal_max: bool | None = None
    selfadjoint: bool | None = None
    endpoint_hits: tuple[str, ...] = field(default_factory=tuple)
    exact: bool = False

    @property
    def generates(self) -> bool:
        return self.verdict.generates

    @property
    def interval_lo(self) -> float:
        return self.interval.lo

    @property
    def interval_hi(self) -> float:
        return self.interval.hi

    def to_dict(self) -> dict:
        def iv(x):
            return None if x is None else x.to_dict()

        return {
            "verdict": self.verdict.value,
            "generates": self.generates,
            "domain_kind": self.domain_kind.value,
            "N_over_p": float(self.N_over_p),
            "interval": iv(self.interval),
            "min_interval": iv(self.min_interval),
            "max_interval": iv(self.max_interval),
            "theta_interval": iv(self.theta_interval),
            "theta0": None if self.theta0 is None else float(self.theta0),
            "equalities": {"int_eq_min": self.equal_min, "int_eq_max": self.equal_max},
            "selfadjoint": self.selfadjoint,
            "endpoint_hits": list(self.endpoint_hits),
            "exact_arithmetic": self.exact,
        }


def _setup(params: OperatorParams, p):
    p = _check_p(p)
    exact = params.exact and is_exact(p)
    x = params.N / _as_div(p) if exact else params.N / float(p)
    D = params.discriminant if exact else float(params.discriminant)
    s0 = params.s0 if exact else float(params.s0)
    alpha = params.alpha if exact else float(params.alpha)
    if not exact and abs(D) <= FLOAT_BAND * max(1.0, s0 * s0, abs(float(params.b))):
        D = 0.0
    return p, exact, x, D, s0, alpha


def _theta_interval(ar: _Arith, x, s0, alpha, D) -> tuple[Interval, float | None]:
    # f(x + theta(alpha-2)) > 0  <=>  |x + theta(alpha-2) - s0| < sqrt(D)
    if D < 0 or (D == 0):
        theta0 = None
        if D == 0:
            t0 = (x - s0) / (2 - alpha)
            if 0 <= t0 <= 1 or (not ar.exact and -FLOAT_BAND <= t0 <= 1 + FLOAT_BAND):
                theta0 = float(min(max(t0, 0), 1))
        return EMPTY, theta0
    d = 2 - alpha
    # theta in ((x-s0-sqrtD)/d, (x-s0+sqrtD)/d) for d>0, reversed for d<0
    lo = _Surd((x - s0) / d, -1 / _as_div(d) if isinstance(d, int) else -1 / d)
    hi = _Surd((x - s0) / d, 1 / _as_div(d) if isinstance(d, int) else 1 / d)
    if d < 0:
        lo, hi = hi, lo
    zero, one = _Surd(0), _Surd(1)
    # intersect open (lo, hi) with closed [0, 1]
    if ar.cmp(lo, zero) < 0:
        new_lo, lo_closed = zero, True
    else:
        new_lo, lo_closed = lo, False
    if ar.cmp(hi, one) > 0:
        new_hi, hi_closed = one, True
    else:
        new_hi, hi_closed = hi, False
    c = ar.cmp(new_lo, new_hi)
    if c > 0 or (c == 0 and not (lo_closed and hi_closed)):
        return EMPTY, None
    return Interval(ar.value(new_lo), ar.value(new_hi), lo_closed, hi_closed), None


def theta_data(params: OperatorParams, p) -> ThetaData:
    """The interval I of theta in [0,1] with f(N/p + theta(alpha-2)) > 0, and theta0
    solving N/p = s0 + theta0 (2-alpha) in the critical case."""
    p, exact, x, D, s0, alpha = _setup(params, p)
    if alpha == 2:
        raise ValueError("theta data is undefined for alpha = 2")
    ar = _Arith(D, exact)
    iv, t0 = _theta_interval(ar, x, s0, alpha, D)
    return ThetaData(iv, t0)


def theta_in_interval(params: OperatorParams, p, theta) -> bool:
    """Exact (or banded) test f(N/p + theta(alpha-2)) > 0 for theta in [0,1]."""
    p = _check_p(p)
    theta = as_number(theta)
    if not 0 <= theta <= 1:
        return False
    if params.exact and is_exact(p, theta):
        return f_eval(params, params.N / _as_div(p) + theta * (params.alpha - 2)) > 0
    val = float(f_eval(params, params.N / float(p) + float(theta) * (float(params.alpha) - 2)))
    return val > FLOAT_BAND


def _selfadjoint(params: OperatorParams, p, exact: bool):
    if params.c != params.alpha:
        return None
    if (p != 2) if exact else abs(float(p) - 2.0) > FLOAT_BAND:
        return None
    if params.alpha == 2:
        return True
    a = params.alpha if exact else float(params.alpha)
    thresh = -(_half(params.N - 2 + a) ** 2) + _half(a - 2) ** 2
    if exact:
        return params.b >= thresh
    return float(params.b) >= float(thresh) - FLOAT_BAND


def classify(params: OperatorParams, p, domain_kind=DomainKind.WHOLE_SPACE) -> Classification:
    """Decide which realization of L generates a semigroup in L^p(domain)."""
    domain_kind = DomainKind(domain_kind)
    p, exact, x, D, s0, alpha = _setup(params, p)
    ar = _Arith(D, exact)
    X = _Surd(x)
    lo_shift = min(0, 2 - alpha)
    hi_shift = max(0, 2 - alpha)
    sa = _selfadjoint(params, p, exact) if domain_kind is DomainKind.WHOLE_SPACE else None
    common = dict(domain_kind=domain_kind, N_over_p=float(x), exact=exact, selfadjoint=sa)

    def easy(verdict):
        return Classification(verdict, interval=EVERYTHING, **common)

    if domain_kind is DomainKind.WHOLE_SPACE and alpha == 2:
        return Classification(
            Verdict.ALPHA2_ALL_P, interval=EVERYTHING, equal_min=True, equal_max=True, **common
        )
    if domain_kind is DomainKind.BALL and alpha >= 2:
        return easy(Verdict.GENERATES_MAX)
    if domain_kind is DomainKind.EXTERIOR and alpha <= 2:
        return easy(Verdict.GENERATES_MAX)

    if D < 0:
        theta = _theta_interval(ar, x, s0, alpha, D)[0] if domain_kind is DomainKind.WHOLE_SPACE else None
        return Classification(
            Verdict.NEGATIVE_DISCRIMINANT, interval=EMPTY, theta_interval=theta, **common
        )

    critical = D == 0
    s1 = _Surd(s0, -1)
    s2 = _Surd(s0, 1)
    shift = lambda s, t: _Surd(s.a + t, s.k)  # noqa: E731

    if domain_kind is DomainKind.WHOLE_SPACE:
        gen = _SurdInterval(shift(s1, lo_shift), shift(s2, hi_shift), critical, critical)
    elif domain_kind is DomainKind.BALL:
        gen = _SurdInterval(s1, shift(s2, 2 - alpha), critical, critical)
    else:
        gen = _SurdInterval(shift(s1, 2 - alpha), s2, critical, critical)

    theta_iv, theta0 = _theta_interval(ar, x, s0, alpha, D)
    hits = tuple(gen.hits(ar, X))
    in_gen = gen.contains(ar, X)

    if domain_kind is not DomainKind.WHOLE_SPACE:
        verdict = Verdict.GENERATES_INT_ONLY if in_gen else Verdict.NO_REALIZATION
        return Classification(
            verdict,
            interval=gen.to_interval(ar),
            theta_interval=theta_iv,
            theta0=theta0 if in_gen else None,
            endpoint_hits=hits,
            **common,
        )

    if critical:
        m_pt = shift(s1, 2 - alpha)
        mn = _SurdInterval(m_pt, m_pt, True, True)
        mx = _SurdInterval(s1, s1, True, True)
    elif alpha < 2:
        mn = _SurdInterval(shift(s1, 2 - alpha), shift(s2, 2 - alpha), True, False)
        mx = _SurdInterval(s1, s2, False, True)
    else:
        mn = _SurdInterval(shift(s1, 2 - alpha), shift(s2, 2 - alpha), False, True)
        mx = _SurdInterval(s1, s2, True, False)

    min_gen = in_gen and mn.contains(ar, X)
    max_gen = in_gen and mx.contains(ar, X)
    if not in_gen:
        verdict = Verdict.NO_REALIZATION
    elif min_gen and max_gen:
        verdict = Verdict.GENERATES_MIN_AND_MAX
    elif min_gen:
        verdict = Verdict.GENERATES_MIN
    elif max_gen:
        verdict = Verdict.GENERATES_MAX
    else:
        verdict = Verdict.GENERATES_INT_ONLY
    all_hits = set(hits)
    all_hits.update("min_" + h for h in mn.hits(ar, X))
    all_hits.update("max_" + h for h in mx.hits(ar, X))
    return Classification(
        verdict,
        interval=gen.to_interval(ar),
        min_interval=mn.to_interval(ar),
        max_interval=mx.to_interval(ar),
        theta_interval=theta_iv,
        theta0=theta0 if in_gen else None,
        equal_min=min_gen if in_gen else None,
        equal_max=max_gen if in_gen else None,
        endpoint_hits=tuple(sorted(all_hits)),
        **common,
    )


def generates_for_some_p(params: OperatorParams) -> bool:
    """Whether (s1+min{0,2-alpha}, s2+max{0,2-alpha}) (closed if critical) meets (0, N)."""
    if params.alpha == 2:
        return True
    D = params.discriminant
    if D < 0:
        return False
    exact = params.exact
    ar = _Arith(D if exact else float(D), exact)
    s0 = params.s0 if exact else float(params.s0)
    a = params.alpha if exact else float(params.alpha)
    lo = _Surd(s0 + min(0, 2 - a), -1)
    hi = _Surd(s0 + max(0, 2 - a), 1)
    critical = D == 0
    # need lo < N (or <= if closed... N itself is excluded) and hi > 0
    left_ok = ar.cmp(lo, _Surd(params.N)) < 0
    c_hi = ar.cmp(hi, _Surd(0))
    right_ok = c_hi > 0
    if critical:
        # closed interval [lo, hi] meets open (0, N)
        return left_ok and right_ok
    return left_ok and right_ok and ar.cmp(lo, hi) < 0


def with_values(params: OperatorParams, **kw) -> OperatorParams:
    return replace(params, **kw)
