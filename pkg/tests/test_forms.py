import math

import numpy as np
import pytest
import sympy as sp

from sel_lab.forms import (
    LogProfile,
    TestFunction,
    coercivity_near_optimizer,
    corpus_profile,
    default_s_grid,
    dissipativity_form,
    interpolation_corpus,
    interpolation_probe,
    log_hardy,
    near_optimizer_profile,
    random_profile,
    ramp_profile,
    violation_search,
    weighted_coercivity,
)
from sel_lab.grid import smooth_bump, smooth_plateau
from sel_lab.params import OperatorParams, dissipativity_margin, f_eval

S = default_s_grid()
BUMP = smooth_bump(S, -1.0, 1.0)
BASE = OperatorParams(3, 0, 0, 0)


def test_testfunction_validation():
    with pytest.raises(ValueError):
        TestFunction(S, np.ones_like(S))
    with pytest.raises(ValueError):
        TestFunction(S, BUMP, n=-1)
    with pytest.raises(ValueError):
        TestFunction(S, BUMP, p=1.0)
    with pytest.raises(ValueError):
        TestFunction(S[::-1], BUMP)
    assert TestFunction(S, BUMP, 2).harmonic_shift(3) == 6.0


def test_bump_is_dissipative():
    rep = dissipativity_form(BASE, TestFunction(S, BUMP, 0, 2.0))
    assert rep.margin_used == pytest.approx(0.25)
    assert rep.real_part >= 0 and rep.passed


def test_reduced_form_matches_symbolic_integration_by_parts():
    # p = 2, real g: int (-Lu) u dx = int r^{alpha+N-3} ... checked against sympy on a polynomial-times-bump
    params = OperatorParams(4, 1, 0.5, 0.5)
    s = sp.symbols("s", real=True)
    N, a, b, c = 4, 1, sp.Rational(1, 2), sp.Rational(1, 2)
    g = sp.exp(-(s**2)) * (1 + s / 3)
    Lg = sp.exp((a - 2) * s) * (sp.diff(g, s, 2) + (N - 2 + c) * sp.diff(g, s) - b * g)
    exact = float(sp.Integral(-Lg * g * sp.exp(N * s), (s, -12, 12)).evalf(30))
    grid = np.linspace(-12, 12, 9601)
    vals = np.exp(-(grid**2)) * (1 + grid / 3)
    vals[:5] = vals[-5:] = 0.0
    rep = dissipativity_form(params, TestFunction(grid, vals, 0, 2.0))
    assert rep.real_part == pytest.approx(exact, rel=1e-8)


def test_higher_harmonic_increases_form():
    params = OperatorParams(3, 0.5, 0.2, 0)
    vals = [dissipativity_form(params, TestFunction(S, BUMP, n, 3.0)).real_part for n in range(4)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_zero_profile():
    rep = dissipativity_form(BASE, TestFunction(S, np.zeros_like(S), 0, 1.5))
    assert rep.real_part == 0 and rep.passed
    rep = weighted_coercivity(OperatorParams(5, 0, 1, 0), 2.0, TestFunction(S, np.zeros_like(S), 0, 2.0))
    assert rep.real_part == 0 and rep.lower_bound == 0 and rep.passed


def test_regularization_gap_small():
    rng = np.random.default_rng(5)
    for p in (2.0, 3.0):
        rep = dissipativity_form(BASE, TestFunction(S, random_profile(rng, S), 0, p))
        assert rep.extra["regularization_gap"] <= 1e-10


def test_power_profile_form_equals_margin():
    # for g = r^{-k} on a long plateau the form per unit scale tends to f(k) with k = (N+alpha-2)/p
    params = OperatorParams(3, 0, -0.35, 0)
    assert float(dissipativity_margin(params, 2)) == pytest.approx(-0.1)
    delta, rep = violation_search(params, 2.0)
    assert rep.real_part <= -1e-3 * rep.scale
    assert rep.extra["relative"] < 0


def test_violation_not_found_when_dissipative():
    params = OperatorParams(3, 0, 0.1, 0)
    delta, rep = violation_search(params, 2.0)
    assert rep.real_part >= -1e-8 * rep.scale


def test_imaginary_bound_example():
    rng = np.random.default_rng(2)
    params = OperatorParams(4, 1, 2, 0.3)
    for p in (1.5, 2.0, 4.0):
        for _ in range(5):
            rep = dissipativity_form(params, TestFunction(S, random_profile(rng, S), 0, p))
            assert rep.extra["im_bound_ok"]


def test_real_profile_has_zero_imaginary_part():
    rep = dissipativity_form(OperatorParams(3, 1, 1, 1), TestFunction(S, BUMP, 1, 2.5))
    assert rep.imaginary_part == 0.0


def test_coercivity_example():
    params = OperatorParams(5, 0, 1, 0)
    assert float(f_eval(params, 5 / 2 - 2)) == 2.25
    rep = weighted_coercivity(params, 2.0, TestFunction(S, BUMP, 0, 2.0))
    assert rep.margin_used == 2.25
    assert rep.passed and rep.real_part > 1.5 * rep.lower_bound


def test_coercivity_near_optimizer():
    params = OperatorParams(5, 0, 1, 0)
    ratios = [coercivity_near_optimizer(params, 2.0, hw).extra["ratio"] for hw in (2, 5, 10, 20)]
    assert all(x > y for x, y in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=0.1)
    assert all(r >= 1 for r in ratios)


def test_coercivity_requires_positive_M():
    with pytest.raises(ValueError):
        weighted_coercivity(OperatorParams(3, 0, -1, 0), 2.0, TestFunction(S, BUMP, 0, 2.0))


def test_log_hardy_ramp_and_zero():
    for p in (1.5, 2.0, 3.0):
        rep = log_hardy(p, ramp_profile())
        assert rep.passed and rep.extra["ratio"] > 1.1
    zero = LogProfile(lambda s: 0.0, lambda s: 0.0)
    rep = log_hardy(2.0, zero)
    assert rep.real_part == 0 and rep.lower_bound == 0 and rep.passed
    with pytest.raises(ValueError):
        log_hardy(2.0, LogProfile(lambda s: 1.0, lambda s: 0.0))


def test_log_hardy_reduction_oracle():
    # independent 1-D oracle in t = -log r: ratio = 4 int (v_t)^2 dt / int v^2 t^{-2} dt at p = 2
    import mpmath as mp

    eta, T = 0.3, 50.0
    q = (1 + eta) / 2
    # power pieces on [0, T] in closed form, smooth cutoff pieces by mpmath
    lhs = q * q * T ** (2 * q - 1) / (2 * q - 1) + mp.quad(
        lambda t: (q * t ** (q - 1) * (2 - t / T) - t**q / T) ** 2, [T, 2 * T]
    )
    rhs = T ** (2 * q - 1) / (2 * q - 1) + mp.quad(lambda t: (t**q * (2 - t / T)) ** 2 / t**2, [T, 2 * T])
    rep = log_hardy(2.0, near_optimizer_profile(2.0, eta, T))
    assert rep.extra["ratio"] == pytest.approx(float(4 * lhs / rhs), rel=1e-7)


def test_log_hardy_near_optimizer_trend():
    for p in (1.5, 2.0, 3.0):
        ratios = [log_hardy(p, near_optimizer_profile(p, e)).extra["ratio"] for e in (0.5, 0.2, 0.05, 0.02)]
        assert all(x > y for x, y in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.2 and all(r >= 1 for r in ratios)


def test_interpolation_probe():
    rng = np.random.default_rng(0)
    corpus = interpolation_corpus(rng, 50)
    params = OperatorParams(3, 0.5, 0.3, 0)
    rep = interpolation_probe(params, 2.0, corpus)
    assert rep.bounded
    shifted = interpolation_probe(params, 2.0, corpus, shift=0.7)
    for e in rep.epsilons:
        assert shifted.max_C[e] == pytest.approx(rep.max_C[e], rel=1e-6, abs=1e-12)
    fine = interpolation_probe(params, 2.0, corpus, s=np.linspace(-8, 8, 6401))
    for e in rep.epsilons:
        assert fine.max_C[e] == pytest.approx(rep.max_C[e], rel=0.2, abs=1e-12)


def test_interpolation_plateau_profile():
    s = np.linspace(-8, 8, 3201)
    g = smooth_plateau(s, -3, 3, 1)
    # grad u = 0 on the plateau; C is finite and comes only from the ramps
    desc = corpus_profile(((0.0, 1.0, 1.0),), s)
    assert desc.max() == pytest.approx(1.0)
    params = OperatorParams(3, 0, 0, 0)
    from sel_lab.forms import _interp_norms

    grad, Lu, low = _interp_norms(params, 2.0, s, g)
    assert math.isfinite(grad) and low > 0
