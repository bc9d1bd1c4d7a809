import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from halfline import estimates
from halfline.errors import DomainRangeError
from halfline.estimates import (check_compact_support, check_F_decay, check_L2_conditions, check_two_sided_bounds,
                                compare_constants, estimate_profile, sigma_profiles)
from halfline.forward import jost_function, kernel_from_potential
from halfline.marchenko import solve_marchenko_all
from halfline.numerics import Grid, SampledFunction
from halfline.potential import polynomial_bump, zero
from halfline.scattering import FFunction


def exp_F(h=0.05, x_max=10.0):
    return FFunction.from_function(lambda x: 2.0 * np.exp(-x), x_neg=-5.0, x_max=x_max, h=h, bound_states=[(1, 2)])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(3, 60), elements=st.floats(-1e3, 1e3)))
def test_sigma_profiles_are_nonincreasing_and_dominate(values):
    sF, s1, s2 = sigma_profiles(values, 0.1)
    assert np.all(np.diff(sF) <= 0) and np.all(np.diff(s1) <= 0) and np.all(np.diff(s2) <= 0)
    assert np.all(sF >= np.abs(values))
    assert s1[-1] == 0.0 and s2[-1] == 0.0
    assert np.all(s1 >= 0) and np.all(s2 >= 0)


def test_sigma_profiles_of_exponential():
    h = 0.01
    x = np.arange(0.0, 10.0 + h / 2, h)
    sF, s1, s2 = sigma_profiles(np.exp(-x), h)
    assert np.array_equal(sF, np.exp(-x))
    assert np.max(np.abs(s1 - (np.exp(-x) - np.exp(-10.0)))) < 1e-6
    assert np.max(np.abs(s2 - (np.exp(-x) - np.exp(-10.0)))) < 1e-12


@pytest.fixture(scope="module")
def exp_profile():
    F = exp_F()
    return estimate_profile(F, solve_marchenko_all(F))


def test_two_sided_bounds_hold_for_exponential_F(exp_profile):
    rep, ep = check_two_sided_bounds(exp_profile)
    assert rep.passed, rep.table()
    assert set(ep.fitted_constants) == set(estimates.BOUND_NAMES)
    # for F = 2 exp(-x), sup_y |A(x, y)| = 2 exp(-2x) / (1 + exp(-2x)) against sigma_F(2x) = 2 exp(-2x)
    assert ep.fitted_constants[estimates.BOUND_NAMES[0]] == pytest.approx(1.0, rel=0.01)
    assert rep.check("threshold_minimal").verdict


def test_bound_check_needs_both_halves(exp_profile):
    from dataclasses import replace

    with pytest.raises(ValueError):
        check_two_sided_bounds(replace(exp_profile, grid=None))


def test_constant_comparison():
    rep = compare_constants({"a": 1.0, "b": 2.0, "z": 0.0}, {"a": 1.05, "b": 3.0, "z": 0.0})
    assert [c.verdict for c in rep.checks] == [True, False, True]


def test_F_decay_report():
    rep = check_F_decay(exp_F())
    assert rep.passed
    assert rep.check("F_L1").value == pytest.approx(2.0, rel=1e-3)
    assert rep.check("F_Linf").value == pytest.approx(2.0)
    slow = FFunction.from_function(lambda x: 1.0 / (1.0 + np.abs(x)), x_neg=-5.0, x_max=200.0, h=0.1)
    assert not check_F_decay(slow).check("F_L1").verdict


def test_compact_support():
    def bump(x):
        return np.where((x >= 0) & (x < 3.0), (3.0 - x) ** 2, 0.0)

    F = FFunction.from_function(bump, x_neg=-2.0, x_max=10.0, h=0.05)
    ok = check_compact_support(F, 1.5)
    assert ok.passed and ok.details["a_hat"] == pytest.approx(1.5, abs=0.05)
    assert not check_compact_support(F, 1.0).passed
    with pytest.raises(DomainRangeError):
        check_compact_support(F, 9.9)


def test_L2_conditions_zero_and_bump():
    k = Grid.from_step(-40.0, 40.0, 0.02)
    jd0 = jost_function(kernel_from_potential(zero(h=0.05, x_max=5.0)), k)
    rep = check_L2_conditions(jd0, 0.0)
    assert rep.passed and all(c.value == 0.0 for c in rep.checks)

    p = polynomial_bump(h=0.01, x_max=6.0)
    jd = jost_function(kernel_from_potential(p), k)
    Q = float(np.sum(p.values) * p.grid.h)
    assert check_L2_conditions(jd, Q).passed


def test_L2_detects_wrong_asymptotic_constant():
    p = polynomial_bump(h=0.01, x_max=6.0)
    jd = jost_function(kernel_from_potential(p), Grid.from_step(-40.0, 40.0, 0.02))
    funcs = estimates.l2_functions(jd, 0.0)
    # without the correct Q the S-asymptotics do not decay
    assert np.abs(funcs["S_asymptotics"][-1]) > 0.1


def test_profile_merge_prefers_own_fields(exp_profile):
    F_only = estimates.profile_F(exp_F())
    merged = F_only.merge(exp_profile)
    assert merged.grid is exp_profile.grid and merged.sigma_F is F_only.sigma_F
    with pytest.raises(DomainRangeError):
        estimates.profile_A(solve_marchenko_all(exp_F(h=0.05))).merge(
            estimates.profile_F(SampledFunction(Grid(0.0, 2.0, 10), np.zeros(11)))).at_double(np.zeros(11))
