import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfline.errors import FitError, InconsistentDataError, ResolutionError, ValidationError
from halfline.numerics import Grid
from halfline.scattering import (FFunction, ScatteringData, build_F, discrete_part, fit_exponentials,
                                 recover_scattering, validate, winding_number)

from oracles import sech_F, sech_S

K_GRID = Grid.from_step(-30.0, 30.0, 0.02)
F_GRID = Grid.from_step(-10.0, 20.0, 0.05)


def blaschke(k, kappas):
    """Unimodular S with winding ``-len(kappas)``: a product of ``(k + i a)/(k - i a)``."""
    k = np.asarray(k, dtype=complex)
    out = np.ones_like(k)
    for a in kappas:
        out *= (k + 1j * a) / (k - 1j * a)
    return out


def test_bound_states_are_stored_in_canonical_order():
    sd = ScatteringData.free(5.0, 0.1, [(1.0, 2.0), (3.0, 1.0), (2.0, 0.5)])
    assert [k for k, _ in sd.bound_states] == [3.0, 2.0, 1.0]
    assert sd.J == 3 and sd.k_max == 5.0


def test_scattering_data_rejects_malformed_input():
    with pytest.raises(ValueError):
        ScatteringData(Grid.from_step(-1.0, 2.0, 0.1), np.ones(31))
    with pytest.raises(ValueError):
        ScatteringData(Grid.from_step(-1.0, 1.0, 0.1), np.ones(20))
    with pytest.raises(InconsistentDataError):
        ScatteringData.free(1.0, 0.1, [(1.0, 1.0), (1.0, 2.0)])


def test_winding_number_of_blaschke_products():
    for kappas in ((), (1.0,), (0.5, 2.0)):
        assert winding_number(K_GRID, blaschke(K_GRID.points, kappas)) == pytest.approx(-len(kappas), abs=0.05)
    assert winding_number(K_GRID, sech_S(K_GRID.points)) == pytest.approx(-1.0, abs=1e-12)


def test_winding_number_needs_resolved_phase():
    g = Grid.from_step(-5.0, 5.0, 1.0)
    with pytest.raises(ResolutionError):
        winding_number(g, blaschke(g.points, (0.05,)))


def test_validate_exact_data():
    rep, sd = validate(ScatteringData(K_GRID, sech_S(K_GRID.points)))
    assert sd.index_kappa == -1
    for name in ("unitarity", "conjugate_symmetry", "index_nonpositive", "levinson"):
        assert rep.check(name).verdict
    # |1 - S(K)| is of order 2/K for this potential, far above the cutoff tolerance
    assert not rep.check("limit_at_cutoff").verdict
    assert rep.details["f0_vanishes"]


def test_validate_flags_broken_symmetry_and_unitarity():
    k = K_GRID.points
    rep, _ = validate(ScatteringData(K_GRID, 1.01 * np.exp(1j * np.sin(k) * (k > 0))))
    assert not rep.check("unitarity").verdict
    assert not rep.check("conjugate_symmetry").verdict
    with pytest.raises(ValidationError):
        build_F(ScatteringData(K_GRID, 1.01 * np.ones(K_GRID.n + 1)), F_GRID)


def test_levinson_counts_bound_states():
    k = K_GRID.points
    # one zero of f in the upper half plane and f(0) != 0: winding -2 J = -2
    rep, _ = validate(ScatteringData(K_GRID, blaschke(k, (1.0, 1.0)), [(1.0, 2.0)]))
    assert rep.check("levinson").verdict
    rep, _ = validate(ScatteringData(K_GRID, blaschke(k, (1.0, 1.0)), ()))
    assert not rep.check("levinson").verdict


def test_build_F_reproduces_closed_form():
    F = build_F(ScatteringData(K_GRID, sech_S(K_GRID.points)), F_GRID)
    assert np.max(np.abs(F.values - sech_F(F.x))) < 1e-10
    assert np.all(F.f_d == 0.0)


def test_build_F_discrete_part_only():
    states = [(1.0, 2.0), (2.5, 0.3)]
    F = build_F(ScatteringData.free(30.0, 0.02, states), F_GRID)
    exact = 2.0 * np.exp(-F.x) + 0.3 * np.exp(-2.5 * F.x)
    assert np.max(np.abs(F.values - exact) / np.abs(exact)) < 1e-14
    assert np.max(np.abs(F.f_s)) < 1e-14


def test_build_F_enforces_oscillation_limit():
    with pytest.raises(ResolutionError):
        build_F(ScatteringData.free(30.0, 0.2), F_GRID)


def test_asymptotic_subtraction_beats_plain_truncation():
    sd = ScatteringData(K_GRID, sech_S(K_GRID.points))
    away = np.abs(F_GRID.points) > 1.0
    plain = np.max(np.abs(build_F(sd, F_GRID, n_asymptotic=0).values - sech_F(F_GRID.points))[away])
    # the truncated transform of 1 - S = O(1/k) leaves an O(1/K) ripple
    assert 1e-3 < plain < 0.05
    assert np.max(np.abs(build_F(sd, F_GRID).values - sech_F(F_GRID.points))) < 1e-6 * plain


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0.3, 4.0), st.floats(0.1, 10.0)), min_size=1, max_size=3,
                unique_by=lambda t: round(t[0], 1)))
def test_fit_exponentials_recovers_sums(pairs):
    pairs = sorted(pairs, key=lambda p: -p[0])
    if any(a - b < 0.3 for (a, _), (b, _) in zip(pairs, pairs[1:])):
        return
    # every term must stand above the fit tolerance somewhere in the window
    x = np.linspace(-3.0, 0.0, 121)
    y = discrete_part(pairs, x)
    got, resid = fit_exponentials(x, y)
    assert len(got) == len(pairs) and resid < 1e-8
    for (k, s), (k0, s0) in zip(got, pairs):
        assert k == pytest.approx(k0, rel=1e-5)
        assert s == pytest.approx(s0, rel=1e-4)


def test_fit_exponentials_gives_up_on_non_exponential_data():
    x = np.linspace(-10.0, -5.0, 101)
    with pytest.raises(FitError):
        fit_exponentials(x, np.sin(3 * x) + 2.0, max_order=2)


def test_recover_scattering_round_trip():
    sd = ScatteringData(K_GRID, sech_S(K_GRID.points))
    back = recover_scattering(build_F(sd, F_GRID), k_max=30.0, dk=0.02)
    assert back.J == 0
    assert np.max(np.abs(back.s_values - sd.s_values)) < 1e-5

    states = ((2.0, 1.5), (0.7, 0.4))
    F = FFunction.from_function(lambda x: discrete_part(states, x), x_neg=-10.0, x_max=20.0, h=0.05,
                                bound_states=states)
    back = recover_scattering(F, k_max=30.0, dk=0.02)
    assert np.allclose(back.bound_states, states, rtol=1e-6)
    assert np.max(np.abs(back.s_values - 1.0)) < 1e-6


def test_recover_scattering_rejects_inadmissible_data():
    neg = FFunction.from_function(lambda x: -np.exp(-x), x_neg=-10.0, x_max=20.0, h=0.05)
    with pytest.raises(InconsistentDataError):
        recover_scattering(neg, k_max=30.0, dk=0.02)
    with pytest.raises(ResolutionError):
        recover_scattering(neg, k_max=100.0)


def test_F_function_consistency_checks():
    g = Grid.from_step(-1.0, 1.0, 0.1)
    z = np.zeros(g.n + 1)
    with pytest.raises(ValueError):
        FFunction(g, z + 1.0, z, z)
    with pytest.raises(ValueError):
        FFunction(Grid.from_step(0.0, 1.0, 0.1), z, z, z)
    with pytest.raises(ValueError):
        FFunction(g, z + 0j, z, z)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.2, 5.0), min_size=0, max_size=3))
def test_F_is_real_for_conjugate_symmetric_data(kappas):
    sd = ScatteringData(K_GRID, blaschke(K_GRID.points, kappas))
    F = build_F(sd, F_GRID, validate_opts={"tol_cutoff": 10.0})
    assert np.all(np.isfinite(F.values))
    assert F.info["imag_residue"] <= 1e-8 * max(1.0, float(np.max(np.abs(F.f_s))))
