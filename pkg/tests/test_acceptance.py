"""Acceptance gate: twelve end-to-end criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed together in the terminal
summary.  Criteria that the mathematics does not allow are still checked at
the stated tolerance and fail.
"""

from __future__ import annotations

import numpy as np
import pytest

from halfline import marchenko, pipeline
from halfline.estimates import BOUND_NAMES, compare_constants, l2_functions, sigma_profiles
from halfline.forward import TransformKernel, wronskian_residual
from halfline.numerics import Grid
from halfline.scattering import FFunction

from conftest import DEFAULT_H, HALF_H
from oracles import degenerate_kernel, degenerate_potential, sech_F, sech_jost

REFINEMENT_FACTOR = 3.5


# --- helpers -----------------------------------------------------------------

def _degenerate_errors(h: float) -> tuple[float, float]:
    """Max kernel error on the triangle and max interior potential error for ``F = 2 exp(-x)``."""
    F = FFunction.from_function(sech_F, x_neg=-12.0, x_max=30.0, h=h)
    A = marchenko.solve_marchenko_all(F)
    x = A.x
    X, Y = np.meshgrid(x, x, indexing="ij")
    upper = Y >= X
    a_err = float(np.max(np.abs(A.values - degenerate_kernel(X, Y))[upper]))
    q = marchenko.recover_potential(A).values
    q_err = float(np.max(np.abs(q - degenerate_potential(x))[1:-1]))
    return a_err, q_err


def _wronskian_metric(jd) -> float:
    return float(np.max(wronskian_residual(jd).values / (1.0 + np.abs(jd.k))))


def _jost_error(jd) -> float:
    return float(np.max(np.abs(jd.f - sech_jost(jd.k))))


def _admissibility(S: np.ndarray) -> tuple[float, float, float]:
    unit = float(np.max(np.abs(np.abs(S) - 1.0)))
    conj = float(np.max(np.abs(S[::-1] - np.conj(S))))
    cut = float(max(abs(S[0] - 1.0), abs(S[-1] - 1.0)))
    return unit, conj, cut


@pytest.fixture(scope="module")
def degenerate_errors():
    return {DEFAULT_H: _degenerate_errors(DEFAULT_H), HALF_H: _degenerate_errors(HALF_H)}


# --- criteria ----------------------------------------------------------------

def test_c01_zero_potential_chain(zero_forward, cfg, criterion):
    data = zero_forward.data
    inv = pipeline.run_inversion(data, cfg)
    s_dev = float(np.max(np.abs(data.s_values - 1.0)))
    f_max = float(np.max(np.abs(inv.F.values)))
    a_max = float(np.max(np.abs(inv.kernel.values)))
    q_max = float(np.max(np.abs(inv.potential.values)))
    ok = s_dev == 0.0 and data.J == 0 and f_max == 0.0 and a_max == 0.0 and q_max <= 1e-8
    assert criterion(1, ok, f"max|S-1|={s_dev:.2e} J={data.J} max|F|={f_max:.2e} "
                            f"max|A|={a_max:.2e} max|q_hat|={q_max:.2e} (<=1e-8)")


def test_c02_degenerate_kernel_oracle(degenerate_errors, criterion):
    a_err, q_err = degenerate_errors[DEFAULT_H]
    ok = a_err <= 1e-4 and q_err <= 5e-3
    assert criterion(2, ok, f"max|A-A_exact|={a_err:.3e} (<=1e-4)  max interior |q-q_exact|={q_err:.3e} (<=5e-3)")


def test_c03_forward_oracle_sech2(sech_roundtrip, criterion):
    fw = sech_roundtrip["forward"]
    f_err = _jost_error(fw.jost)
    states = fw.data.bound_states
    one_state = len(states) == 1
    k_ok = one_state and abs(states[0][0] - 1.0) <= 1e-4
    s_ok = one_state and abs(states[0][1] - 2.0) <= 1e-3
    oracle_ok = one_state and abs(states[0][1] - fw.norming_oracle[0]) <= 1e-3 * states[0][1]
    ok = f_err <= 5e-3 and one_state and k_ok and s_ok and oracle_ok
    found = ", ".join(f"(k={k:.6g}, s={s:.6g})" for k, s in states) or "none"
    assert criterion(3, ok, f"max|f-f_exact|={f_err:.3e} (<=5e-3)  bound states found: {found} "
                            f"(required exactly one at k=1, s=2)")


def test_c04_full_roundtrip_bump(bump_roundtrip, criterion):
    e = bump_roundtrip["errors"]
    ok = (e["q_rel_L1"] <= 0.02 and e["F_hat_max"] <= 1e-3 and e["S_hat_max"] <= 1e-3
          and e["bound_data_max"] <= 1e-4)
    assert criterion(4, ok, f"relL1={e['q_rel_L1']:.3e} (<=2e-2)  max|F-F_hat|={e['F_hat_max']:.3e} (<=1e-3)  "
                            f"max|S-S_hat|={e['S_hat_max']:.3e} (<=1e-3)  bound data={e['bound_data_max']:.3e} (<=1e-4)")


def test_c05_admissibility_of_every_S(zero_forward, sech_roundtrip, bump_roundtrip, well6_forward, well20_forward,
                                    criterion):
    sources = {
        "zero": zero_forward.data.s_values,
        "sech2": sech_roundtrip["forward"].data.s_values,
        "bump": bump_roundtrip["forward"].data.s_values,
        "well6": well6_forward.data.s_values,
        "well20": well20_forward.data.s_values,
        "bump S_hat": bump_roundtrip["S_hat"].s_values,
        "sech2 S_hat": sech_roundtrip["S_hat"].s_values,
    }
    worst = {"unit": (0.0, ""), "conj": (0.0, ""), "cut": (0.0, "")}
    for name, S in sources.items():
        for key, v in zip(("unit", "conj", "cut"), _admissibility(np.asarray(S))):
            if v >= worst[key][0]:
                worst[key] = (v, name)
    ok = worst["unit"][0] <= 1e-6 and worst["conj"][0] <= 1e-10 and worst["cut"][0] <= 1e-3
    assert criterion(5, ok, f"max||S|-1|={worst['unit'][0]:.2e} on {worst['unit'][1]} (<=1e-6)  "
                            f"max|S(-k)-conj S(k)|={worst['conj'][0]:.2e} (<=1e-10)  "
                            f"max|S(+-K)-1|={worst['cut'][0]:.3e} on {worst['cut'][1]} (<=1e-3)")


def test_c06_wronskian_identity(sech_roundtrip, sech_forward_half, bump_roundtrip, bump_roundtrip_half, criterion):
    pairs = {
        "sech2": (sech_roundtrip["forward"].jost, sech_forward_half.jost),
        "bump": (bump_roundtrip["forward"].jost, bump_roundtrip_half["forward"].jost),
    }
    parts, ok = [], True
    for name, (coarse, fine) in pairs.items():
        wc, wf = _wronskian_metric(coarse), _wronskian_metric(fine)
        ratio = wc / wf
        ok &= wc <= 1e-2 and wf <= 1e-2 and ratio >= REFINEMENT_FACTOR
        parts.append(f"{name}: {wc:.2e} -> {wf:.2e} (x{ratio:.2f})")
    assert criterion(6, ok, "max residual/(1+|k|) <= 1e-2, refinement >= 3.5x; " + "; ".join(parts))


def test_c07_levinson_index(zero_forward, sech_roundtrip, well20_forward, criterion):
    cases = {"zero": zero_forward, "sech2": sech_roundtrip["forward"], "two-state well": well20_forward}
    parts, ok = [], True
    for name, fw in cases.items():
        rep = fw.report
        raw = rep.details["kappa_raw"]
        J = fw.data.J
        expected = -2 * J - 1 if fw.jost.f0_vanishes else -2 * J
        integer = abs(raw - round(raw)) <= 1e-6
        ok &= integer and fw.data.index_kappa == expected
        parts.append(f"{name}: kappa={raw:.9g} J={J} expected {expected}")
    ok &= well20_forward.data.J == 2
    assert criterion(7, ok, "; ".join(parts))


def test_c08_compact_support_bump(bump_roundtrip, criterion):
    rep = bump_roundtrip["support"]
    fchk = rep.check("max_F_beyond_2a")
    qchk = rep.check("max_q_hat_beyond_a")
    assert rep.details["window_start"] == pytest.approx(4.2)
    ok = fchk.verdict and qchk.verdict
    assert criterion(8, ok, f"max|F| on [4.2, 2X]={fchk.value:.3e} (<= 1e-5 max|F| = {fchk.threshold:.3e})  "
                            f"max|q_hat| on [2.2, X]={qchk.value:.3e} (<=1e-3)  a_hat={rep.details['a_hat']:.4g}")


def test_c09_two_sided_bounds_suite(sech_roundtrip, sech_inversion_half, bump_roundtrip, bump_roundtrip_half,
                                    criterion):
    cases = {
        "sech2": (sech_roundtrip["inversion"], sech_inversion_half),
        "bump": (bump_roundtrip["inversion"], bump_roundtrip_half["inversion"]),
    }
    parts, ok = [], True
    for name, (coarse, fine) in cases.items():
        cc, cf = coarse.profile.fitted_constants, fine.profile.fitted_constants
        finite = all(np.isfinite(cc[n]) and cc[n] <= 50 and np.isfinite(cf[n]) and cf[n] <= 50 for n in BOUND_NAMES)
        stable = compare_constants(cc, cf, rel_tol=0.2)
        minimal = coarse.bounds.check("threshold_minimal").verdict and fine.bounds.check("threshold_minimal").verdict
        ok &= finite and stable.passed and minimal
        worst = max(c.value for c in stable.checks)
        parts.append(f"{name}: c*=[{', '.join(f'{cc[n]:.3g}' for n in BOUND_NAMES)}] "
                     f"max change {worst:.1%} x0={coarse.profile.x0:g}")
    assert criterion(9, ok, "; ".join(parts))


def test_c10_contraction_rate_oracle_pair(criterion):
    h, X = DEFAULT_H, 15.0
    grid = Grid.from_step(0.0, X, h)
    x = grid.points
    Xg, Yg = np.meshgrid(x, x, indexing="ij")
    A = TransformKernel(grid, np.triu(degenerate_kernel(Xg, Yg)))
    part = marchenko.kernel_to_F(A, 1.0)
    u = np.asarray(part.updates)
    live = u > 1e-13 * u[0]
    geometric = bool(np.all(np.diff(u[live]) < 0))
    _, s1, _ = sigma_profiles(sech_F(Grid.from_step(0.0, 2 * X, h).points), h)
    bound = float(s1[int(round(2.0 / h))]) + 0.05
    ratio = part.observed_ratio
    z = part.f.x
    f_err = float(np.max(np.abs(part.f.values - sech_F(z))))
    ok = geometric and ratio <= bound
    assert criterion(10, ok, f"observed ratio {ratio:.4f} (<= sigma_1F(2)+0.05 = {bound:.4f})  "
                             f"{u.size} iterations, monotone={geometric}  max|F_hat-F| on [2, 2X]={f_err:.2e}")


def test_c11_L2_conditions(bump_roundtrip, zero_forward, criterion):
    rep = bump_roundtrip["l2"]
    zero_funcs = l2_functions(zero_forward.jost, 0.0)
    zero_max = max(float(np.max(np.abs(g))) for g in zero_funcs.values())
    ok = rep.passed and zero_max == 0.0
    verdicts = ", ".join(f"{c.name}={'pass' if c.verdict else 'FAIL'}" for c in rep.checks)
    assert criterion(11, ok, f"bump: {verdicts}; q=0: max|g|={zero_max:.1e}")


def test_c12_convergence_order(degenerate_errors, sech_roundtrip, sech_forward_half, bump_roundtrip,
                               bump_roundtrip_half, criterion):
    ratios = {
        "kernel (2)": degenerate_errors[DEFAULT_H][0] / degenerate_errors[HALF_H][0],
        "potential (2)": degenerate_errors[DEFAULT_H][1] / degenerate_errors[HALF_H][1],
        "Jost (3)": _jost_error(sech_roundtrip["forward"].jost) / _jost_error(sech_forward_half.jost),
        "relL1 (4)": bump_roundtrip["errors"]["q_rel_L1"] / bump_roundtrip_half["errors"]["q_rel_L1"],
    }
    ok = all(r >= REFINEMENT_FACTOR for r in ratios.values())
    assert criterion(12, ok, f"h={DEFAULT_H} -> {HALF_H}: " + ", ".join(f"{k} x{v:.2f}" for k, v in ratios.items())
                     + " (>= 3.5)")
