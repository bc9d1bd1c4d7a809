"""End-to-end chains q -> S -> F -> A -> q and the inverse sub-steps, driven by a RunConfig."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimates, forward, marchenko, scattering
from .config import RunConfig
from .errors import ValidationError
from .forward import JostData, TransformKernel
from .numerics import Grid, SampledFunction, integrate
from .potential import Potential, check_L11, total_charge
from .reports import Check, Report
from .scattering import FFunction, ScatteringData

log = logging.getLogger(__name__)

__all__ = [
    "ReportedValidationError",
    "ForwardResult",
    "InversionResult",
    "run_forward",
    "check_scattering",
    "run_inversion",
    "kernel_to_full_F",
    "run_roundtrip",
    "potential_support_check",
]


class ReportedValidationError(ValidationError):
    """Validation failure that carries the diagnostic report."""

    def __init__(self, message: str, report: Report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class ForwardResult:
    kernel: TransformKernel
    jost: JostData
    data: ScatteringData
    report: Report
    norming_oracle: tuple = ()


@dataclass(frozen=True, eq=False)
class InversionResult:
    F: FFunction
    kernel: TransformKernel
    potential: Potential
    profile: estimates.EstimateProfile
    bounds: Report
    validation: Report
    extras: dict = field(default_factory=dict)


def run_forward(p: Potential, cfg: RunConfig) -> ForwardResult:
    """``q -> A -> (f, S, k_j, s_j)`` and the condition A/B report of the result."""
    t = cfg.tol
    kernel = forward.kernel_from_potential(p, tol_fixpoint=t("fixpoint"), tail_guard=t("tail_guard"))
    jd = forward.jost_function(kernel, cfg.k_grid, eps_zero=t("jost_zero"), eps_f0=t("f0_zero"))
    jd = forward.find_bound_states(jd, kernel, tol_root=t("root"), q_min=float(np.min(p.values)))
    jd = forward.norming_constants(jd, tol_im=t("norming_imag"))
    oracle = tuple(forward.norming_oracle(kernel, b.k) for b in jd.bound_states)
    report, sd = check_scattering(scattering.from_jost(jd), cfg)
    return ForwardResult(kernel, jd, sd, report, oracle)


def check_scattering(sd: ScatteringData, cfg: RunConfig) -> tuple[Report, ScatteringData]:
    t = cfg.tol
    return scattering.validate(sd, tol_unitary=t("unitarity"), tol_conj=t("conjugate_symmetry"),
                               tol_cutoff=t("cutoff"), tol_integer=t("integer"))


def _validate_for_inversion(sd: ScatteringData, cfg: RunConfig, levinson_strict: bool):
    report, sd = check_scattering(sd, cfg)
    fatal = list(scattering.CONDITION_A_EXACT)
    if levinson_strict:
        fatal += ["index_nonpositive", "levinson"]
    bad = [name for name in fatal if not report.check(name).verdict]
    if bad:
        raise ReportedValidationError(f"scattering data rejected: {', '.join(bad)}", report)
    for name in ("limit_at_cutoff", "index_nonpositive", "levinson"):
        c = report.check(name)
        if not c.verdict:
            log.warning("scattering check %s failed (value %s, threshold %s)", name, c.value, c.threshold)
    return report, sd


def run_inversion(sd: ScatteringData, cfg: RunConfig, levinson_strict: bool = True) -> InversionResult:
    """``S -> F -> A -> q`` with the two-sided bound diagnostics of the (F, A) pair.

    Raises
    ------
    ReportedValidationError
        If the exact condition-A identities fail, or (with ``levinson_strict``)
        the index check fails.
    """
    t = cfg.tol
    report, sd = _validate_for_inversion(sd, cfg, levinson_strict)
    F = scattering.build_F(sd, cfg.F_grid, tol_imag=t("imag_residue"),
                           validate_opts=dict(tol_unitary=t("unitarity"), tol_conj=t("conjugate_symmetry"),
                                              tol_cutoff=t("cutoff"), tol_integer=t("integer")))
    A = marchenko.solve_marchenko_all(F, marchenko.MarchenkoSolveOptions(tol_solve=t("solve")))
    q = marchenko.recover_potential(A)
    ep = estimates.estimate_profile(F, A)
    bounds, ep = estimates.check_two_sided_bounds(ep, c_max=t("bound_constant_max"), rel_floor=t("ratio_floor"))
    return InversionResult(F, A, q, ep, bounds, report)


def kernel_to_full_F(A: TransformKernel, cfg: RunConfig):
    """``A -> F`` on ``[0, 2X]``: iteration beyond the kernel threshold, inward Volterra solve below it."""
    x0, C = marchenko.kernel_threshold(A)
    h = A.h
    x_start = (int(np.floor(x0 / h + 1e-9)) + 1) * h if x0 > 0 else 0.0
    part = marchenko.kernel_to_F(A, x_start, x0=x0, tol=cfg.tol("kernel_to_F"))
    full = marchenko.extend_F_inward(A, part.f, 0.0) if x_start > 0 else part.f
    return full, part, x0, C


def _rel_l1(q: np.ndarray, qh: np.ndarray, grid: Grid) -> float:
    num = integrate(SampledFunction(grid, np.abs(q - qh)), 0.0, grid.x_max)
    den = integrate(SampledFunction(grid, np.abs(q)), 0.0, grid.x_max)
    return float(num / den) if den > 0 else float(num)


def run_roundtrip(p: Potential, cfg: RunConfig, levinson_strict: bool = True) -> dict:
    """``q -> S -> F -> A -> q_hat`` plus ``A -> F_hat`` and ``F -> S_hat``; returns errors and reports."""
    if abs(p.x_max - cfg.x_max) > 1e-9 or abs(p.grid.h - cfg.h) > 1e-12:
        cfg = cfg.__class__(**{**cfg.to_dict(), "x_max": p.x_max, "h": p.grid.h})
    t = cfg.tol
    fw = run_forward(p, cfg)
    inv = run_inversion(fw.data, cfg, levinson_strict)
    q, qh = p.values, inv.potential.values
    F_hat, part, x0k, C = kernel_to_full_F(fw.kernel, cfg)
    Fpos = inv.F.positive().values
    sd_hat = scattering.recover_scattering(inv.F, cfg.k_max, cfg.dk, rel_fit_tol=t("fit_residual"),
                                           zero_floor=t("fit_zero_floor"))
    S_err = float(np.max(np.abs(sd_hat.s_values - fw.data.s_values)))
    if sd_hat.J == fw.data.J:
        bd_err = max((max(abs(a[0] - b[0]), abs(a[1] - b[1])) for a, b in zip(sd_hat.bound_states,
                                                                              fw.data.bound_states)), default=0.0)
    else:
        bd_err = float("inf")
    errors = {
        "q_rel_L1": _rel_l1(q, qh, p.grid),
        "q_max": float(np.max(np.abs(q - qh))),
        "F_hat_max": float(np.max(np.abs(F_hat.values - Fpos))),
        "S_hat_max": S_err,
        "bound_data_max": bd_err,
        "J": fw.data.J,
        "J_hat": sd_hat.J,
    }
    Q = total_charge(p)
    l2 = estimates.check_L2_conditions(fw.jost, Q, exponent_limit=t("l2_exponent"))
    decay = estimates.check_F_decay(inv.F, exponent_limit=t("decay_exponent"))
    out = {"errors": errors, "forward": fw, "inversion": inv, "F_hat": F_hat, "kernel_to_F": part,
           "kernel_threshold": {"x0": x0k, "C": C}, "S_hat": sd_hat, "l2": l2, "F_decay": decay,
           "config": cfg}
    if p.support_radius is not None:
        out["support"] = potential_support_check(inv, p.support_radius, cfg)
    return out


def potential_support_check(inv: InversionResult, a: float, cfg: RunConfig) -> Report:
    """Compact support of F beyond ``2a`` and smallness of the recovered q beyond ``a(1 + margin)``."""
    t = cfg.tol
    rep = estimates.check_compact_support(inv.F, a, tol=t("support"), delta=t("support_margin"))
    x = inv.potential.x
    beyond = x >= a * (1.0 + 2.0 * t("support_margin")) - 1e-12
    qmax = float(np.max(np.abs(inv.potential.values[beyond]))) if np.any(beyond) else 0.0
    extra = Check("max_q_hat_beyond_a", qmax, 1e-3, qmax <= 1e-3)
    return Report(rep.title, rep.checks + (extra,), rep.details)


def l11_report(p: Potential, cfg: RunConfig) -> Report:
    lim = cfg.tol("decay_exponent")
    r = check_L11(p, exponent_limit=lim)
    return Report("potential class", (Check("x_q_L1", r.value, None, r.finite),
                                      Check("x_q_tail_exponent", r.exponent, lim, r.finite)))
