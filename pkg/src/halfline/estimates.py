"""Monotone envelopes of F and A, the two-sided bounds between them, and class diagnostics.

Profiles of F live on ``[0, 2X]``, profiles of A on the kernel grid ``[0, X]``;
bounds compare ``A``-side quantities at ``x`` with ``F``-side ones at ``2x``.
All integrability verdicts on truncated grids use the tail-exponent heuristic
of :func:`halfline.numerics.tail_verdict`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DomainRangeError
from .forward import JostData, TransformKernel
from .numerics import Grid, SampledFunction, differentiate, integrate, tail_integral, tail_verdict
from .reports import Check, Report
from .scattering import FFunction

__all__ = [
    "EstimateProfile",
    "sigma_profiles",
    "profile_F",
    "profile_A",
    "estimate_profile",
    "BOUND_NAMES",
    "check_two_sided_bounds",
    "compare_constants",
    "check_F_decay",
    "check_compact_support",
    "l2_functions",
    "check_L2_conditions",
]


@dataclass(frozen=True, eq=False)
class EstimateProfile:
    """F-side profiles on ``f_grid = [0, 2X]`` and A-side profiles on ``grid = [0, X]``.

    Either half may be missing (``None``) for a partial profile.
    """

    grid: Optional[Grid] = None
    f_grid: Optional[Grid] = None
    sigma_F: Optional[np.ndarray] = None
    sigma_1F: Optional[np.ndarray] = None
    sigma_2F: Optional[np.ndarray] = None
    sigma_A: Optional[np.ndarray] = None
    sigma_1A: Optional[np.ndarray] = None
    norm_Ax_1: Optional[np.ndarray] = None
    norm_Ay_1: Optional[np.ndarray] = None
    x0: Optional[float] = None
    fitted_constants: dict = field(default_factory=dict)

    def merge(self, other: "EstimateProfile") -> "EstimateProfile":
        kw = {}
        for name in ("grid", "f_grid", "sigma_F", "sigma_1F", "sigma_2F", "sigma_A", "sigma_1A",
                     "norm_Ax_1", "norm_Ay_1", "x0"):
            mine = getattr(self, name)
            kw[name] = mine if mine is not None else getattr(other, name)
        kw["fitted_constants"] = {**other.fitted_constants, **self.fitted_constants}
        return EstimateProfile(**kw)

    def at_double(self, arr: np.ndarray) -> np.ndarray:
        """F-side samples at ``2 x_i`` for every kernel node ``x_i``."""
        n = self.grid.n
        if self.f_grid.n < 2 * n or abs(self.f_grid.h - self.grid.h) > 1e-12 * self.grid.h:
            raise DomainRangeError("F profile does not cover [0, 2X] on the kernel step")
        return arr[0:2 * n + 1:2]


def sigma_profiles(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``sigma_F``, ``sigma_1F`` and ``sigma_2F`` of samples of F on ``[0, 2X]``.

    ``sigma_F`` is the running maximum of ``|F|`` from the right and
    ``sigma_1F`` its tail integral.  ``sigma_2F`` is the tail sum of ``|F(x_{i+1}) - F(x_i)|``,
    which is the tail integral of ``|F'|`` for the piecewise-linear
    interpolant and needs no differentiation of noisy data.
    """
    v = np.asarray(values, dtype=float)
    sF = np.maximum.accumulate(np.abs(v)[::-1])[::-1]
    s1 = tail_integral(sF, h)
    s1 = np.minimum.accumulate(np.maximum(s1, 0.0))
    s1[-1] = 0.0
    dv = np.abs(np.diff(v))
    s2 = np.concatenate((np.cumsum(dv[::-1])[::-1], [0.0]))
    return sF, s1, s2


def profile_F(F) -> EstimateProfile:
    """F-side half of the profile; ``x0`` is the contraction threshold."""
    f = F.positive() if isinstance(F, FFunction) else F
    sF, s1, s2 = sigma_profiles(f.values, f.grid.h)
    below = np.nonzero(s1[0::2] < 1.0)[0]
    x0 = float(below[0] * f.grid.h) if below.size else None
    return EstimateProfile(f_grid=f.grid, sigma_F=sF, sigma_1F=s1, sigma_2F=s2, x0=x0)


def _row_integrals(T: np.ndarray, h: float) -> np.ndarray:
    """Trapezoid integral of each row of an upper-triangular table over ``j >= i``."""
    n = T.shape[0]
    s = h * np.sum(np.triu(T), axis=1)
    d = np.diag(T)
    out = s - 0.5 * h * (d + T[:, -1])
    out[-1] = 0.0
    return out


def _kernel_derivatives(A: TransformKernel) -> tuple[np.ndarray, np.ndarray]:
    """Difference quotients ``A_x`` and ``A_y`` on the triangle ``j >= i`` (second order where possible)."""
    V = np.asarray(A.values)
    h = A.h
    n = V.shape[0]
    Ay = np.zeros_like(V)
    Ax = np.zeros_like(V)
    Ay[:, 1:-1] = (V[:, 2:] - V[:, :-2]) / (2 * h)
    Ay[:, -1] = (3 * V[:, -1] - 4 * V[:, -2] + V[:, -3]) / (2 * h)
    # on the diagonal the left neighbour is outside the triangle: forward stencil
    i = np.arange(n - 2)
    Ay[i, i] = (-3 * V[i, i] + 4 * V[i, i + 1] - V[i, i + 2]) / (2 * h)
    if n >= 2:
        # the last full row has two samples only
        Ay[n - 2, n - 2:] = (V[n - 2, n - 1] - V[n - 2, n - 2]) / h
        Ay[n - 1, n - 1] = 0.0
    Ax[1:-1, :] = (V[2:, :] - V[:-2, :]) / (2 * h)
    Ax[0, :] = (-3 * V[0, :] + 4 * V[1, :] - V[2, :]) / (2 * h)
    # on the diagonal the lower neighbour is outside the triangle: backward stencil
    j = np.arange(2, n)
    Ax[j, j] = (3 * V[j, j] - 4 * V[j - 1, j] + V[j - 2, j]) / (2 * h)
    if n >= 2:
        Ax[1, 1] = (V[1, 1] - V[0, 1]) / h
        Ax[0, 1] = (V[1, 1] - V[0, 1]) / h
    # total derivative of the diagonal fixes the corner
    ddiag = np.gradient(np.diag(V), h, edge_order=2)
    Ax[0, 0] = ddiag[0] - Ay[0, 0]
    Ax[n - 1, n - 1] = ddiag[-1] - Ay[n - 1, n - 1] if n > 1 else 0.0
    return np.triu(Ax), np.triu(Ay)


def profile_A(A: TransformKernel) -> EstimateProfile:
    """A-side half of the profile: row suprema, row L1 norms and L1 norms of ``A_x``, ``A_y``."""
    V = np.abs(np.asarray(A.values))
    h = A.h
    sA = np.max(V, axis=1)
    s1A = _row_integrals(V, h)
    Ax, Ay = _kernel_derivatives(A)
    return EstimateProfile(grid=A.grid, sigma_A=sA, sigma_1A=s1A,
                           norm_Ax_1=_row_integrals(np.abs(Ax), h), norm_Ay_1=_row_integrals(np.abs(Ay), h))


def estimate_profile(F, A: TransformKernel) -> EstimateProfile:
    return profile_A(A).merge(profile_F(F))


# --- two-sided bounds ------------------------------------------------------

BOUND_NAMES = (
    "sigma_A <= c sigma_F(2x)",
    "sigma_1A <= c sigma_1F(2x)",
    "|A_y|_1 <= c sigma_2F(2x)",
    "|A_x|_1 <= c [sigma_2F(2x) + sigma_1F(2x) sigma_F(2x)]",
    "sigma_F(2x) <= c sigma_A",
    "sigma_1F(2x) <= c sigma_1A",
)


def _ratio_constant(num: np.ndarray, den: np.ndarray, rel_floor: float):
    dmax = float(np.max(den)) if den.size else 0.0
    nmax = float(np.max(num)) if num.size else 0.0
    if dmax == 0.0:
        # 0/0 is a degenerate pass; a nonzero numerator over a zero denominator is not
        return (0.0 if nmax == 0.0 else np.inf), int(den.size), None
    keep = den >= rel_floor * dmax
    excluded = int(np.count_nonzero(~keep))
    ratio = num[keep] / den[keep]
    if ratio.size == 0:
        return 0.0, excluded, None
    j = int(np.argmax(ratio))
    return float(ratio[j]), excluded, j


def check_two_sided_bounds(ep: EstimateProfile, x_from: Optional[float] = None, c_max: float = 50.0,
                           rel_floor: float = 1e-12) -> tuple[Report, EstimateProfile]:
    """Fitted constants ``c* = max_x ratio`` over kernel nodes ``x >= x_from`` (default ``x0``).

    Points whose denominator is below ``rel_floor`` times its maximum are
    excluded and counted.  A check passes when ``c*`` is finite and at most
    ``c_max``.
    """
    if ep.grid is None or ep.f_grid is None:
        raise ValueError("both halves of the profile are required")
    x0 = ep.x0 if x_from is None else x_from
    if x0 is None:
        raise ValueError("no contraction threshold: sigma_1F(2x) >= 1 on the whole grid")
    sel = ep.grid.points >= x0 - 1e-12
    sF, s1, s2 = (ep.at_double(a)[sel] for a in (ep.sigma_F, ep.sigma_1F, ep.sigma_2F))
    sA, s1A, nAx, nAy = (a[sel] for a in (ep.sigma_A, ep.sigma_1A, ep.norm_Ax_1, ep.norm_Ay_1))
    pairs = ((sA, sF), (s1A, s1), (nAy, s2), (nAx, s2 + s1 * sF), (sF, sA), (s1, s1A))
    xs = ep.grid.points[sel]
    checks, consts, details = [], {}, {"x_from": x0, "excluded": {}, "argmax_x": {}}
    for name, (num, den) in zip(BOUND_NAMES, pairs):
        c, excluded, j = _ratio_constant(num, den, rel_floor)
        consts[name] = c
        details["excluded"][name] = excluded
        details["argmax_x"][name] = None if j is None else float(xs[den >= rel_floor * np.max(den)][j])
        checks.append(Check(name, c, c_max, bool(np.isfinite(c) and c <= c_max),
                            note="" if np.isfinite(c) else "ratio unbounded: inequality violation candidate"))
    s1_at = ep.at_double(ep.sigma_1F)
    i0 = int(round(x0 / ep.grid.h))
    minimal = bool(s1_at[i0] < 1.0 and np.all(s1_at[:i0] >= 1.0))
    checks.append(Check("threshold_minimal", float(s1_at[i0]), 1.0, minimal))
    return Report("two-sided bounds", tuple(checks), details), replace(ep, fitted_constants=consts)


def compare_constants(coarse: dict, fine: dict, rel_tol: float = 0.2) -> Report:
    """Stability of fitted constants under grid refinement (relative change within ``rel_tol``)."""
    checks = []
    for name in coarse:
        a, b = coarse[name], fine.get(name, np.nan)
        scale = max(abs(a), abs(b))
        change = 0.0 if scale == 0 else abs(a - b) / scale
        checks.append(Check(name, change, rel_tol, bool(change <= rel_tol)))
    return Report("constant stability", tuple(checks))


# --- decay / class diagnostics ----------------------------------------------

def check_F_decay(F, exponent_limit: float = -2.0, floor: float = 1e-6) -> Report:
    """Integrals entering the decay class of F on ``[0, 2X]`` with tail verdicts.

    Reports ``||F||_1``, ``||F||_inf``, ``int x |F'| dx`` and ``int sigma_F dx``.
    A tail below ``floor`` times the maximum of the integrand counts as
    numerically zero, so synthesis noise does not masquerade as slow decay.
    """
    f = F.positive() if isinstance(F, FFunction) else F
    x = f.x
    sF, _, _ = sigma_profiles(f.values, f.grid.h)
    dF = differentiate(f).values
    items = (
        ("F_L1", np.abs(f.values)),
        ("x_dF_L1", x * np.abs(dF)),
        ("sigma_F_L1", sF),
    )
    checks = []
    for name, g in items:
        value = float(integrate(SampledFunction(f.grid, g), 0.0, f.grid.x_max))
        v = tail_verdict(x, g, exponent_limit, floor * float(np.max(g)))
        checks.append(Check(name, value, exponent_limit, v.finite,
                            note=f"tail exponent {v.exponent:.3g}, tail max {v.tail_max:.3g}"))
    sup = float(np.max(np.abs(f.values)))
    checks.insert(1, Check("F_Linf", sup, float("inf"), bool(np.isfinite(sup))))
    return Report("F decay class", tuple(checks))


def check_compact_support(F, a: float, tol: float = 1e-5, delta: float = 0.05, relative: bool = True) -> Report:
    """Does F vanish beyond ``2a``?

    Reports ``max |F|`` on ``[2a(1 + delta), 2X]`` against ``tol`` (times
    ``max |F|`` on ``[0, 2X]`` when ``relative``) and the data-side radius
    ``a_hat = sup{x : |F(x)| > threshold} / 2``.

    Raises
    ------
    DomainRangeError
        If the grid does not extend past ``2a(1 + delta)``.
    """
    f = F.positive() if isinstance(F, FFunction) else F
    x, v = f.x, np.abs(f.values)
    lo = 2.0 * a * (1.0 + delta)
    if not lo < f.grid.x_max:
        raise DomainRangeError(f"F grid ends at {f.grid.x_max:g}, not beyond 2a(1+delta) = {lo:g}")
    scale = float(np.max(v)) if relative else 1.0
    thr = tol * scale
    beyond = float(np.max(v[x >= lo - 1e-12]))
    above = np.nonzero(v > thr)[0]
    a_hat = 0.5 * float(x[above[-1]]) if above.size else 0.0
    ok = beyond <= thr if scale > 0 else True
    checks = (Check("max_F_beyond_2a", beyond, thr, bool(ok)),)
    return Report("compact support", checks, {"a": a, "a_hat": a_hat, "window_start": lo, "max_F": float(np.max(v))})


def l2_functions(jd: JostData, Q: float) -> dict:
    """The three k-functions whose square integrability is tested.

    ``2ik[f - 1 + Q/(2ik)]``, ``k[1 - S + Q/(ik)]`` and ``k[|f|^2 - 1]``,
    written without the removable division at ``k = 0``.
    """
    k, f, S = jd.k, jd.f, jd.S
    return {
        "jost_asymptotics": 2j * k * (f - 1.0) + Q,
        "S_asymptotics": k * (1.0 - S) - 1j * Q,
        "modulus": k * (np.abs(f) ** 2 - 1.0),
    }


def check_L2_conditions(jd: JostData, Q: float, exponent_limit: float = -0.75, floor: float = 1e-10) -> Report:
    """Truncated L2 norm and tail verdict for each function of :func:`l2_functions`.

    Square integrability at infinity needs decay faster than ``|k|^-1/2``; the
    verdict asks for an envelope exponent below ``exponent_limit`` on both
    half-lines, or a tail below ``floor``.
    """
    k = jd.k
    pos, neg = k >= 0, k <= 0
    checks = []
    for name, g in l2_functions(jd, Q).items():
        norm = float(np.sqrt(integrate(SampledFunction(jd.k_grid, np.abs(g) ** 2), k[0], k[-1])))
        right = tail_verdict(k[pos], g[pos], exponent_limit, floor)
        left = tail_verdict(-k[neg][::-1], g[neg][::-1], exponent_limit, floor)
        ok = right.finite and left.finite
        checks.append(Check(name, norm, exponent_limit, bool(ok),
                            note=f"tail exponents {right.exponent:.3g} / {left.exponent:.3g}"))
    return Report("L2 conditions", tuple(checks), {"Q": Q})
