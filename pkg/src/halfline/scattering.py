"""Scattering data, their admissibility checks, synthesis of F and the inverse step F -> S.

The F-function is ``F = F_s + F_d`` with the Fourier part
``F_s(x) = (1/2pi) int [1 - S(k)] exp(ikx) dk`` and the discrete part
``F_d(x) = sum_j s_j exp(-k_j x)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from math import factorial
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError, InconsistentDataError, ResolutionError, SynthesisError, ValidationError
from .numerics import Grid, SampledFunction, filon_integral, fourier_integrals
from .reports import Check, Report

log = logging.getLogger(__name__)

__all__ = [
    "ScatteringData",
    "FFunction",
    "from_jost",
    "winding_number",
    "validate",
    "discrete_part",
    "build_F",
    "fit_exponentials",
    "recover_scattering",
]


def _canonical_states(pairs) -> tuple:
    states = tuple(sorted(((float(k), float(s)) for k, s in pairs), key=lambda t: -t[0]))
    for (k1, _), (k2, _) in zip(states, states[1:]):
        if k1 == k2:
            raise InconsistentDataError(f"repeated bound state k = {k1}")
    return states


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """S(k) samples on a symmetric grid ``[-K, K]`` plus bound-state pairs ``(k_j, s_j)``.

    Bound states are stored in canonical order ``k_1 > k_2 > ...``.
    ``index_kappa`` is filled by :func:`validate`.
    """

    k_grid: Grid
    s_values: np.ndarray
    bound_states: tuple = ()
    index_kappa: Optional[int] = None

    def __post_init__(self):
        if not self.k_grid.is_symmetric():
            raise ValueError("k-grid must be symmetric about 0 with an even interval count")
        v = np.asarray(self.s_values, dtype=complex)
        if v.shape != (self.k_grid.n + 1,):
            raise ValueError(f"expected {self.k_grid.n + 1} S samples, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("S samples must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "s_values", v)
        object.__setattr__(self, "bound_states", _canonical_states(self.bound_states))

    @property
    def k(self) -> np.ndarray:
        return self.k_grid.points

    @property
    def J(self) -> int:
        return len(self.bound_states)

    @property
    def k_max(self) -> float:
        return self.k_grid.x_max

    @classmethod
    def free(cls, k_max: float = 60.0, dk: float = 0.01, bound_states: Sequence = ()) -> "ScatteringData":
        """``S == 1`` with optional bound states."""
        grid = Grid.from_step(-k_max, k_max, dk)
        return cls(grid, np.ones(grid.n + 1, dtype=complex), tuple(bound_states))


@dataclass(frozen=True, eq=False)
class FFunction:
    """Samples of ``F = F_s + F_d`` on ``[x_neg, x_max]`` with ``x_neg < 0``."""

    grid: Grid
    values: np.ndarray
    f_s: np.ndarray
    f_d: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.grid.x_min < 0:
            raise ValueError("F grid must extend to negative x")
        n = self.grid.n + 1
        arrs = []
        for name in ("values", "f_s", "f_d"):
            a = np.asarray(getattr(self, name))
            if np.iscomplexobj(a):
                raise ValueError(f"F.{name} must be real")
            a = a.astype(float).copy()
            if a.shape != (n,):
                raise ValueError(f"F.{name} must have {n} samples")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"F.{name} must be finite")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrs.append(a)
        mismatch = np.max(np.abs(arrs[0] - arrs[1] - arrs[2]))
        if mismatch > 1e-12 * max(1.0, np.max(np.abs(arrs[0]))):
            raise ValueError(f"F != F_s + F_d (mismatch {mismatch:.3g})")

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def zero_index(self) -> int:
        return self.grid.index_of(0.0)

    def positive(self) -> SampledFunction:
        """F restricted to ``[0, x_max]``."""
        i0 = self.zero_index
        return SampledFunction(Grid(0.0, self.grid.x_max, self.grid.n - i0), self.values[i0:])

    @classmethod
    def from_function(cls, func, x_neg: float = -12.0, x_max: float = 30.0, h: float = 0.01,
                      bound_states: Sequence = ()) -> "FFunction":
        """``F = func`` with ``F_d`` taken from ``bound_states`` and ``F_s = F - F_d``."""
        grid = Grid.from_step(x_neg, x_max, h)
        x = grid.points
        values = np.asarray(func(x), dtype=float)
        fd = discrete_part(_canonical_states(bound_states), x)
        return cls(grid, values, values - fd, fd)


def from_jost(jd) -> ScatteringData:
    """Scattering data of a forward computation (bound states need norming constants)."""
    pairs = []
    for b in jd.bound_states:
        if b.s is None:
            raise ValueError("bound states carry no norming constants; run norming_constants first")
        pairs.append((b.k, b.s))
    return ScatteringData(jd.k_grid, jd.S, tuple(pairs))


# --- conditions A and B ----------------------------------------------------

def winding_number(k_grid: Grid, S: np.ndarray, max_phase_step: float = np.pi / 2) -> float:
    """``(1/2pi)`` times the total change of ``arg S`` over the real line.

    Per-step increments are principal values and must stay below
    ``max_phase_step``.  The two pieces beyond ``+-K`` are closed along the
    shortest arc to ``S = 1``.
    """
    S = np.asarray(S, dtype=complex)
    if np.any(S == 0):
        raise ResolutionError("S vanishes on the grid; phase is undefined")
    d = np.angle(S[1:] / S[:-1])
    worst = float(np.max(np.abs(d))) if d.size else 0.0
    if worst >= max_phase_step:
        i = int(np.argmax(np.abs(d)))
        raise ResolutionError(f"phase of S jumps by {worst:.3g} rad near k = {k_grid.points[i]:.6g}; refine dk")
    total = np.angle(S[0]) + d.sum() - np.angle(S[-1])
    return float(total / (2.0 * np.pi))


def validate(sd: ScatteringData, tol_unitary: float = 1e-6, tol_conj: float = 1e-10,
             tol_cutoff: float = 1e-3, tol_integer: float = 1e-6,
             max_phase_step: float = np.pi / 2) -> tuple[Report, ScatteringData]:
    """Check condition A, compute the index and test condition B and the Levinson relation.

    Returns the report and a copy of ``sd`` with ``index_kappa`` set.  The
    Levinson branch is read off ``S(0)``: for real data ``S(0) = -1`` exactly
    when ``f(0) = 0``.
    """
    S = sd.s_values
    n = sd.k_grid.n
    unitarity = float(np.max(np.abs(np.abs(S) - 1.0)))
    conj = float(np.max(np.abs(S[::-1] - np.conj(S))))
    cutoff = float(max(abs(S[0] - 1.0), abs(S[-1] - 1.0)))
    min_pair = min((min(k, s) for k, s in sd.bound_states), default=float("inf"))
    kappa_raw = winding_number(sd.k_grid, S, max_phase_step)
    kappa = int(round(kappa_raw))
    integral = abs(kappa_raw - kappa) <= tol_integer
    f0_zero = bool(np.real(S[n // 2]) < 0)
    expected = -2 * sd.J - (1 if f0_zero else 0)
    checks = (
        Check("unitarity", unitarity, tol_unitary, unitarity <= tol_unitary),
        Check("conjugate_symmetry", conj, tol_conj, conj <= tol_conj),
        Check("limit_at_cutoff", cutoff, tol_cutoff, cutoff <= tol_cutoff),
        Check("bound_states_positive", min_pair, 0.0, min_pair > 0),
        Check("index_nonpositive", kappa, 0, integral and kappa <= 0,
              note="" if integral else f"winding {kappa_raw:.6g} is not an integer"),
        Check("levinson", kappa, expected, integral and kappa == expected,
              note="f(0) = 0 branch" if f0_zero else "f(0) != 0 branch"),
    )
    details = {"kappa_raw": kappa_raw, "J": sd.J, "f0_vanishes": f0_zero}
    return Report("scattering data", checks, details), replace(sd, index_kappa=kappa)


CONDITION_A_EXACT = ("unitarity", "conjugate_symmetry", "bound_states_positive")


# --- S -> F ----------------------------------------------------------------

def discrete_part(bound_states, x) -> np.ndarray:
    """``F_d(x) = sum_j s_j exp(-k_j x)``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k, s in bound_states:
        out += s * np.exp(-k * x)
    return out


def _asymptotic_fit(k: np.ndarray, G: np.ndarray, n_terms: int, fit_from: float) -> np.ndarray:
    """Real ``c_m`` with ``G(k) ~ sum_m c_m (1 + ik)^-m`` for ``|k| >= fit_from``."""
    sel = np.abs(k) >= fit_from
    if n_terms == 0 or sel.sum() < 2 * n_terms:
        return np.zeros(n_terms)
    u = 1.0 / (1.0 + 1j * k[sel])
    M = np.stack([u ** m for m in range(1, n_terms + 1)], axis=1)
    # real unknowns keep the subtracted part conjugate-symmetric
    Mr = np.concatenate((M.real, M.imag))
    rhs = np.concatenate((G[sel].real, G[sel].imag))
    c, *_ = np.linalg.lstsq(Mr, rhs, rcond=None)
    return c


def _asymptotic_transform(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(1/2pi) int sum_m c_m (1+ik)^-m exp(ikx) dk`` with the value at 0 taken from the right."""
    out = np.zeros_like(x)
    pos = x >= 0
    xp = x[pos]
    for m, cm in enumerate(c, start=1):
        out[pos] += cm * xp ** (m - 1) * np.exp(-xp) / factorial(m - 1)
    return out


def build_F(sd: ScatteringData, out_grid: Grid, n_asymptotic: int = 3, tol_imag: float = 1e-8,
            validate_opts: Optional[dict] = None) -> FFunction:
    """Synthesize F on ``out_grid`` from scattering data.

    The truncated Fourier integral of ``1 - S`` converges slowly because
    ``1 - S = O(1/k)``.  A few terms ``c_m (1+ik)^-m``, fitted on the outer
    half of the k-range, are subtracted and transformed exactly; the
    remainder goes through the trapezoid rule.  ``n_asymptotic = 0`` gives
    the plain truncated transform.

    Raises
    ------
    ValidationError
        If unitarity, conjugate symmetry or bound-state positivity fail.
    ResolutionError
        If ``max |x| dk > 1`` on the output grid.
    SynthesisError
        If the imaginary part of F_s exceeds ``tol_imag * max |F_s|``.
    """
    report, sd = validate(sd, **(validate_opts or {}))
    bad = [c for c in CONDITION_A_EXACT if not report.check(c).verdict]
    if bad:
        raise ValidationError(f"scattering data fail condition A checks: {', '.join(bad)}")
    k = sd.k
    x = out_grid.points
    G = 1.0 - sd.s_values
    c = _asymptotic_fit(k, G, n_asymptotic, 0.5 * sd.k_max)
    u = 1.0 / (1.0 + 1j * k)
    R = G - sum(cm * u ** m for m, cm in enumerate(c, start=1))
    fs_c = fourier_integrals(SampledFunction(sd.k_grid, R), x)
    fs = fs_c.real + _asymptotic_transform(c, x)
    # measured against all of F_s: the remainder alone may be pure rounding
    scale = float(np.max(np.abs(fs))) if x.size else 0.0
    imag = float(np.max(np.abs(fs_c.imag))) if x.size else 0.0
    if imag > tol_imag * max(scale, 1e-300) and imag > 1e-300:
        raise SynthesisError(f"imaginary residue {imag:.3g} of F_s exceeds {tol_imag:g} x max {scale:.3g}")
    fd = discrete_part(sd.bound_states, x)
    info = {"asymptotic_coefficients": [float(v) for v in c], "cutoff_residual": report.check("limit_at_cutoff").value,
            "kappa": sd.index_kappa, "imag_residue": imag}
    log.debug("build_F: c=%s imag=%.3g", c, imag)
    return FFunction(out_grid, fs + fd, fs, fd, info)


# --- F -> S ----------------------------------------------------------------

def _prony(t: np.ndarray, y: np.ndarray, order: int):
    """Rates ``k`` and amplitudes of ``y(t) ~ sum a_j exp(-k_j t)`` on uniform ``t`` (t[0] = 0)."""
    dt = t[1] - t[0]
    m = y.size
    if m < 2 * order + 1:
        return None
    H = np.stack([y[i:m - order + i] for i in range(order)], axis=1)
    coef, *_ = np.linalg.lstsq(H, y[order:], rcond=None)
    z = np.roots(np.concatenate(([1.0], -coef[::-1])))
    if np.any(np.abs(z.imag) > 1e-8 * np.abs(z)) or np.any(z.real <= 0):
        return None
    rates = -np.log(z.real) / dt
    V = np.exp(-np.outer(t, rates))
    amps, *_ = np.linalg.lstsq(V, y, rcond=None)
    return rates, amps


def fit_exponentials(x: np.ndarray, y: np.ndarray, max_order: int = 6, rel_tol: float = 1e-8):
    """Smallest-order exponential sum ``sum s_j exp(-k_j x)`` matching ``y`` to ``rel_tol * max|y|``.

    Prony's linear prediction gives starting values, a nonlinear least-squares
    pass refines them.  Returns ``(pairs, residual)`` with pairs sorted by
    decreasing ``k``.

    Raises
    ------
    FitError
        If no order up to ``max_order`` reaches the tolerance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ymax = float(np.max(np.abs(y)))
    if ymax == 0.0:
        return (), 0.0
    t = x - x[0]
    yn = y / ymax
    best = np.inf
    for order in range(1, max_order + 1):
        start = _prony(t, yn, order)
        if start is None:
            continue
        rates, amps = start

        def resid(p):
            return np.exp(-np.outer(t, p[:order])) @ p[order:] - yn

        sol = least_squares(resid, np.concatenate((rates, amps)), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = float(np.max(np.abs(sol.fun)))
        best = min(best, r)
        if r < rel_tol:
            ks, a = sol.x[:order], sol.x[order:]
            pairs = [(float(kj), float(aj * ymax * np.exp(kj * x[0]))) for kj, aj in zip(ks, a)]
            return tuple(sorted(pairs, key=lambda q: -q[0])), r
    raise FitError(f"no exponential sum of order <= {max_order} fits to {rel_tol:g} (best {best:.3g})")


def recover_scattering(F: FFunction, k_max: float = 60.0, dk: float = 0.01,
                       window: Optional[tuple] = None, rel_fit_tol: float = 1e-8, max_order: int = 6,
                       zero_floor: float = 1e-4) -> ScatteringData:
    """Invert the synthesis: bound states from the negative-x asymptotics, then S by Fourier transform.

    ``F_s`` on ``x < 0`` decays while ``F_d`` grows, so far to the left F is a
    pure exponential sum.  The fit uses ``window`` (default ``[x_neg, x_neg/2]``);
    ``J = 0`` is declared when ``max |F|`` there is below ``zero_floor`` times
    the global maximum.  ``1 - S(k) = int F_s(x) exp(-ikx) dx`` is computed by
    a quadratic Filon rule on each side of ``x = 0``, where ``F_s`` may jump.

    Raises
    ------
    FitError
        Exponential fit residual above ``rel_fit_tol``.
    InconsistentDataError
        A recovered ``k_j`` or ``s_j`` is not positive.
    ResolutionError
        If ``h K > pi`` (S beyond the Nyquist limit of the x-grid).
    """
    x, h = F.x, F.grid.h
    if h * k_max > np.pi:
        raise ResolutionError(f"h K = {h * k_max:.3g} > pi: x-grid too coarse for the requested k-range")
    x_neg = F.grid.x_min
    lo, hi = window if window is not None else (x_neg, 0.5 * x_neg)
    sel = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    if sel.sum() < 8:
        raise FitError("fit window holds fewer than 8 samples")
    fmax = float(np.max(np.abs(F.values)))
    wmax = float(np.max(np.abs(F.values[sel])))
    if wmax <= zero_floor * fmax or fmax == 0.0:
        pairs, resid = (), 0.0
    else:
        pairs, resid = fit_exponentials(x[sel], F.values[sel], max_order, rel_fit_tol)
    for k, s in pairs:
        if not (k > 0 and s > 0):
            raise InconsistentDataError(f"recovered bound state (k={k:.6g}, s={s:.6g}) is not admissible")
    if pairs and x_neg > -5.0 / pairs[-1][0]:
        log.warning("x_neg = %g is short of -5/k_min = %g", x_neg, -5.0 / pairs[-1][0])
    fs = F.values - discrete_part(pairs, x)
    i0 = F.zero_index
    left = fs[:i0 + 1].copy()
    if i0 >= 3:
        left[-1] = 3.0 * fs[i0 - 1] - 3.0 * fs[i0 - 2] + fs[i0 - 3]  # F_s(0-)
    right = fs[i0:]
    k_grid = Grid.from_step(-k_max, k_max, dk)
    kp = k_grid.points[k_grid.n // 2:]
    lam = -1j * kp
    G = filon_integral(left, h, lam, t0=x_neg) + filon_integral(right, h, lam, t0=0.0)
    S_pos = 1.0 - G
    S = np.concatenate((np.conj(S_pos[:0:-1]), S_pos))
    log.info("recover_scattering: J=%d fit residual %.3g", len(pairs), resid)
    return ScatteringData(k_grid, S, pairs)
