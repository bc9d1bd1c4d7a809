"""Forward map: potential -> transformation kernel -> Jost data -> S-matrix and bound states."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import (
    ClassViolationError,
    DegenerateZeroError,
    DivergenceError,
    DomainError,
    InconsistentDataError,
    NearZeroJostError,
)
from .numerics import Grid, SampledFunction, filon_integral, integrate, tail_decay_exponent, tail_integral
from .potential import Potential, check_L11

log = logging.getLogger(__name__)

__all__ = [
    "TransformKernel",
    "BoundState",
    "JostData",
    "kernel_from_potential",
    "neglected_tail",
    "jost_solution",
    "jost_function",
    "find_bound_states",
    "norming_constants",
    "norming_oracle",
    "wronskian_residual",
    "forward_map",
]


@dataclass(frozen=True, eq=False)
class TransformKernel:
    """Triangular table ``values[i, j] = A(x_i, x_j)`` for ``j >= i`` (zero below the diagonal).

    ``beyond``, when present, holds the strip past the square:
    ``beyond[i, m] = A(x_i, X + m h)`` for ``0 <= m <= N - i`` and zero
    otherwise.  A potential cut off at ``X`` has a kernel supported on
    ``x + y <= 2X``, so this strip completes the rows.
    """

    grid: Grid
    values: np.ndarray
    info: dict = field(default_factory=dict)
    beyond: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = self.grid.n + 1
        if v.shape != (n, n):
            raise ValueError(f"kernel table must be {n}x{n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel values must be finite")
        v = np.triu(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.beyond is not None:
            b = np.asarray(self.beyond, dtype=float)
            if b.shape != (n, n) or not np.all(np.isfinite(b)):
                raise ValueError(f"beyond strip must be a finite {n}x{n} table")
            b = np.fliplr(np.triu(np.fliplr(b)))
            b.setflags(write=False)
            object.__setattr__(self, "beyond", b)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()

    def row(self, i: int) -> np.ndarray:
        """``A(x_i, x_j)`` for ``j = i..N``."""
        return self.values[i, i:]

    def full_row(self, i: int) -> np.ndarray:
        """``A(x_i, y)`` on ``y = x_i, x_i + h, ...`` up to ``2X - x_i`` when the strip is known, else up to ``X``."""
        if self.beyond is None:
            return self.row(i)
        return np.concatenate((self.values[i, i:], self.beyond[i, 1:self.grid.n - i + 1]))

    @classmethod
    def zeros(cls, grid: Grid) -> "TransformKernel":
        return cls(grid, np.zeros((grid.n + 1, grid.n + 1)))


@dataclass(frozen=True)
class BoundState:
    """Zero ``f(i k) = 0`` with its derivative data and norming constant ``s``."""

    k: float
    fdot: complex
    fprime0: float
    s: Optional[float] = None


@dataclass(frozen=True, eq=False)
class JostData:
    k_grid: Grid
    f: np.ndarray
    fprime0: np.ndarray
    S: np.ndarray
    bound_states: tuple = ()
    f0_vanishes: bool = False

    @property
    def k(self) -> np.ndarray:
        return self.k_grid.points

    @property
    def J(self) -> int:
        return len(self.bound_states)


# --- q => A ----------------------------------------------------------------

def _half_grid(q: np.ndarray) -> np.ndarray:
    """Samples of q at step h/2: nodes copied, midpoints by 4-point cubic interpolation."""
    n = q.size - 1
    out = np.empty(2 * n + 1)
    out[::2] = q
    if n < 3:
        out[1::2] = 0.5 * (q[:-1] + q[1:])
        return out
    left = 3.0 * q[0] - 3.0 * q[1] + q[2]
    right = 3.0 * q[-1] - 3.0 * q[-2] + q[-3]
    qm1 = np.concatenate(([left], q[:-2]))
    qp2 = np.concatenate((q[2:], [right]))
    out[1::2] = (-qm1 + 9.0 * q[:-1] + 9.0 * q[1:] - qp2) / 16.0
    return out


def neglected_tail(p: Potential) -> float:
    """Estimate of ``int_X^inf |q|`` from a power-law extrapolation of the last decade."""
    absq = np.abs(p.values)
    if absq[-1] == 0.0:
        return 0.0
    exponent, _ = tail_decay_exponent(p.x, absq)
    if exponent >= -1.0:
        return float("inf")
    return float(p.x_max * absq[-1] / (-exponent - 1.0))


def kernel_from_potential(p: Potential, tol_fixpoint: float = 1e-13, max_iter: int = 500,
                          tail_guard: float = 1e-10, require_L11: bool = True) -> TransformKernel:
    """Solve the transformation-kernel Volterra equation by successive approximation.

    The iteration runs on the characteristic grid ``u = (x+y)/2``,
    ``v = (y-x)/2`` with step ``h/2`` and starts from the first term
    ``A_0(x, y) = 1/2 int_{(x+y)/2}^X q``.  Integrals beyond ``X`` are dropped,
    which is only legitimate when the neglected tail of ``|q|`` is below
    ``tail_guard``.
    """
    if require_L11:
        rep = check_L11(p)
        if not rep.finite:
            raise ClassViolationError(
                f"potential {p.label!r} fails the L_11 tail test (exponent {rep.exponent:.3g})")
    tail_est = neglected_tail(p)
    if tail_est >= tail_guard:
        raise ClassViolationError(
            f"neglected tail of |q| beyond X={p.x_max} estimated at {tail_est:.3g} >= {tail_guard:g}")
    h = p.grid.h
    delta = 0.5 * h
    qh = _half_grid(p.values)
    tail = tail_integral(qh, delta, rule="trapezoid")
    M = qh.size - 1
    B = np.tril(np.broadcast_to(0.5 * tail[:, None], (M + 1, M + 1))).copy()
    history = []
    scale = max(1.0, float(np.max(np.abs(B))))
    for it in range(1, max_iter + 1):
        upd = kernels.volterra_sweep(B, qh, tail, delta)
        history.append(upd)
        if upd <= tol_fixpoint * scale:
            break
    else:
        raise DivergenceError(
            f"Volterra iteration did not converge in {max_iter} steps (last update {history[-1]:.3g})",
            residual=history[-1], iterations=max_iter)
    N = p.grid.n
    I, Jx = np.triu_indices(N + 1)
    A = np.zeros((N + 1, N + 1))
    A[I, Jx] = B[I + Jx, Jx - I]
    # strip y in (X, 2X - x]: u = (x + y)/2 stays inside the table
    Ib, Mb = np.nonzero(np.fliplr(np.triu(np.ones((N + 1, N + 1), dtype=bool))))
    beyond = np.zeros((N + 1, N + 1))
    beyond[Ib, Mb] = B[Ib + N + Mb, N + Mb - Ib]
    log.debug("kernel_from_potential: %d sweeps, backend %s", len(history), kernels.BACKEND)
    return TransformKernel(p.grid, A, {"iterations": len(history), "updates": history,
                                       "backend": kernels.BACKEND}, beyond=beyond)


# --- Jost solution ---------------------------------------------------------

def _as_rate(k) -> np.ndarray:
    """``lam = i k`` for real k or k = i kappa with kappa > 0."""
    k = np.asarray(k)
    if np.iscomplexobj(k):
        re, im = k.real, k.imag
        offaxis = (re != 0) & (im != 0)
        if np.any(offaxis):
            raise DomainError("complex k off the real and imaginary axes is not supported")
        if np.any(im < 0):
            raise DomainError("imaginary k = i kappa needs kappa > 0")
    return 1j * k.astype(complex)


def _modulated(kernel: TransformKernel, i: int, lam: np.ndarray) -> np.ndarray:
    """``m(x_i, k) = 1 + int_0^{L} A(x_i, x_i + t) exp(lam t) dt`` over the known row length ``L``."""
    row = kernel.full_row(i)
    if row.size < 2:
        return np.ones(lam.shape, dtype=complex)
    return 1.0 + filon_integral(row, kernel.h, lam)


def jost_solution(kernel: TransformKernel, x: float, k):
    """``f(x, k) = exp(ikx) + int_x^Y A(x, y) exp(iky) dy`` with ``Y`` the end of the known row."""
    lam = _as_rate(k)
    i = kernel.grid.index_of(x)
    val = np.exp(lam * kernel.x[i]) * _modulated(kernel, i, lam)
    return val if val.ndim else complex(val)


def _jost_derivative0(kernel: TransformKernel, lam: np.ndarray, m0=None) -> np.ndarray:
    """``f'(0, k)`` from a three-point one-sided difference of the modulated solution."""
    h = kernel.h
    if m0 is None:
        m0 = _modulated(kernel, 0, lam)
    m1 = _modulated(kernel, 1, lam)
    m2 = _modulated(kernel, 2, lam)
    return lam * m0 + (-3.0 * m0 + 4.0 * m1 - m2) / (2.0 * h)


def jost_function(kernel: TransformKernel, k_grid: Grid, eps_zero: float = 1e-8,
                  eps_f0: float = 1e-6) -> JostData:
    """Jost function, ``f'(0, k)`` and ``S(k) = f(-k)/f(k)`` on a symmetric k-grid.

    Values are computed for ``k >= 0`` and mirrored by conjugation, so
    ``f(-k) = conj f(k)`` holds exactly.  When ``|f(0)| < eps_f0`` the zero
    energy point is treated as a resonance and ``S(0)`` is set to its limit -1.
    """
    if not k_grid.is_symmetric():
        raise ValueError("k-grid must be symmetric about 0")
    k = k_grid.points
    half = k_grid.n // 2
    kp = k[half:]
    lam = 1j * kp
    m0 = _modulated(kernel, 0, lam)
    fp_pos = _jost_derivative0(kernel, lam, m0)
    f_pos = m0
    f = np.concatenate((np.conj(f_pos[:0:-1]), f_pos))
    fprime0 = np.concatenate((np.conj(fp_pos[:0:-1]), fp_pos))
    absf = np.abs(f)
    nonzero_k = np.abs(k) > 0
    if np.any(absf[nonzero_k] < eps_zero):
        kbad = k[nonzero_k][np.argmin(absf[nonzero_k])]
        raise NearZeroJostError(f"|f(k)| < {eps_zero:g} at real k = {kbad:.6g}; S is ill-defined")
    f0 = f[half]
    f0_vanishes = bool(abs(f0) < eps_f0)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.conj(f) / f
    if f0_vanishes:
        S[half] = -1.0
    return JostData(k_grid, f, fprime0, S, (), f0_vanishes)


# --- bound states ----------------------------------------------------------

def _g(kernel: TransformKernel, kappa) -> np.ndarray:
    """``g(kappa) = f(i kappa)``, real for a real kernel."""
    lam = -np.asarray(kappa, dtype=float).astype(complex)
    return np.real(_modulated(kernel, 0, np.atleast_1d(lam)))


def find_bound_states(jd: JostData, kernel: TransformKernel, tol_root: float = 1e-12,
                      kappa_min: float = 1e-3, kappa_step: float = 0.01, kappa_max: Optional[float] = None,
                      q_min: Optional[float] = None, deriv_step: float = 1e-4,
                      eps_deriv: float = 1e-10) -> JostData:
    """Zeros of ``g(kappa) = f(i kappa)`` on ``(kappa_min, kappa_max]``.

    Scan with step ``kappa_step``, refine bracketed sign changes to
    ``tol_root``.  ``kappa_max`` defaults to ``1.1 sqrt(max(0, -min q)) + 0.5``
    with ``q`` recovered from the kernel diagonal unless ``q_min`` is given.
    ``f'(0, i k_j)`` comes from the x-difference stencil; for deep states it
    is small against the O(h^2) kernel error and needs a finer grid.
    """
    if kappa_max is None:
        if q_min is None:
            q_min = float(np.min(-2.0 * np.gradient(kernel.diagonal, kernel.h, edge_order=2)))
        kappa_max = 1.1 * np.sqrt(max(0.0, -q_min)) + 0.5
    n_scan = max(2, int(np.ceil((kappa_max - kappa_min) / kappa_step)) + 1)
    scan = np.linspace(kappa_min, kappa_max, n_scan)
    gv = _g(kernel, scan)
    g0 = float(np.real(jd.f[jd.k_grid.n // 2]))
    if not jd.f0_vanishes and g0 * gv[0] < 0:
        warnings.warn(f"sign change of f(i kappa) between 0 and kappa_min={kappa_min:g}: "
                      "a bound state may lie below the scan resolution", RuntimeWarning, stacklevel=2)
    roots = []
    for a, b, ga, gb in zip(scan[:-1], scan[1:], gv[:-1], gv[1:]):
        if ga == 0.0:
            roots.append(a)
        elif ga * gb < 0:
            roots.append(brentq(lambda s: _g(kernel, s)[0], a, b, xtol=tol_root, rtol=4 * np.finfo(float).eps))
    merged = []
    for r in sorted(roots, reverse=True):
        if merged and abs(merged[-1] - r) < 10 * tol_root:
            continue
        merged.append(r)
    states = []
    for kj in merged:
        gp = (_g(kernel, kj + deriv_step)[0] - _g(kernel, kj - deriv_step)[0]) / (2 * deriv_step)
        if abs(gp) < eps_deriv:
            raise DegenerateZeroError(f"f(i kappa) has a multiple zero near kappa = {kj:.8g}")
        fdot = -1j * gp
        fp0 = _jost_derivative0(kernel, np.array([-kj + 0j]))[0]
        states.append(BoundState(float(kj), complex(fdot), float(np.real(fp0))))
    return replace(jd, bound_states=tuple(states))


def norming_constants(jd: JostData, tol_im: float = 1e-8) -> JostData:
    """``s_j = -2 i k_j / (f'(0, i k_j) fdot(i k_j))`` for every bound state."""
    out = []
    for bs in jd.bound_states:
        s = -2j * bs.k / (bs.fprime0 * bs.fdot)
        if abs(s.imag) > tol_im * max(abs(s), 1e-300):
            raise InconsistentDataError(f"norming constant at k={bs.k:.8g} is complex: {s}")
        if not s.real > 0:
            raise InconsistentDataError(f"norming constant at k={bs.k:.8g} is not positive: {s.real}")
        out.append(replace(bs, s=float(s.real)))
    return replace(jd, bound_states=tuple(out))


def norming_oracle(kernel: TransformKernel, kappa: float) -> float:
    """``1 / int_0^X f(x, i kappa)^2 dx`` evaluated directly on the grid."""
    lam = np.array([-kappa + 0j])
    vals = np.array([np.real(np.exp(lam[0] * x) * _modulated(kernel, i, lam)[0])
                     for i, x in enumerate(kernel.x)])
    return 1.0 / float(integrate(SampledFunction(kernel.grid, vals * vals), 0.0, kernel.grid.x_max))


def wronskian_residual(jd: JostData) -> SampledFunction:
    """``|f'(0,k) f(-k) - f'(0,-k) f(k) - 2ik|`` on the k-grid."""
    f, fp, k = jd.f, jd.fprime0, jd.k
    res = np.abs(fp * f[::-1] - fp[::-1] * f - 2j * k)
    return SampledFunction(jd.k_grid, res)


def forward_map(p: Potential, k_max: float = 60.0, dk: float = 0.01, **opts):
    """Convenience chain ``q -> A -> (f, S, bound states, norming constants)``."""
    kopts = {k: opts.pop(k) for k in ("tol_fixpoint", "max_iter", "tail_guard") if k in opts}
    kernel = kernel_from_potential(p, **kopts)
    k_grid = Grid.from_step(-k_max, k_max, dk)
    jd = jost_function(kernel, k_grid, **{k: opts.pop(k) for k in ("eps_zero", "eps_f0") if k in opts})
    tol_im = opts.pop("tol_im", 1e-8)
    jd = find_bound_states(jd, kernel, q_min=float(np.min(p.values)), **opts)
    jd = norming_constants(jd, tol_im=tol_im)
    return kernel, jd
