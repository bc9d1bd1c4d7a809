"""Inversion core: F -> A by the Marchenko equation, A -> q, and the inverse step A -> F.

The Marchenko equation on the kernel grid ``x_i = i h``, ``i = 0..N``, is
discretized by the trapezoid rule (Nystrom).  With ``D = sqrt(w)`` the scaled
operator ``I + D H D`` (``H`` the Hankel matrix of F) is symmetric, and the
system for row ``i`` is its trailing block.  :func:`solve_marchenko_all`
obtains every row from one Cholesky factorization of the flipped matrix.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, lapack, lu_factor, lu_solve, solve_triangular

from .errors import (
    ContractionViolationError,
    DivergenceError,
    DomainRangeError,
    IterationCapError,
    SingularityError,
    ThresholdNotFoundError,
)
from .forward import TransformKernel
from .numerics import Grid, SampledFunction, differentiate, tail_integral
from .potential import Potential, sigma_q
from .scattering import FFunction

log = logging.getLogger(__name__)

__all__ = [
    "MarchenkoSolveOptions",
    "solve_marchenko",
    "solve_marchenko_all",
    "recover_potential",
    "contraction_threshold",
    "kernel_threshold",
    "PartialF",
    "kernel_to_F",
    "extend_F_inward",
]


@dataclass(frozen=True)
class MarchenkoSolveOptions:
    """``method`` is ``direct`` or ``iterative``; ``tikhonov`` > 0 switches on regularization."""

    tol_solve: float = 1e-12
    tikhonov: float = 0.0
    method: str = "direct"
    max_iter: int = 1000

    def __post_init__(self):
        if self.method not in ("direct", "iterative"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.tol_solve > 0:
            raise ValueError("tol_solve must be positive")
        if self.tikhonov < 0:
            raise ValueError("tikhonov parameter must be nonnegative")


def _positive_F(F) -> tuple[np.ndarray, float, int]:
    """F on ``[0, 2X]`` as an array, the step, and ``N`` with ``2X = 2 N h``."""
    f = F.positive() if isinstance(F, FFunction) else F
    if abs(f.grid.x_min) > 1e-12:
        raise DomainRangeError("F must be sampled from x = 0")
    n = f.grid.n
    if n % 2:
        raise DomainRangeError("F grid on [0, 2X] needs an even interval count")
    return np.asarray(f.values, dtype=float), f.grid.h, n // 2


def _trap_weights(m: int, h: float) -> np.ndarray:
    w = np.full(m, h)
    if m == 1:
        return np.zeros(1)
    w[0] = w[-1] = 0.5 * h
    return w


def _row_system(fpos: np.ndarray, h: float, N: int, i: int):
    idx = np.arange(i, N + 1)
    Hm = fpos[idx[:, None] + idx[None, :]]
    w = _trap_weights(idx.size, h)
    return np.eye(idx.size) + Hm * w[None, :], -fpos[i + idx]


def solve_marchenko(F, x: float, opts: MarchenkoSolveOptions = MarchenkoSolveOptions()) -> np.ndarray:
    """``A(x, y_j)`` for ``y_j`` in ``[x, X]`` from the Nystrom system at ``x``.

    Raises
    ------
    SingularityError
        If the discrete operator is singular to working precision.
    DivergenceError
        If the iterative method does not converge.
    """
    fpos, h, N = _positive_F(F)
    grid = Grid(0.0, N * h, N)
    i = grid.index_of(x)
    M, b = _row_system(fpos, h, N, i)
    if opts.method == "iterative":
        return _iterate_row(M, b, opts, i)
    if opts.tikhonov > 0:
        return np.linalg.solve(M.T @ M + opts.tikhonov * np.eye(b.size), M.T @ b)
    try:
        lu = lu_factor(M, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularityError(f"Marchenko system singular at x = {x:g}", row=i) from exc
    piv = np.abs(np.diag(lu[0]))
    if piv.min() <= np.finfo(float).eps * piv.max() * b.size:
        raise SingularityError(f"Marchenko system singular at x = {x:g}", row=i)
    return lu_solve(lu, b)


def _iterate_row(M: np.ndarray, b: np.ndarray, opts: MarchenkoSolveOptions, row: int) -> np.ndarray:
    B = M - np.eye(b.size)
    a = b.copy()
    for it in range(1, opts.max_iter + 1):
        new = b - B @ a
        upd = float(np.max(np.abs(new - a)))
        a = new
        if not np.isfinite(upd):
            break
        if upd <= opts.tol_solve * max(1.0, float(np.max(np.abs(a)))):
            return a
    raise DivergenceError(f"Marchenko iteration did not converge at row {row}", residual=upd, iterations=it)


def _all_rows_cholesky(fpos: np.ndarray, h: float, N: int):
    """All rows from one Cholesky factor of the flipped scaled operator."""
    idx = np.arange(N + 1)
    H = fpos[idx[:, None] + idx[None, :]]
    d = np.full(N + 1, np.sqrt(h))
    d[N] = np.sqrt(0.5 * h)
    K = np.eye(N + 1) + d[:, None] * H * d[None, :]
    P = K[::-1, ::-1]
    L, _ = cho_factor(P, lower=True, check_finite=False)
    L = np.tril(L)
    rcond, info = lapack.dpocon(L, float(np.max(np.sum(np.abs(P), axis=0))), uplo="L")
    Linv = solve_triangular(L, np.eye(N + 1), lower=True, check_finite=False)
    A = np.zeros((N + 1, N + 1))
    sqh = np.sqrt(h)
    for i in range(N):
        m = N + 1 - i
        p = (Linv[m - 1, :m] * Linv[m - 1, m - 1])[::-1]
        # first node of row i carries weight h/2 instead of h: rank-one correction
        c = -p * 2.0 / (sqh * (1.0 + p[0]))
        c[0] += 2.0 / (sqh * (1.0 + p[0]))
        A[i, i:] = -c / d[i:]
    A[N, N] = -fpos[2 * N]
    cond = 1.0 / rcond if rcond > 0 else np.inf
    return A, cond


def solve_marchenko_all(F, opts: MarchenkoSolveOptions = MarchenkoSolveOptions()) -> TransformKernel:
    """Transformation kernel on ``[0, X]`` with ``2X`` the right end of the F grid.

    The direct method factorizes once (Cholesky); if the operator is not
    positive definite it falls back to one LU solve per row.  The condition
    number of the ``x = 0`` operator, which bounds those of all rows, is
    stored in ``info["condition"]``.
    """
    fpos, h, N = _positive_F(F)
    grid = Grid(0.0, N * h, N)
    info = {"method": opts.method}
    if opts.method == "direct" and opts.tikhonov == 0:
        try:
            A, cond = _all_rows_cholesky(fpos, h, N)
            info["condition"] = cond
            info["factorization"] = "cholesky"
            if not np.isfinite(cond) or cond > 1.0 / (np.finfo(float).eps * (N + 1)):
                raise SingularityError(f"Marchenko operator singular (condition {cond:.3g})", row=0)
            return TransformKernel(grid, A, info)
        except LinAlgError:
            warnings.warn("Marchenko operator is not positive definite; solving rows by LU", RuntimeWarning,
                          stacklevel=2)
            info["factorization"] = "lu"
    A = np.zeros((N + 1, N + 1))
    for i in range(N + 1):
        try:
            A[i, i:] = solve_marchenko(F, grid.points[i], opts)
        except SingularityError as exc:
            raise SingularityError(f"row {i}: {exc}", row=i) from exc
    if opts.method == "direct":
        M0, _ = _row_system(fpos, h, N, 0)
        info["condition"] = float(np.linalg.cond(M0))
    return TransformKernel(grid, A, info)


def recover_potential(A: TransformKernel) -> Potential:
    """``q(x) = -2 d/dx A(x, x)``; the two end samples use one-sided stencils."""
    diag = SampledFunction(A.grid, A.diagonal)
    return Potential(SampledFunction(A.grid, -2.0 * differentiate(diag).values), label="recovered")


# --- thresholds ------------------------------------------------------------

def contraction_threshold(F) -> float:
    """Smallest grid ``x0 >= 0`` with ``sigma_1F(2 x0) < 1``.

    Raises
    ------
    ThresholdNotFoundError
        If ``sigma_1F >= 1`` everywhere on the grid.
    """
    from .estimates import sigma_profiles

    fpos, h, N = _positive_F(F)
    _, s1, _ = sigma_profiles(fpos, h)
    below = np.nonzero(s1[0::2] < 1.0)[0]
    if below.size == 0:
        raise ThresholdNotFoundError("sigma_1F(2x) >= 1 on the whole grid")
    # s1 is nonincreasing, so the first index is the minimal one
    return float(below[0] * h)


def kernel_threshold(A: TransformKernel, rel_floor: float = 1e-12) -> tuple[float, float]:
    """``x0`` with ``2 C int_x0^X sigma(t) dt < 1``, where ``|A(x,y)| <= C sigma((x+y)/2)``.

    ``sigma`` is the tail integral of ``|q|`` for the potential read off the
    kernel diagonal and ``C`` is fitted on the grid.  Returns ``(x0, C)``.
    """
    q = recover_potential(A)
    sig = sigma_q(q).values
    N = A.grid.n
    i, j = np.triu_indices(N + 1)
    s_mid = sig[(i + j) // 2]
    sel = s_mid > rel_floor * max(float(sig.max()), 1e-300)
    C = float(np.max(np.abs(A.values[i[sel], j[sel]]) / s_mid[sel])) if np.any(sel) else 0.0
    bound = 2.0 * C * tail_integral(sig, A.h)
    below = np.nonzero(bound < 1.0)[0]
    if below.size == 0:
        raise ThresholdNotFoundError("kernel contraction bound >= 1 on the whole grid")
    return float(below[0] * A.h), C


# --- A -> F ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PartialF:
    """F on ``[2x, 2X]`` from the kernel row at ``x`` with its iteration history."""

    f: SampledFunction
    x: float
    updates: tuple = ()
    info: dict = field(default_factory=dict)

    @property
    def observed_ratio(self) -> float:
        """Largest ratio of consecutive update norms above the rounding floor."""
        u = np.asarray(self.updates)
        ok = u[:-1] > 1e-13 * max(1.0, float(u[0])) if u.size > 1 else np.array([], bool)
        if not np.any(ok):
            return 0.0
        return float(np.max(u[1:][ok] / u[:-1][ok]))


def _apply_B(a: np.ndarray, F: np.ndarray, h: float) -> np.ndarray:
    """``(B F)(z_m) = int_{z_m}^{2X} A(x, v + x - z_m) F(v) dv`` by the trapezoid rule.

    ``a[l] = A(x, x + l h)``, ``F[m] = F(z_m)``, ``z_m = 2x + m h``; the kernel
    vanishes for ``l`` beyond ``a``.
    """
    M = F.size - 1
    la = a.size
    # corr[m] = sum_l a[l] F[m + l]
    corr = np.correlate(F, a, mode="full")[la - 1:la - 1 + M + 1]
    out = h * corr - 0.5 * h * a[0] * F
    m = np.arange(M + 1)
    end = M - m
    inside = end < la
    out[inside] -= 0.5 * h * a[end[inside]] * F[M]
    out[M] = 0.0
    return out


def kernel_to_F(A: TransformKernel, x: float, x0: Optional[float] = None, tol: float = 1e-13,
                max_iter: int = 500) -> PartialF:
    """Solve ``F(z) + int_z A(x, v + x - z) F(v) dv = -A(x, z - x)`` for ``z >= 2x``.

    Fixed-point iteration from ``F_0 = -A(x, z - x)``.  ``A(x, y)`` is taken
    as zero for ``y > X``.  ``x0`` defaults to :func:`kernel_threshold`.

    Raises
    ------
    ContractionViolationError
        If ``x <= x0`` or the update norm grows twice in a row.
    DivergenceError
        If ``max_iter`` is exhausted.
    """
    i = A.grid.index_of(x)
    if x0 is None:
        x0, _ = kernel_threshold(A)
    if x0 > 0 and not x > x0:
        raise ContractionViolationError(f"x = {x:g} does not exceed the contraction threshold {x0:g}")
    N, h = A.grid.n, A.h
    M = 2 * (N - i)
    a = np.asarray(A.row(i), dtype=float)
    rhs = np.zeros(M + 1)
    rhs[:a.size] = -a
    Fn = rhs.copy()
    updates = []
    for it in range(1, max_iter + 1):
        new = rhs - _apply_B(a, Fn, h)
        upd = float(np.max(np.abs(new - Fn)))
        Fn = new
        updates.append(upd)
        if len(updates) >= 3 and updates[-1] > updates[-2] > updates[-3]:
            raise ContractionViolationError(f"iteration diverges at x = {x:g} (updates {updates[-3:]})")
        if upd <= tol * max(1.0, float(np.max(np.abs(Fn)))):
            break
    else:
        raise DivergenceError(f"kernel_to_F did not converge in {max_iter} iterations", residual=upd,
                              iterations=max_iter)
    grid = Grid(2 * A.x[i], 2 * A.grid.x_max, M) if M >= 8 else None
    if grid is None:
        raise DomainRangeError("x too close to X: fewer than 8 intervals in [2x, 2X]")
    return PartialF(SampledFunction(grid, Fn), float(A.x[i]), tuple(updates), {"x0": x0, "iterations": it})


def extend_F_inward(A: TransformKernel, F_tail: SampledFunction, x: float = 0.0, tol: float = 1e-13,
                    max_iter: int = 10000) -> SampledFunction:
    """Extend F from ``[2 x0, 2X]`` down to ``[2x, 2X]`` using the kernel row at ``x <= x0``.

    On ``z < 2 x0`` the equation becomes a Volterra equation with the finite
    integration range ``[z, 2 x0]``; the known tail enters the right-hand side.
    Solved by successive approximation.

    Raises
    ------
    IterationCapError
        If the iteration has not settled after ``max_iter`` sweeps.
    """
    i = A.grid.index_of(x)
    h, N = A.h, A.grid.n
    z0 = F_tail.grid.x_min
    if abs(F_tail.grid.h - h) > 1e-12 * h or abs(F_tail.grid.x_max - 2 * A.grid.x_max) > 1e-9:
        raise DomainRangeError("F_tail must share the kernel step and end at 2X")
    M = 2 * (N - i)
    start = int(round((z0 - 2 * A.x[i]) / h))
    if abs(start * h - (z0 - 2 * A.x[i])) > 1e-9 * max(1.0, z0) or start < 0:
        raise DomainRangeError("F_tail must start at a grid node at or beyond 2x")
    a = np.asarray(A.row(i), dtype=float)
    rhs = np.zeros(M + 1)
    rhs[:a.size] = -a
    Fn = np.zeros(M + 1)
    Fn[start:] = F_tail.values
    if start > 0:
        for it in range(1, max_iter + 1):
            new = rhs[:start] - _apply_B(a, Fn, h)[:start]
            upd = float(np.max(np.abs(new - Fn[:start])))
            Fn[:start] = new
            if upd <= tol * max(1.0, float(np.max(np.abs(Fn)))):
                break
        else:
            raise IterationCapError(f"inward extension did not settle in {max_iter} sweeps (update {upd:.3g})")
    return SampledFunction(Grid(2 * A.x[i], 2 * A.grid.x_max, M), Fn)
