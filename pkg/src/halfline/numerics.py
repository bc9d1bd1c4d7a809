"""Uniform grids, quadrature, differentiation and Fourier-type integrals.

Everything here works on uniformly sampled data.  The oscillatory integrals
come in two flavours:

* :func:`fourier_integral` -- plain trapezoid rule over a symmetric k-grid,
  used for the synthesis of F from 1 - S(k).  On a uniform grid the rule is
  spectrally accurate for smooth integrands, provided the oscillation is
  resolved (|x| dk <= 1).
* :func:`filon_integral` -- piecewise-quadratic Filon rule for integrals of
  the form ``int a(t) exp(lam t) dt`` with arbitrary complex ``lam``.  The
  exponential is integrated exactly, so accuracy does not degrade with
  |lam| h.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson

from .errors import DomainRangeError, ResolutionError

__all__ = [
    "Grid",
    "SampledFunction",
    "integrate",
    "tail_integral",
    "differentiate",
    "fourier_integral",
    "fourier_integrals",
    "filon_integral",
    "tail_decay_exponent",
    "TailVerdict",
    "tail_verdict",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = x_min + i*h``, ``i = 0..n``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"grid needs an integer interval count >= 8, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @classmethod
    def from_step(cls, x_min: float, x_max: float, h: float) -> "Grid":
        n = int(round((x_max - x_min) / h))
        if abs(n * h - (x_max - x_min)) > 1e-9 * max(1.0, abs(x_max - x_min)):
            raise ValueError(f"step {h} does not divide [{x_min}, {x_max}]")
        return cls(x_min, x_max, n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n + 1)

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        """Index of grid node ``x``; raises if ``x`` is not a node."""
        s = (x - self.x_min) / self.h
        i = int(round(s))
        if abs(s - i) > tol or i < 0 or i > self.n:
            raise DomainRangeError(f"x={x} is not a node of {self}")
        return i

    def is_symmetric(self) -> bool:
        return abs(self.x_min + self.x_max) <= 1e-12 * max(1.0, self.x_max) and self.n % 2 == 0


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples of a real or complex function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.iscomplexobj(v):
            v = v.astype(float)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("samples must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def kind(self) -> str:
        return "complex" if np.iscomplexobj(self.values) else "real"

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, x):
        """Linear interpolation inside the grid."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.grid.x_min - 1e-12) or np.any(x > self.grid.x_max + 1e-12):
            raise DomainRangeError("evaluation point outside grid")
        if self.kind == "complex":
            return np.interp(x, self.x, self.values.real) + 1j * np.interp(x, self.x, self.values.imag)
        return np.interp(x, self.x, self.values)


def integrate(f: SampledFunction, a: float, b: float):
    """Integral of ``f`` over ``[a, b]``.

    Composite Simpson over the whole nodes inside ``[a, b]`` when their
    interval count is even, composite trapezoid otherwise.  Off-grid endpoints
    are handled by a trapezoid on the partial cell with linearly interpolated
    end values.
    """
    g = f.grid
    if a > b:
        raise DomainRangeError(f"need a <= b, got [{a}, {b}]")
    eps = 1e-12 * max(1.0, abs(g.x_max), abs(g.x_min))
    if a < g.x_min - eps or b > g.x_max + eps:
        raise DomainRangeError(f"[{a}, {b}] not inside [{g.x_min}, {g.x_max}]")
    if a == b:
        return 0.0 * f.values[0]
    x, v, h = f.x, f.values, g.h
    ia = int(np.ceil((a - g.x_min) / h - 1e-9))
    ib = int(np.floor((b - g.x_min) / h + 1e-9))
    if ia > ib:  # both ends inside one cell
        fa, fb = f(a), f(b)
        return 0.5 * (b - a) * (fa + fb)
    core_v = v[ia:ib + 1]
    m = ib - ia
    if m == 0:
        core = 0.0 * v[0]
    elif m % 2 == 0:
        core = simpson(core_v, dx=h)
    else:
        core = h * (core_v.sum() - 0.5 * (core_v[0] + core_v[-1]))
    # signed partial cells: an endpoint snapped onto a nearby node still counts exactly
    fa = f(min(max(a, g.x_min), g.x_max))
    fb = f(min(max(b, g.x_min), g.x_max))
    left = 0.5 * (x[ia] - a) * (fa + v[ia]) if x[ia] != a else 0.0
    right = 0.5 * (b - x[ib]) * (fb + v[ib]) if b != x[ib] else 0.0
    return core + left + right


def tail_integral(values: np.ndarray, h: float, rule: str = "simpson") -> np.ndarray:
    """``T_i = int_{x_i}^{x_n} g dx`` for every node, accumulated from the right."""
    values = np.asarray(values)
    if rule == "trapezoid":
        rev = cumulative_trapezoid(values[::-1], dx=h, initial=0.0)
        return rev[::-1].copy()
    if values.size < 3:
        out = np.zeros_like(values)
        if values.size == 2:
            out[0] = 0.5 * h * (values[0] + values[1])
        return out
    rev = cumulative_simpson(values[::-1], dx=h, initial=0.0)
    return rev[::-1].copy()


def differentiate(f: SampledFunction) -> SampledFunction:
    """Central differences inside, second-order one-sided stencils at both ends."""
    if f.grid.n < 4:
        raise ValueError("differentiate needs at least 4 intervals")
    return SampledFunction(f.grid, np.gradient(f.values, f.grid.h, edge_order=2))


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def fourier_integral(g: SampledFunction, x: float) -> complex:
    """``(1/2pi) int g(k) exp(ikx) dk`` over the symmetric k-grid of ``g``."""
    return complex(fourier_integrals(g, np.array([x]))[0])


def fourier_integrals(g: SampledFunction, xs, chunk: int = 256) -> np.ndarray:
    """Vectorized :func:`fourier_integral` over many evaluation points."""
    grid = g.grid
    if not grid.is_symmetric():
        raise ValueError("k-grid must be symmetric about 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    dk = grid.h
    if xs.size and np.max(np.abs(xs)) * dk > 1.0 + 1e-12:
        raise ResolutionError(
            f"|x| dk = {np.max(np.abs(xs)) * dk:.3g} > 1; refine the k-grid or shrink the x-range")
    k = grid.points
    wg = _trapezoid_weights(grid.n, dk) * g.values
    out = np.empty(xs.size, dtype=complex)
    for s in range(0, xs.size, chunk):
        xc = xs[s:s + chunk]
        out[s:s + chunk] = np.exp(1j * np.outer(xc, k)) @ wg
    return out / (2.0 * np.pi)


# --- Filon quadrature -----------------------------------------------------

_SERIES_TERMS = 40


def _moments(z: np.ndarray, b: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``int_0^b tau^p exp(z tau) dtau`` for p = 0, 1, 2 (complex ``z``)."""
    z = np.asarray(z, dtype=complex)
    out = [np.empty_like(z) for _ in range(3)]
    small = np.abs(z) * b <= 2.0
    if np.any(small):
        zs = z[small]
        for p in range(3):
            acc = np.zeros_like(zs)
            term_pow = np.ones_like(zs)
            for m in range(_SERIES_TERMS):
                acc += term_pow * (b ** (p + m + 1) / (factorial(m) * (p + m + 1)))
                term_pow = term_pow * zs
            out[p][small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        e = np.exp(zb * b)
        m0 = (e - 1.0) / zb
        m1 = (b * e - m0) / zb
        m2 = (b * b * e - 2.0 * m1) / zb
        out[0][big], out[1][big], out[2][big] = m0, m1, m2
    return out[0], out[1], out[2]


def _lagrange_weights(z: np.ndarray, lo: float, hi: float):
    """``int_lo^hi L_j(tau) exp(z tau) dtau`` for the quadratic Lagrange basis on nodes 0, 1, 2."""
    a = _moments(z, hi)
    if lo > 0:
        c = _moments(z, lo)
        a = tuple(ai - ci for ai, ci in zip(a, c))
    m0, m1, m2 = a
    w0 = 0.5 * (m2 - 3.0 * m1 + 2.0 * m0)
    w1 = -m2 + 2.0 * m1
    w2 = 0.5 * (m2 - m1)
    return w0, w1, w2


def filon_integral(values, h: float, lam, t0: float = 0.0, chunk: int = 2048) -> np.ndarray:
    """``int_{t0}^{t0 + n h} a(t) exp(lam t) dt`` with ``a`` interpolated piecewise quadratically.

    ``values`` holds ``a`` at ``t0 + j h`` (j = 0..n).  ``lam`` may be a scalar
    or an array of complex rates; the result has the shape of ``lam``.  For an
    odd interval count the final interval reuses the last three nodes.
    """
    a = np.asarray(values, dtype=float)
    lam_arr = np.asarray(lam, dtype=complex)
    shape = lam_arr.shape
    lam_flat = lam_arr.ravel()
    n = a.size - 1
    if n < 1:
        return np.zeros(shape, dtype=complex)
    if n == 1:
        z = lam_flat * h
        # linear rule on a single interval
        m0, m1, _ = _moments(z, 1.0)
        res = h * np.exp(lam_flat * t0) * (a[0] * (m0 - m1) + a[1] * m1)
        return res.reshape(shape)
    n_even = n if n % 2 == 0 else n - 1
    t = t0 + h * np.arange(n + 1)
    even_inner = a[2:n_even:2]
    odd = a[1:n_even:2]
    out = np.empty(lam_flat.size, dtype=complex)
    for s in range(0, lam_flat.size, chunk):
        lc = lam_flat[s:s + chunk]
        z = lc * h
        w0, w1, w2 = _lagrange_weights(z, 0.0, 2.0)
        e_even = np.exp(np.outer(lc, t[2:n_even:2]))
        e_odd = np.exp(np.outer(lc, t[1:n_even:2]))
        ez = np.exp(-z)
        acc = a[0] * w0 * np.exp(lc * t[0])
        acc = acc + (e_even @ even_inner) * (w2 * ez * ez + w0)
        acc = acc + (e_odd @ odd) * (w1 * ez)
        acc = acc + a[n_even] * w2 * np.exp(lc * t[n_even] - 2.0 * z)
        if n_even != n:
            v0, v1, v2 = _lagrange_weights(z, 1.0, 2.0)
            base = np.exp(lc * t[n - 2])
            acc = acc + base * (a[n - 2] * v0 + a[n - 1] * v1 + a[n] * v2)
        out[s:s + chunk] = h * acc
    return out.reshape(shape)


# --- tail-decay heuristic -------------------------------------------------

@dataclass(frozen=True)
class TailVerdict:
    """Outcome of the truncated-grid integrability heuristic."""

    finite: bool
    exponent: float
    tail_max: float
    limit: float


def tail_decay_exponent(x, g) -> tuple[float, float]:
    """Fitted power-law exponent of ``|g|`` over the last decade of ``x``.

    The fit uses the running envelope ``sup_{x' >= x} |g(x')|`` so that
    oscillating tails are judged by their amplitude.  Returns
    ``(exponent, max |g| on the decade)``; the exponent is ``-inf`` when the
    envelope vanishes identically.
    """
    x = np.asarray(x, dtype=float)
    g = np.abs(np.asarray(g))
    x_end = x[-1]
    sel = (x >= x_end / 10.0) & (x > 0)
    xs, gs = x[sel], g[sel]
    if xs.size < 3:
        raise ValueError("need at least three samples in the last decade")
    env = np.maximum.accumulate(gs[::-1])[::-1]
    tail_max = float(env[0]) if env.size else 0.0
    pos = env > 0
    if pos.sum() < 3:
        return float("-inf"), tail_max
    slope = np.polyfit(np.log(xs[pos]), np.log(env[pos]), 1)[0]
    if pos.sum() < xs.size:  # envelope hits exact zero: faster than any power
        return float("-inf"), tail_max
    return float(slope), tail_max


def tail_verdict(x, g, exponent_limit: float = -2.0, floor: float = 1e-12) -> TailVerdict:
    """Finite iff the tail is below ``floor`` or decays faster than ``x**exponent_limit``."""
    exponent, tail_max = tail_decay_exponent(x, g)
    finite = tail_max < floor or exponent < exponent_limit
    return TailVerdict(bool(finite), exponent, tail_max, exponent_limit)
