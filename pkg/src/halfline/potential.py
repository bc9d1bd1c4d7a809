"""Real potentials on a half-line grid, their decay functionals and class tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .numerics import Grid, SampledFunction, TailVerdict, integrate, tail_integral, tail_verdict

__all__ = [
    "Potential",
    "L11Report",
    "sigma_q",
    "check_L11",
    "total_charge",
    "from_function",
    "zero",
    "sech2_well",
    "gaussian_bump",
    "polynomial_bump",
    "narrow_bump",
]


@dataclass(frozen=True, eq=False)
class Potential:
    """Samples of a real potential ``q`` on ``[0, X]``.

    ``support_radius`` (``a``) asserts ``q(x_i) = 0`` for every node beyond ``a``.
    """

    q: SampledFunction
    support_radius: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.q.kind != "real":
            raise ValueError("potential must be real-valued")
        if abs(self.q.grid.x_min) > 1e-14:
            raise ValueError("potential grid must start at x = 0")
        if self.support_radius is not None:
            a = float(self.support_radius)
            if a < 0:
                raise ValueError("support radius must be nonnegative")
            beyond = self.x > a + 1e-9 * max(1.0, a)
            if np.any(self.values[beyond] != 0.0):
                raise ValueError(f"q is nonzero beyond the declared support radius {a}")

    @property
    def grid(self) -> Grid:
        return self.q.grid

    @property
    def x(self) -> np.ndarray:
        return self.q.x

    @property
    def values(self) -> np.ndarray:
        return self.q.values

    @property
    def x_max(self) -> float:
        return self.grid.x_max

    @classmethod
    def from_samples(cls, values, x_max: float, support_radius=None, label: str = "") -> "Potential":
        values = np.asarray(values, dtype=float)
        grid = Grid(0.0, x_max, values.size - 1)
        return cls(SampledFunction(grid, values), support_radius, label)


@dataclass(frozen=True)
class L11Report:
    finite: bool
    value: float
    exponent: float
    tail_max: float


def sigma_q(p: Potential) -> SampledFunction:
    """``sigma(x) = int_x^X |q(t)| dt`` on the potential grid."""
    s = tail_integral(np.abs(p.values), p.grid.h)
    # cumulative Simpson can undershoot by rounding at the far end
    s = np.maximum(np.minimum.accumulate(np.maximum(s, 0.0)), 0.0)
    s[-1] = 0.0
    return SampledFunction(p.grid, s)


def check_L11(p: Potential, x0: float = 0.0, exponent_limit: float = -2.0, floor: float = 1e-12) -> L11Report:
    """Weighted tail ``int_{x0}^X x|q| dx`` and a finiteness verdict.

    A truncated grid cannot prove integrability; the verdict fits the power
    law of ``x|q(x)|`` over the last decade of the grid and calls the class
    finite when that decays faster than ``x**exponent_limit`` or is below
    ``floor`` throughout.
    """
    if not 0.0 <= x0 < p.x_max:
        raise ValueError(f"x0 must lie in [0, {p.x_max})")
    xq = p.x * np.abs(p.values)
    value = float(integrate(SampledFunction(p.grid, xq), x0, p.x_max))
    v: TailVerdict = tail_verdict(p.x, xq, exponent_limit, floor)
    return L11Report(v.finite, value, v.exponent, v.tail_max)


def total_charge(p: Potential) -> float:
    """``Q = int_0^X q dx``."""
    return float(integrate(p.q, 0.0, p.x_max))


# --- closed-form potentials ------------------------------------------------

def from_function(func: Callable[[np.ndarray], np.ndarray], x_max: float = 15.0, h: float = 0.01,
                  support_radius=None, label: str = "") -> Potential:
    grid = Grid.from_step(0.0, x_max, h)
    return Potential(SampledFunction(grid, func(grid.points)), support_radius, label)


def zero(x_max: float = 15.0, h: float = 0.01) -> Potential:
    return from_function(lambda x: np.zeros_like(x), x_max, h, support_radius=0.0, label="zero")


def sech2_well(kappa: float = 1.0, depth: Optional[float] = None, x_max: float = 15.0,
               h: float = 0.01) -> Potential:
    """``-depth * sech^2(kappa x)``; ``depth`` defaults to ``2 kappa^2``."""
    if depth is None:
        depth = 2.0 * kappa * kappa
    return from_function(lambda x: -depth / np.cosh(kappa * x) ** 2, x_max, h,
                         label=f"sech2(kappa={kappa:g}, depth={depth:g})")


def gaussian_bump(amplitude: float = -1.0, center: float = 1.0, width: float = 0.3,
                  cutoff: Optional[float] = None, x_max: float = 15.0, h: float = 0.01) -> Potential:
    """Gaussian truncated to zero beyond ``cutoff`` (default ``center + 6 width``)."""
    if cutoff is None:
        cutoff = center + 6.0 * width

    def q(x):
        return np.where(x <= cutoff, amplitude * np.exp(-0.5 * ((x - center) / width) ** 2), 0.0)

    return from_function(q, x_max, h, support_radius=cutoff,
                         label=f"gaussian(A={amplitude:g}, c={center:g}, w={width:g})")


def polynomial_bump(a: float = 2.0, amplitude: float = -3.0, x_max: float = 15.0,
                    h: float = 0.01) -> Potential:
    """``amplitude * x^2 (a - x)^2`` on ``[0, a]``, zero beyond."""

    def q(x):
        return np.where(x <= a, amplitude * x * x * (a - x) ** 2, 0.0)

    return from_function(q, x_max, h, support_radius=a, label=f"poly_bump(a={a:g}, A={amplitude:g})")


def narrow_bump(area: float = -1.0, center: float = 1.0, width: float = 0.05,
                x_max: float = 15.0, h: float = 0.01) -> Potential:
    """Raised-cosine bump of given ``area`` on ``[center - width, center + width]``."""

    def q(x):
        inside = np.abs(x - center) <= width
        return np.where(inside, area / width * 0.5 * (1.0 + np.cos(np.pi * (x - center) / width)), 0.0)

    return from_function(q, x_max, h, support_radius=center + width,
                         label=f"narrow_bump(area={area:g}, c={center:g}, w={width:g})")
