"""Run configuration: grids, tolerances and seed, loaded from a single JSON document."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Optional

from .errors import ResolutionError, ValidationError
from .numerics import Grid

__all__ = ["DEFAULT_TOLERANCES", "RunConfig", "config_from_dict"]

DEFAULT_TOLERANCES = MappingProxyType({
    # q -> A
    "fixpoint": 1e-13,
    "tail_guard": 1e-10,
    # Jost function and bound states
    "jost_zero": 1e-8,
    "f0_zero": 1e-6,
    "root": 1e-12,
    "norming_imag": 1e-8,
    # condition A / B
    "unitarity": 1e-6,
    "conjugate_symmetry": 1e-10,
    "cutoff": 1e-3,
    "integer": 1e-6,
    # S <-> F
    "imag_residue": 1e-8,
    "fit_residual": 1e-8,
    "fit_zero_floor": 1e-4,
    # F -> A and A -> F
    "solve": 1e-12,
    "kernel_to_F": 1e-13,
    # diagnostics
    "bound_constant_max": 50.0,
    "ratio_floor": 1e-12,
    "support": 1e-5,
    "support_margin": 0.05,
    "decay_exponent": -2.0,
    "l2_exponent": -0.75,
})


@dataclass(frozen=True)
class RunConfig:
    """Grid sizes and every tolerance used by the pipeline.

    The potential and kernel live on ``[0, x_max]`` with step ``h``, F on
    ``[x_neg, 2 x_max]`` with the same step, S on ``[-k_max, k_max]`` with
    step ``dk``.
    """

    x_max: float = 15.0
    h: float = 0.01
    k_max: float = 60.0
    dk: float = 0.01
    x_neg: float = -12.0
    tolerances: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0

    def __post_init__(self):
        for name in ("x_max", "h", "k_max", "dk"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"config: {name} must be positive")
        if not self.x_neg < 0:
            raise ValidationError("config: x_neg must be negative")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValidationError(f"config: unknown tolerances {sorted(unknown)}")
        object.__setattr__(self, "tolerances", MappingProxyType({**DEFAULT_TOLERANCES, **self.tolerances}))
        # grid compatibility: raises on non-dividing steps
        try:
            self.x_grid, self.F_grid, self.k_grid
        except ValueError as exc:
            raise ValidationError(f"config: {exc}") from exc
        if not self.k_grid.is_symmetric():
            raise ValidationError("config: 2 k_max / dk must be an even integer")
        reach = max(2.0 * self.x_max, -self.x_neg) * self.dk
        if reach > 1.0:
            raise ResolutionError(f"config: max|x| dk = {reach:.3g} > 1 violates the oscillation constraint")

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    @property
    def x_grid(self) -> Grid:
        return Grid.from_step(0.0, self.x_max, self.h)

    @property
    def F_grid(self) -> Grid:
        return Grid.from_step(self.x_neg, 2.0 * self.x_max, self.h)

    @property
    def k_grid(self) -> Grid:
        return Grid.from_step(-self.k_max, self.k_max, self.dk)

    def with_tolerances(self, **overrides: float) -> "RunConfig":
        return replace(self, tolerances={**self.tolerances, **overrides})

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("x_max", "h", "k_max", "dk", "x_neg", "seed")}
        d["tolerances"] = dict(self.tolerances)
        return d


def config_from_dict(doc: Mapping, base: Optional[RunConfig] = None) -> RunConfig:
    """Overlay ``doc`` (as found in a config file) onto ``base``."""
    base = base or RunConfig()
    known = {"x_max", "h", "k_max", "dk", "x_neg", "seed", "tolerances"}
    extra = set(doc) - known
    if extra:
        raise ValidationError(f"config: unknown keys {sorted(extra)}")
    kw = {}
    for k in ("x_max", "h", "k_max", "dk", "x_neg"):
        if k in doc:
            try:
                kw[k] = float(doc[k])
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"config: {k}: {exc}") from exc
    if "seed" in doc:
        kw["seed"] = int(doc["seed"])
    tols = dict(base.tolerances)
    for k, v in dict(doc.get("tolerances", {})).items():
        try:
            tols[k] = float(v)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"config: tolerances.{k}: {exc}") from exc
    kw["tolerances"] = tols
    return replace(base, **kw)
