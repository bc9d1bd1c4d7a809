"""Half-line inverse scattering.

Forward map ``q -> A -> (S, k_j, s_j)``, synthesis of the F-function,
Marchenko inversion back to ``q``, the inverse sub-steps ``A -> F`` and
``F -> S``, and diagnostics for the admissibility conditions and the
two-sided bounds between F and the transformation kernel.
"""

import logging

from .errors import HalflineError, SolverError, ValidationError
from .kernels import BACKEND
from .numerics import Grid, SampledFunction
from .potential import Potential
from .forward import JostData, TransformKernel
from .scattering import FFunction, ScatteringData
from .estimates import EstimateProfile
from .marchenko import MarchenkoSolveOptions
from .config import RunConfig

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EstimateProfile",
    "FFunction",
    "Grid",
    "HalflineError",
    "JostData",
    "MarchenkoSolveOptions",
    "Potential",
    "RunConfig",
    "SampledFunction",
    "ScatteringData",
    "SolverError",
    "TransformKernel",
    "ValidationError",
]
