"""Trajectory-arclength descriptor fields for planar vector fields.

Compute M(x0, t0, tau) — the arclength of the trajectory through x0 over
[t0 - tau, t0 + tau] — on grids of initial conditions, differentiate the
resulting field, and locate stable/unstable manifolds of hyperbolic
trajectories as sign changes of dM/dx0 and dM/dy0.

A compiled extension handles the integration hot loop when available;
otherwise a NumPy fallback is selected at import time (see
``ldesc.BACKEND``).
"""

from ._backend import BACKEND
from .analyze import (Crossing, DerivativeField, ManifoldMask,
                      detect_manifolds, partial_derivative)
from .expr import ExprAst, ParseError, constant_fold, differentiate, evaluate
from .expr import parse as parse_expr
from .expr import pretty_print
from .fields import (SaddleParams, VectorFieldDef, from_expressions,
                     from_spec, linear_saddle, separable_incompressible)
from .integrate import (AdvanceResult, IntegratorConfig, advance, compute_m,
                        integrate_arclength)
from .io import (CsvFormatError, read_csv, write_csv, write_mask_csv,
                 write_pgm)
from .mfield import FieldMeta, GridSpec, ScalarField, compute_field
from .reference import (AnalyticSaddleFlow, QuadratureError, adaptive_simpson,
                        oracle_m)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # expressions
    "ExprAst", "ParseError", "parse_expr", "evaluate", "differentiate",
    "pretty_print", "constant_fold",
    # fields
    "SaddleParams", "VectorFieldDef", "linear_saddle",
    "separable_incompressible", "from_expressions", "from_spec",
    # integration
    "IntegratorConfig", "AdvanceResult", "advance", "integrate_arclength",
    "compute_m",
    # grids
    "GridSpec", "ScalarField", "FieldMeta", "compute_field",
    # analysis
    "DerivativeField", "Crossing", "ManifoldMask", "partial_derivative",
    "detect_manifolds",
    # oracle
    "AnalyticSaddleFlow", "QuadratureError", "adaptive_simpson", "oracle_m",
    # serialization
    "CsvFormatError", "read_csv", "write_csv", "write_pgm", "write_mask_csv",
]
