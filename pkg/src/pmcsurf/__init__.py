"""Delaunay surfaces, Jacobi-operator degeneracy and prescribed mean curvature
perturbations on annular normal graphs.

The elliptic kernels run compiled when the Cython extension is built and fall
back to numpy otherwise; ``pmcsurf.elliptic.BACKEND`` reports which one is
active.
"""
__version__ = "0.1.0"

from .curvature_field import CurvatureField, eval_Q, parse_field
from .degeneracy import degeneracy_report, find_T0, kernel_basis, T1_set
from .delaunay import DelaunayParam, export_mesh, make_param, mean_curvature, roulette
from .errors import (DegenerateGraphError, DomainError, FieldError, NumericalFailure, ObstructionError,
                     PMCError, SolvabilityError)
from .jacobi_field import discrete_jacobi, fundamental_pair, monodromy, w_mode
from .melnikov import find_critical_points, melnikov_eval, melnikov_value, volume_functional
from .pmc_solver import (PMCSolution, independent_residual, inverse_norm_probe, jacobi_invert,
                         solve_axisymmetric, solve_lyapunov_schmidt, solve_nondegenerate,
                         solve_with_translation)

__all__ = [
    "CurvatureField", "DegenerateGraphError", "DelaunayParam", "DomainError", "FieldError",
    "NumericalFailure", "ObstructionError", "PMCError", "PMCSolution", "SolvabilityError",
    "T1_set", "degeneracy_report", "discrete_jacobi", "eval_Q", "export_mesh", "find_T0",
    "find_critical_points", "fundamental_pair", "independent_residual", "inverse_norm_probe",
    "jacobi_invert", "kernel_basis", "make_param", "mean_curvature", "melnikov_eval", "melnikov_value",
    "monodromy", "parse_field", "roulette", "solve_axisymmetric", "solve_lyapunov_schmidt",
    "solve_nondegenerate", "solve_with_translation", "volume_functional", "w_mode",
]
