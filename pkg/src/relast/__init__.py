"""relast: linearized and nonlinear elasticity between Riemannian manifolds.

Bodies are charts of a manifold M deformed into an ambient manifold N with a
closed-form metric.  The package provides tensor and metric calculus,
kinematics, the Saint Venant-Kirchhoff law, P1 finite elements for the
linearized problem, a chord (fixed-Jacobian) Newton solver for the
nonlinear pure-Dirichlet problem, spectral Korn/Poincare estimates and a
small command-line driver.
"""

from .constitutive import MaterialModel
from .errors import (ContractionFailureError, InputError, NonConvergenceError,
                     NotPositiveDefiniteError, RelastError)
from .fem import assemble, solve_cg
from .forces import ForceModel, profile_field
from .geometry import (IdentityMap, LinearMap, PolarEmbedding, QuadraticMap, geodesic_exp,
                       make_metric)
from .mesh import Mesh, generate_mesh, unit_square
from .nonlinear import NonlinearProblem, chord_newton_solve, smallness_report

__version__ = "0.1.0"

__all__ = [
    "MaterialModel", "ForceModel", "profile_field", "Mesh", "generate_mesh", "unit_square",
    "make_metric", "IdentityMap", "LinearMap", "PolarEmbedding", "QuadraticMap", "geodesic_exp",
    "assemble", "solve_cg", "NonlinearProblem", "chord_newton_solve", "smallness_report",
    "RelastError", "InputError", "NonConvergenceError", "NotPositiveDefiniteError",
    "ContractionFailureError",
]
