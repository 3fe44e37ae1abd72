"""Primal-dual weak Galerkin finite elements for linear transport problems.

The package discretizes the first-order equation

    div(beta u) + c u = f   in Omega,      u = g   on the inflow boundary,

with a fully discontinuous primal unknown and a weak-function Lagrange
multiplier coupled through a symmetric saddle-point system.  Submodules:

- ``mesh``       triangulations of the benchmark domains, refinement,
                 inflow/outflow classification
- ``poly``       polynomial bases, quadrature, L2 projections
- ``weakspace``  degrees of freedom and the discrete weak gradient
- ``assembly``   local forms and the global saddle-point system
- ``solver``     sparse direct / iterative solution with residual checks
- ``analysis``   error norms, conservation checks, convergence orders
- ``fields``     closed-form coefficient fields and piecewise composition
- ``catalog``    the benchmark experiment catalog
- ``study``      refinement-study driver and CSV emission
- ``cli``        the ``pdwg`` command line tool
"""

from .mesh import (
    BoundaryClassification,
    ElementGeometry,
    Mesh,
    build_coarse_mesh,
    classify_boundary,
    element_geometry,
    refine_uniform,
)
from .weakspace import DofMap, PrimalFunction, WeakFunction
from .assembly import ProblemSpec, SaddleSystem, assemble
from .solver import Solution, SolverError, solve
from .catalog import catalog, get_experiment
from .study import StudyReport, emit_csv, emit_plot_data, run_study

__all__ = [
    "BoundaryClassification",
    "DofMap",
    "ElementGeometry",
    "Mesh",
    "PrimalFunction",
    "ProblemSpec",
    "SaddleSystem",
    "Solution",
    "SolverError",
    "StudyReport",
    "WeakFunction",
    "assemble",
    "build_coarse_mesh",
    "catalog",
    "classify_boundary",
    "element_geometry",
    "emit_csv",
    "emit_plot_data",
    "get_experiment",
    "refine_uniform",
    "run_study",
    "solve",
]

__version__ = "0.1.0"
