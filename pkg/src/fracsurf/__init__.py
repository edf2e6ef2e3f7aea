"""Fractional Laplace-Beltrami solver on closed surfaces.

Sinc quadrature of the Balakrishnan integral combined with a parametric
surface finite element method; includes the analytic zonal reference on
the unit sphere and a study harness for convergence-rate verification.
"""

from .fem import (
    FeFunction,
    FeSpace,
    assemble_load_sigma,
    assemble_mass,
    assemble_stiffness,
    evaluate,
    interpolate,
)
from .harness import (
    StudyConfig,
    run_convergence,
    run_sigma_study,
    run_sinc_study,
    run_solve,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .lifts import (
    IdentityLift,
    RadialLift,
    SixPatchLift,
    composite_jacobian,
    lift_point,
    make_lift,
    pullback,
    sigma_at,
    sigma_sup_deviation,
)
from .mesh import (
    MeshQuality,
    SurfaceMesh,
    build_initial_sphere_mesh,
    element_map,
    euler_characteristic,
    mesh_area,
    mesh_quality,
    refine_uniform,
    validate,
)
from .norms import fit_rates, h1_error, l2_error
from .sinc import SincRule, apply_fractional_inverse, choose_truncation, error_bound_rho, scalar_apply
from .solvers import CgConvergenceError, ShiftedFamily, SolverError, solve_cg
from .sphere import (
    ZonalSolutions,
    exact_gradient,
    exact_solution,
    legendre_pack,
    step_coefficients,
    step_eval,
)

__version__ = "0.1.0"
