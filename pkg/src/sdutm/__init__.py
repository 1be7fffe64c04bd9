"""Exact-in-time solutions of semidiscretized linear evolution problems on an interval."""
from .contour import build_contour, heat4_dirichlet_integral, heat_dirichlet_integral, ls_dirichlet_integral, solve_integral
from .dispersion import make_dispersion, validate_discretization
from .errors import SdutmError
from .fd import Stepper, assemble_system, fd_solve
from .oracles import expm_solve, ode_oracle
from .problem import (
    AdvectionLeft,
    AdvectionRight,
    BCKind,
    Grid,
    Heat,
    InitialCondition,
    LinearSchrodinger,
    ProblemSpec,
    Side,
    SolutionField,
    StencilKind,
    TimeFunction,
    dirichlet,
    grid_from_h,
    make_grid,
    neumann,
    sample_initial,
)
from .registry import REGISTRY, get_problem
from .series import solve_series
from .smalltime import smalltime_coefficients, smalltime_solve

__version__ = "0.1.0"
