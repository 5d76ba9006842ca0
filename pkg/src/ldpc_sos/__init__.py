"""LDPC degree-distribution design with sum-of-squares certified density evolution."""

__version__ = "0.1.0"

from .conic import SolverSolution, solve
from .density_evolution import (
    FeasibilityReport,
    check_feasibility_grid,
    de_recursion_bec,
    threshold_bec,
)
from .design import (
    DesignResult,
    certify,
    certify_bec,
    optimize_lambda_bec,
    optimize_lambda_bsc,
    optimize_lambda_bsc_grid_lp,
    optimize_lambda_grid_lp,
    optimize_rho_bec,
    optimize_rho_grid_lp,
    validate_design,
)
from .errors import DesignError, Infeasible, InputError, SolverFailure
from .joint import (
    JointDesignResult,
    JointDesignSpec,
    binary_entropy,
    design_joint_mac,
    mac_caps,
    slepian_wolf_bounds,
    sweep_joint_mac,
)
from .polynomials import CHECK, VARIABLE, DegreeDistribution, design_rate, from_degree_map, regular

__all__ = [
    "CHECK",
    "VARIABLE",
    "DegreeDistribution",
    "DesignError",
    "DesignResult",
    "FeasibilityReport",
    "Infeasible",
    "InputError",
    "JointDesignResult",
    "JointDesignSpec",
    "SolverFailure",
    "SolverSolution",
    "binary_entropy",
    "certify",
    "certify_bec",
    "check_feasibility_grid",
    "de_recursion_bec",
    "design_joint_mac",
    "design_rate",
    "from_degree_map",
    "mac_caps",
    "optimize_lambda_bec",
    "optimize_lambda_bsc",
    "optimize_lambda_bsc_grid_lp",
    "optimize_lambda_grid_lp",
    "optimize_rho_bec",
    "optimize_rho_grid_lp",
    "regular",
    "slepian_wolf_bounds",
    "solve",
    "sweep_joint_mac",
    "threshold_bec",
    "validate_design",
]
