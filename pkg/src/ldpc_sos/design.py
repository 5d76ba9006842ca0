"""Optimal-rate degree-distribution design.

Three SOS-certified problems share one code path:

* ``bec_lambda`` -- maximize ``sum lambda_i / i`` for fixed rho on the BEC,
  constraint ``x - eps lambda(1 - rho(1 - x)) >= 0`` on [0, 1];
* ``bec_rho`` -- minimize ``sum rho_j / j`` for fixed lambda on the BEC,
  constraint ``rho(1 - eps lambda(x)) - (1 - x) >= 0`` on [0, 1];
* ``bsc_lambda`` -- maximize ``sum lambda_i / i`` for fixed rho on the BSC,
  constraint on [0, p].

Each also has a grid-LP analogue that enforces the constraint only at
grid points.  The LP optimum bounds the SOS optimum from the favourable
side, which makes it a useful independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .conic import OPTIMAL, PRIMAL_INFEASIBLE, SolverSolution, solve
from .density_evolution import (
    AffinePolynomial,
    FeasibilityReport,
    FreeSide,
    bec_dual_margin,
    bec_margin,
    bsc_margin,
    build_de_poly_bec,
    build_de_poly_bec_dual,
    build_de_poly_bsc,
    check_feasibility_grid,
)
from .errors import CrossoverOutOfRange, EpsilonOutOfRange, Infeasible, InputError, SolverFailure
from .polynomials import CHECK, VARIABLE, DegreeDistribution, design_rate, from_vector
from .sos import GramMatrix, assemble_program, build_sos_feasibility, decision_values, gram_block, lift_to_real_line, original_objective

BEC_LAMBDA = "bec_lambda"
BEC_RHO = "bec_rho"
BSC_LAMBDA = "bsc_lambda"
PROBLEMS = (BEC_LAMBDA, BEC_RHO, BSC_LAMBDA)

VALIDATION_GRID = 10_000
VALIDATION_TOL = 1e-6
DROP_BELOW = 1e-10
NONUNIQUE_NOTE = "optimal distributions need not be unique; the solver's point is returned as-is"


@dataclass(frozen=True, eq=False)
class DesignResult:
    problem: str
    method: str  # "sos" or "grid_lp"
    distribution: DegreeDistribution
    fixed_side: DegreeDistribution
    channel_param: float
    design_rate: float
    objective: float
    certificate: GramMatrix | None
    validation: FeasibilityReport
    solver_stats: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def lam(self) -> DegreeDistribution:
        return self.distribution if self.distribution.kind == VARIABLE else self.fixed_side

    @property
    def rho(self) -> DegreeDistribution:
        return self.distribution if self.distribution.kind == CHECK else self.fixed_side

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "method": self.method,
            "distribution": self.distribution.to_json(),
            "fixed_side": self.fixed_side.to_json(),
            "channel_param": self.channel_param,
            "design_rate": self.design_rate,
            "objective": self.objective,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "validation": self.validation.to_json(),
            "solver_stats": self.solver_stats,
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DesignResult":
        cert = obj.get("certificate")
        return cls(
            problem=obj["problem"],
            method=obj.get("method", "sos"),
            distribution=DegreeDistribution.from_json(obj["distribution"]),
            fixed_side=DegreeDistribution.from_json(obj["fixed_side"]),
            channel_param=float(obj["channel_param"]),
            design_rate=float(obj["design_rate"]),
            objective=float(obj["objective"]),
            certificate=None if cert is None else GramMatrix.from_json(cert),
            validation=FeasibilityReport.from_json(obj["validation"]),
            solver_stats=obj.get("solver_stats", {}),
            notes=obj.get("notes", []),
        )


def constraint_margin(problem: str, lam: DegreeDistribution, rho: DegreeDistribution, param: float):
    """``(callable, interval_end)`` for the constraint of ``problem``, evaluated directly."""
    if problem == BEC_LAMBDA:
        return bec_margin(lam, rho, param), 1.0
    if problem == BEC_RHO:
        return bec_dual_margin(lam, rho, param), 1.0
    if problem == BSC_LAMBDA:
        return bsc_margin(lam, rho, param), param
    raise InputError(f"unknown problem {problem!r}")


def validate_design(result: DesignResult, grid_size: int = VALIDATION_GRID,
                    tol: float = VALIDATION_TOL) -> FeasibilityReport:
    f, a = constraint_margin(result.problem, result.lam, result.rho, result.channel_param)
    return check_feasibility_grid(f, a, grid_size, tol)


def _check_param(problem: str, param: float) -> None:
    if problem == BSC_LAMBDA:
        if not 0.0 < param < 0.5:
            raise CrossoverOutOfRange(f"p_crossover={param} not in (0, 0.5)")
    elif not 0.0 < param < 1.0:
        raise EpsilonOutOfRange(f"epsilon={param} not in (0, 1)")


def _affine_constraint(problem, fixed, free, param) -> AffinePolynomial:
    if problem == BEC_LAMBDA:
        return build_de_poly_bec(free, fixed, param)
    if problem == BEC_RHO:
        return build_de_poly_bec_dual(fixed, free, param)
    return build_de_poly_bsc(free, fixed, param)


def _objective_weights(max_degree: int) -> np.ndarray:
    return 1.0 / np.arange(2, max_degree + 1)


def _finish(problem, method, dist, fixed, param, cert, solver_stats, grid_size, validation_tol):
    lam, rho = (dist, fixed) if dist.kind == VARIABLE else (fixed, dist)
    f, a = constraint_margin(problem, lam, rho, param)
    report = check_feasibility_grid(f, a, grid_size, validation_tol)
    return DesignResult(problem, method, dist, fixed, param, design_rate(lam, rho), dist.integral(),
                        cert, report, solver_stats, [NONUNIQUE_NOTE])


def _sos_design(problem: str, fixed: DegreeDistribution, param: float, max_degree: int,
                tol: float = 1e-8, max_iter: int = 200, grid_size: int = VALIDATION_GRID,
                validation_tol: float = VALIDATION_TOL) -> DesignResult:
    _check_param(problem, param)
    free_kind = CHECK if problem == BEC_RHO else VARIABLE
    free = FreeSide(free_kind, max_degree)
    interval = param if problem == BSC_LAMBDA else 1.0
    P = _affine_constraint(problem, fixed, free, param)
    frag = build_sos_feasibility(lift_to_real_line(P, interval))
    sense = "min" if problem == BEC_RHO else "max"
    prog = assemble_program((0.0, _objective_weights(max_degree)), [frag],
                            [(np.ones(free.num_vars), 1.0)], sense=sense)
    sol = solve(prog, tol=tol, max_iter=max_iter)
    if sol.status == PRIMAL_INFEASIBLE:
        raise Infeasible(f"{problem}: no distribution with degrees 2..{max_degree} satisfies "
                         f"the constraint at {param}")
    if sol.status != OPTIMAL:
        raise SolverFailure(f"{problem}: solver returned {sol.status}: {sol.diagnostics}")
    z = decision_values(prog, sol.primal)
    dist = from_vector(free_kind, z, DROP_BELOW)
    cert = frag.gram(gram_block(prog, sol.primal))
    stats = sol.summary()
    stats["program_objective"] = original_objective(prog, sol.objective_value)
    stats["gram_residual"] = frag.gram_residual(cert, z)
    stats["gram_min_eig_rel"] = cert.min_eigenvalue() / cert.scale()
    stats["gram_basis"] = [frag.lo, frag.hi, frag.q]
    result = _finish(problem, "sos", dist, fixed, param, cert, stats, grid_size, validation_tol)
    if not result.validation.feasible:
        raise SolverFailure(f"{problem}: certified design fails the grid check "
                            f"(violation {result.validation.max_violation:.3g})")
    return result


def optimize_lambda_bec(rho: DegreeDistribution, epsilon: float, max_vdeg: int, **kw) -> DesignResult:
    """Maximize the rate over variable degrees 2..max_vdeg for a fixed check side."""
    return _sos_design(BEC_LAMBDA, rho, epsilon, max_vdeg, **kw)


def optimize_rho_bec(lam: DegreeDistribution, epsilon: float, max_cdeg: int, **kw) -> DesignResult:
    """Minimize ``sum rho_j / j`` over check degrees 2..max_cdeg for a fixed variable side."""
    return _sos_design(BEC_RHO, lam, epsilon, max_cdeg, **kw)


def optimize_lambda_bsc(rho: DegreeDistribution, p_crossover: float, max_vdeg: int, **kw) -> DesignResult:
    return _sos_design(BSC_LAMBDA, rho, p_crossover, max_vdeg, **kw)


# -- grid LP baseline ------------------------------------------------------------


def _grid_columns(problem: str, fixed: DegreeDistribution, param: float, max_degree: int, x: np.ndarray):
    """``margin(x) = const + cols @ z`` at the grid points, evaluated directly."""
    k = np.arange(1, max_degree)  # exponents d - 1 for d = 2..max_degree
    if problem == BEC_LAMBDA:
        y = 1.0 - fixed(1.0 - x)
        return x, -param * y[:, None] ** k
    if problem == BEC_RHO:
        v = 1.0 - param * fixed(x)
        return -(1.0 - x), v[:, None] ** k
    r = fixed(1.0 - 2.0 * x)
    w0, w1 = (1 - r) / 2, (1 + r) / 2
    return x - param, -(1 - param) * w0[:, None] ** k + param * w1[:, None] ** k


def _grid_lp(problem: str, fixed: DegreeDistribution, param: float, max_degree: int,
             grid_size: int, validation_tol: float = VALIDATION_TOL) -> DesignResult:
    _check_param(problem, param)
    if grid_size < 100:
        raise InputError("grid_size must be >= 100")
    if max_degree < 2:
        raise InputError("max degree must be >= 2")
    a = param if problem == BSC_LAMBDA else 1.0
    x = a * np.arange(1, grid_size + 1) / grid_size
    const, cols = _grid_columns(problem, fixed, param, max_degree, x)
    w = _objective_weights(max_degree)
    sign = 1.0 if problem == BEC_RHO else -1.0
    res = linprog(sign * w, A_ub=-cols, b_ub=const, A_eq=np.ones((1, max_degree - 1)), b_eq=[1.0],
                  bounds=(0, None), method="highs")
    if res.status == 2:
        raise Infeasible(f"{problem}: grid LP infeasible at {param}")
    if res.status != 0:
        raise SolverFailure(f"{problem}: grid LP failed: {res.message}")
    free_kind = CHECK if problem == BEC_RHO else VARIABLE
    dist = from_vector(free_kind, res.x, DROP_BELOW)
    stats = {"status": "optimal", "backend": "highs", "grid_size": grid_size,
             "program_objective": float(w @ res.x)}
    # the LP is only feasible on its own grid, so validate there (plus x = 0)
    return _finish(problem, "grid_lp", dist, fixed, param, None, stats, grid_size + 1, validation_tol)


def optimize_lambda_grid_lp(rho: DegreeDistribution, epsilon: float, max_vdeg: int,
                            grid_size: int = VALIDATION_GRID) -> DesignResult:
    return _grid_lp(BEC_LAMBDA, rho, epsilon, max_vdeg, grid_size)


def optimize_rho_grid_lp(lam: DegreeDistribution, epsilon: float, max_cdeg: int,
                         grid_size: int = VALIDATION_GRID) -> DesignResult:
    return _grid_lp(BEC_RHO, lam, epsilon, max_cdeg, grid_size)


def optimize_lambda_bsc_grid_lp(rho: DegreeDistribution, p_crossover: float, max_vdeg: int,
                                grid_size: int = VALIDATION_GRID) -> DesignResult:
    return _grid_lp(BSC_LAMBDA, rho, p_crossover, max_vdeg, grid_size)


# -- certification of a concrete pair ------------------------------------------


def certify(problem: str, lam: DegreeDistribution, rho: DegreeDistribution, param: float,
            tol: float = 1e-8, max_iter: int = 200) -> tuple[bool, GramMatrix | None, SolverSolution]:
    """SOS verdict on the constraint of ``problem`` for a concrete pair.

    Returns ``(feasible, gram, solution)``; ``gram`` is None when the
    solver proves infeasibility.
    """
    _check_param(problem, param)
    if problem == BEC_LAMBDA:
        P = build_de_poly_bec(lam, rho, param)
    elif problem == BEC_RHO:
        P = build_de_poly_bec_dual(lam, rho, param)
    elif problem == BSC_LAMBDA:
        P = build_de_poly_bsc(lam, rho, param)
    else:
        raise InputError(f"unknown problem {problem!r}")
    interval = param if problem == BSC_LAMBDA else 1.0
    frag = build_sos_feasibility(lift_to_real_line(P, interval))
    prog = assemble_program((0.0, np.zeros(0)), [frag], num_vars=0)
    sol = solve(prog, tol=tol, max_iter=max_iter)
    if sol.status == PRIMAL_INFEASIBLE:
        return False, None, sol
    if sol.status != OPTIMAL:
        raise SolverFailure(f"certification failed: {sol.status}: {sol.diagnostics}")
    return True, frag.gram(gram_block(prog, sol.primal)), sol


def certify_bec(lam: DegreeDistribution, rho: DegreeDistribution, epsilon: float,
                tol: float = 1e-8) -> tuple[bool, GramMatrix | None, SolverSolution]:
    """SOS feasibility check of ``x - eps lam(1 - rho(1 - x)) >= 0`` on [0, 1]."""
    return certify(BEC_LAMBDA, lam, rho, epsilon, tol)
