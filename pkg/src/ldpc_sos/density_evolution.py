"""Density-evolution constraint polynomials and independent oracles.

The builders return :class:`AffinePolynomial` objects whose coefficients
are affine in the free degree-distribution weights.  They are assembled
in the Bernstein basis on the constraint interval, which stays accurate
at the degrees ``(D_v - 1)(D_c - 1)`` these problems reach.

The oracles (grid check, fixed-point recursion, threshold bisection)
evaluate the distributions directly and never touch the polynomial
coefficients, so they can be used to check the SOS route.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import bernstein
from .errors import CrossoverOutOfRange, EpsilonOutOfRange, InputError
from .polynomials import CHECK, VARIABLE, DegreeDistribution, Polynomial, eval_poly

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeSide:
    """Stand-in for a distribution whose weights of degrees 2..max_degree are unknowns."""

    kind: str
    max_degree: int

    def __post_init__(self):
        if self.max_degree < 2:
            raise InputError("max degree must be >= 2")

    @property
    def num_vars(self) -> int:
        return self.max_degree - 1

    @property
    def degrees(self) -> list[int]:
        return list(range(2, self.max_degree + 1))


Side = Union[DegreeDistribution, FreeSide]


@dataclass(frozen=True, eq=False)
class AffinePolynomial:
    """Polynomial whose coefficients are affine in ``num_vars`` unknowns.

    Coefficient ``k`` is ``const[k] + grad[k] @ z``.  ``basis`` is either
    ``"monomial"`` or ``"bernstein"``; Bernstein coefficients refer to the
    interval ``[0, interval_end]``.  The coefficient table keeps its
    nominal length (no trimming).
    """

    const: np.ndarray
    grad: np.ndarray
    basis: str = "monomial"
    interval_end: float = 1.0

    def __post_init__(self):
        const = np.asarray(self.const, dtype=float).ravel()
        grad = np.asarray(self.grad, dtype=float).reshape(len(const), -1)
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "grad", grad)
        if self.basis not in ("monomial", "bernstein"):
            raise InputError(f"unknown basis {self.basis!r}")

    @classmethod
    def constant(cls, p: Polynomial, num_vars: int = 0) -> "AffinePolynomial":
        return cls(p.array, np.zeros((len(p.coeffs), num_vars)))

    @property
    def num_vars(self) -> int:
        return self.grad.shape[1]

    @property
    def nominal_degree(self) -> int:
        return len(self.const) - 1

    def _nonzero_rows(self) -> np.ndarray:
        return (self.const != 0) | np.any(self.grad != 0, axis=1)

    def is_zero(self) -> bool:
        return not self._nonzero_rows().any()

    def degree(self) -> int:
        """Largest index whose affine coefficient is not identically zero."""
        if self.basis == "bernstein":
            return self.nominal_degree
        nz = np.flatnonzero(self._nonzero_rows())
        return int(nz[-1]) if nz.size else 0

    def coefficients(self, z=None) -> np.ndarray:
        z = np.zeros(self.num_vars) if z is None else np.asarray(z, dtype=float)
        if z.shape != (self.num_vars,):
            raise InputError(f"expected {self.num_vars} values, got shape {z.shape}")
        return self.const + self.grad @ z

    def instantiate(self, z=None) -> Polynomial:
        """Concrete polynomial in monomial form."""
        c = self.coefficients(z)
        if self.basis == "bernstein":
            c = bernstein.to_monomial(c, self.interval_end)
        return Polynomial(c)

    def evaluate(self, z, x):
        c = self.coefficients(z)
        if self.basis == "bernstein":
            return bernstein.evaluate(c, np.asarray(x, dtype=float) / self.interval_end)
        return eval_poly(Polynomial(c), x)

    def to_monomial(self) -> "AffinePolynomial":
        if self.basis == "monomial":
            return self
        table = bernstein.to_monomial(np.column_stack([self.const, self.grad]), self.interval_end)
        return AffinePolynomial(table[:, 0], table[:, 1:], "monomial")

    def bernstein_table(self, a: float) -> tuple[np.ndarray, np.ndarray]:
        """``(const, grad)`` in the Bernstein basis on [0, a]."""
        if self.basis == "bernstein":
            if not np.isclose(a, self.interval_end, rtol=0, atol=1e-15):
                return AffinePolynomial.to_monomial(self).bernstein_table(a)
            return self.const, self.grad
        q = self.degree()
        table = np.column_stack([self.const, self.grad])[: q + 1]
        table = bernstein.from_monomial(table, a)
        return table[:, 0], table[:, 1:]


def _check_epsilon(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise EpsilonOutOfRange(f"epsilon={eps} not in (0, 1)")


def _check_kind(side: Side, kind: str, name: str) -> None:
    if side.kind != kind:
        raise InputError(f"{name} must be a {kind} distribution, got {side.kind}")


def _side_columns(side: Side, pw: list[np.ndarray], q: int, transform) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``transform(elevate(pw[d-1]))`` per degree d.

    For a free side each degree gets its own column; for a concrete
    distribution the columns are folded into the constant using its weights.
    """
    cols = {d: transform(bernstein.elevate(pw[d - 1], q)) for d in side.degrees}
    if isinstance(side, FreeSide):
        return np.zeros(q + 1), np.column_stack([cols[d] for d in side.degrees])
    const = sum(side.weights[d] * cols[d] for d in side.degrees)
    return const, np.zeros((q + 1, 0))


def _check_node_complement(rho: DegreeDistribution) -> np.ndarray:
    """Bernstein coefficients of ``1 - rho(1 - x)`` on [0, 1]."""
    m = rho.max_degree - 1
    acc = np.zeros(m + 1)
    for d, w in rho.weights.items():
        e0 = np.zeros(d)
        e0[0] = 1.0  # (1 - x)**(d-1)
        acc += w * bernstein.elevate(e0, m)
    return 1.0 - acc


def _identity(q: int, a: float = 1.0) -> np.ndarray:
    return a * np.arange(q + 1) / q


def build_de_poly_bec(lam: Side, rho: DegreeDistribution, epsilon: float) -> AffinePolynomial:
    """``P(x) = x - eps * lam(1 - rho(1 - x))`` on [0, 1], affine in free lambda."""
    _check_epsilon(epsilon)
    _check_kind(lam, VARIABLE, "lambda")
    _check_kind(rho, CHECK, "rho")
    y = _check_node_complement(rho)
    q = (lam.max_degree - 1) * (len(y) - 1)
    pw = bernstein.powers(y, lam.max_degree - 1)
    const, grad = _side_columns(lam, pw, q, lambda c: -epsilon * c)
    return AffinePolynomial(_identity(q) + const, grad, "bernstein", 1.0)


def build_de_poly_bec_dual(lam: DegreeDistribution, rho: Side, epsilon: float) -> AffinePolynomial:
    """``Q(x) = rho(1 - eps * lam(x)) - (1 - x)`` on [0, 1], affine in free rho.

    The constant 1 is written as ``sum_j rho_j`` so that ``Q(0)`` vanishes
    identically; this agrees with the plain form whenever the weights are
    normalized.
    """
    _check_epsilon(epsilon)
    _check_kind(lam, VARIABLE, "lambda")
    _check_kind(rho, CHECK, "rho")
    n = lam.max_degree - 1
    lam_b = np.zeros(n + 1)
    for d, w in lam.weights.items():
        e = np.zeros(d)
        e[-1] = 1.0  # x**(d-1)
        lam_b += w * bernstein.elevate(e, n)
    v = 1.0 - epsilon * lam_b
    q = n * (rho.max_degree - 1)
    pw = bernstein.powers(v, rho.max_degree - 1)
    const, grad = _side_columns(rho, pw, q, lambda c: c - 1.0)
    return AffinePolynomial(_identity(q) + const, grad, "bernstein", 1.0)


def build_de_poly_bsc(lam: Side, rho: DegreeDistribution, p_crossover: float) -> AffinePolynomial:
    """BSC condition polynomial on [0, p]; Bernstein basis on that interval.

    ``P(x) = x - (1-p) lam((1 - rho(1-2x))/2) - p [1 - lam((1 + rho(1-2x))/2)]``,
    with the leading 1 written as ``sum_i lam_i`` so ``P(0)`` vanishes
    identically.
    """
    p = p_crossover
    if not 0.0 < p < 0.5:
        raise CrossoverOutOfRange(f"p_crossover={p} not in (0, 0.5)")
    _check_kind(lam, VARIABLE, "lambda")
    _check_kind(rho, CHECK, "rho")
    m = rho.max_degree - 1
    upw = bernstein.powers(np.array([1.0, 1.0 - 2.0 * p]), m)  # (1 - 2 p s)**k
    rho_u = sum(w * bernstein.elevate(upw[d - 1], m) for d, w in rho.weights.items())
    w0 = (1.0 - rho_u) / 2.0
    w1 = (1.0 + rho_u) / 2.0
    q = (lam.max_degree - 1) * m
    pw0 = bernstein.powers(w0, lam.max_degree - 1)
    pw1 = bernstein.powers(w1, lam.max_degree - 1)
    c0, g0 = _side_columns(lam, pw0, q, lambda c: -(1.0 - p) * c)
    c1, g1 = _side_columns(lam, pw1, q, lambda c: -p * (1.0 - c))
    return AffinePolynomial(_identity(q, p) + c0 + c1, g0 + g1, "bernstein", p)


# -- direct evaluators (oracle side) ---------------------------------------


def bec_margin(lam: DegreeDistribution, rho: DegreeDistribution, epsilon: float) -> Callable:
    """``x -> x - eps * lam(1 - rho(1 - x))``."""
    return lambda x: np.asarray(x) - epsilon * lam(1.0 - rho(1.0 - np.asarray(x)))


def bec_dual_margin(lam: DegreeDistribution, rho: DegreeDistribution, epsilon: float) -> Callable:
    """``x -> rho(1 - eps * lam(x)) - (1 - x)``."""
    return lambda x: rho(1.0 - epsilon * lam(np.asarray(x))) - (1.0 - np.asarray(x))


def bsc_margin(lam: DegreeDistribution, rho: DegreeDistribution, p_crossover: float) -> Callable:
    p = p_crossover

    def f(x):
        r = rho(1.0 - 2.0 * np.asarray(x))
        return np.asarray(x) - (1 - p) * lam((1 - r) / 2) - p * (1 - lam((1 + r) / 2))

    return f


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    max_violation: float
    argmax_x: float
    grid_size: int
    tolerance: float

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "max_violation": self.max_violation,
            "argmax_x": self.argmax_x,
            "grid_size": self.grid_size,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_json(cls, obj) -> "FeasibilityReport":
        return cls(**obj)


def check_feasibility_grid(P, interval_end: float = 1.0, grid_size: int = 10_000,
                           tol: float = 1e-8) -> FeasibilityReport:
    """Check ``P >= -tol`` on ``grid_size`` uniform points of [0, interval_end].

    ``P`` is a :class:`Polynomial` or any vectorized callable.
    """
    if grid_size < 2:
        raise InputError("grid_size must be >= 2")
    if not 0.0 < interval_end <= 1.0:
        raise InputError("interval_end must lie in (0, 1]")
    x = np.linspace(0.0, interval_end, grid_size)
    vals = eval_poly(P, x) if isinstance(P, Polynomial) else np.asarray(P(x), dtype=float)
    k = int(np.argmin(vals))
    viol = float(-vals[k]) + 0.0  # no negative zero in reports
    return FeasibilityReport(viol <= tol, viol, float(x[k]), grid_size, tol)


@dataclass(frozen=True)
class RecursionResult:
    converged: bool
    final_x: float
    iters: int
    reason: str  # "tolerance", "majorant", "stalled" or "max_iter"


def _scalar_poly(dist: DegreeDistribution):
    terms = [(d - 1, w) for d, w in dist.weights.items()]
    return lambda x: sum(w * x ** e for e, w in terms)


def de_recursion_bec(lam: DegreeDistribution, rho: DegreeDistribution, epsilon: float,
                     max_iter: int = 10_000, conv_tol: float = 1e-10) -> RecursionResult:
    """Iterate ``x <- eps * lam(1 - rho(1 - x))`` from ``x = eps``.

    Besides ``x < conv_tol``, convergence is also declared once
    ``eps * lam(rho'(1) x) < x``: ``1 - rho(1 - x) <= rho'(1) x`` and lam
    has nonnegative coefficients, so below that point the map stays
    under the identity and the iteration can only go to zero.  This
    resolves the slow linear tail near the threshold without extra
    iterations.
    """
    _check_epsilon(epsilon)
    lam_f, rho_f = _scalar_poly(lam), _scalar_poly(rho)
    slope = float(rho.derivative(1.0))
    x = epsilon
    for it in range(1, max_iter + 1):
        nxt = epsilon * lam_f(1.0 - rho_f(1.0 - x))
        if nxt < conv_tol:
            return RecursionResult(True, nxt, it, "tolerance")
        if epsilon * lam_f(slope * nxt) < nxt:
            return RecursionResult(True, nxt, it, "majorant")
        if abs(nxt - x) < 1e-14:
            return RecursionResult(False, nxt, it, "stalled")
        x = nxt
    return RecursionResult(False, x, max_iter, "max_iter")


def threshold_bec(lam: DegreeDistribution, rho: DegreeDistribution, bisect_tol: float = 1e-4,
                  max_iter: int = 10_000, conv_tol: float = 1e-10) -> float:
    """Largest erasure probability for which the recursion converges.

    Returns the lower end of the final bisection bracket, so the returned
    value itself is a verified convergent point.
    """
    if bisect_tol < 1e-8:
        raise InputError("bisect_tol must be >= 1e-8")

    def ok(e):
        return de_recursion_bec(lam, rho, e, max_iter, conv_tol).converged

    lo, hi = 0.0, 1.0
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    below = [lo - k * bisect_tol for k in (1, 2, 4) if lo - k * bisect_tol > 0]
    above = [hi + k * bisect_tol for k in (1, 2, 4) if hi + k * bisect_tol < 1]
    if not all(ok(e) for e in below) or any(ok(e) for e in above):
        log.warning("convergence is not monotone in epsilon near %.6f", lo)
    return lo
