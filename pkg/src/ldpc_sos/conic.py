"""Solve standard-form conic programs (nonnegative orthant + PSD blocks).

The numerical work is delegated to cvxopt's primal-dual interior-point
``conelp`` (self-dual embedding, Nesterov-Todd scaling).  cvxopt is fed
the dual of our standard form, whose Schur complement has one row per
equality constraint rather than one per Gram entry.  Everything the
contract promises (status, residual bounds, infeasibility certificate)
is re-checked here by :func:`residuals` / :func:`certificate_violation`
from the returned vectors alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from cvxopt import matrix, solvers

from .errors import DimensionMismatch, MalformedProgram
from .sos import ConicProgram, SQRT2, smat, svec, svec_indices

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal_infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_FAILURE = "numerical_failure"

RESIDUAL_TOL = 1e-7
ORTHANT_TOL = 1e-9
# budget for the tightened second pass; healthy runs take 10-40 iterations
TIGHT_PASS_ITERS = 60


@dataclass(frozen=True)
class Residuals:
    primal_eq: float
    dual: float
    gap: float

    def to_json(self) -> dict:
        return {"primal_eq": self.primal_eq, "dual": self.dual, "gap": self.gap}


@dataclass(frozen=True, eq=False)
class SolverSolution:
    status: str
    primal: np.ndarray
    dual: np.ndarray
    cone_dual: np.ndarray
    objective_value: float
    residuals: Residuals
    iterations: int
    certificate: np.ndarray | None = None
    diagnostics: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "residuals": self.residuals.to_json(),
            "diagnostics": list(self.diagnostics),
        }


def _validate(prog: ConicProgram) -> None:
    m, n = prog.A.shape
    if len(prog.b) != m or len(prog.c) != n:
        raise MalformedProgram("A, b, c dimensions disagree")
    if sum(k.dim for k in prog.cones) != n:
        raise MalformedProgram("cone dimensions do not cover the variables")
    for k in prog.cones:
        if k.type not in ("nonneg", "psd") or k.size < 0:
            raise MalformedProgram(f"bad cone {k}")
    if not (np.all(np.isfinite(prog.c)) and np.all(np.isfinite(prog.b))
            and np.all(np.isfinite(prog.A.data))):
        raise MalformedProgram("non-finite data")


def _cone_violation(prog: ConicProgram, v: np.ndarray) -> float:
    """How far ``v`` is outside ``K`` (0 if inside); PSD parts relative to block size."""
    worst, off = 0.0, 0
    for k in prog.cones:
        blk = v[off : off + k.dim]
        off += k.dim
        if not k.dim:
            continue
        if k.type == "nonneg":
            worst = max(worst, float(-blk.min()))
        else:
            M = smat(blk)
            lam_min = float(np.linalg.eigvalsh(M).min())
            worst = max(worst, -lam_min / (1.0 + float(np.abs(M).max())))
    return max(worst, 0.0)


def residuals(prog: ConicProgram, sol: SolverSolution) -> Residuals:
    """Recompute residuals from ``(z, y, s)`` only.

    ``primal_eq = ||Az - b||_inf``; ``dual`` is the larger of
    ``||c - A^T y - s||_inf`` and the cone infeasibility of ``s``;
    ``gap = c.z - b.y``.
    """
    m, n = prog.A.shape
    z, y, s = (np.asarray(v, dtype=float) for v in (sol.primal, sol.dual, sol.cone_dual))
    if z.shape != (n,) or y.shape != (m,) or s.shape != (n,):
        raise DimensionMismatch(f"solution shapes {z.shape}, {y.shape}, {s.shape} vs program ({m}, {n})")
    primal_eq = float(np.abs(prog.A @ z - prog.b).max()) if m else 0.0
    dual_eq = float(np.abs(prog.c - prog.A.T @ y - s).max()) if n else 0.0
    dual = max(dual_eq, _cone_violation(prog, s))
    gap = float(prog.c @ z - prog.b @ y)
    return Residuals(primal_eq, dual, gap)


def residuals_ok(prog: ConicProgram, res: Residuals, objective: float, tol: float = RESIDUAL_TOL) -> bool:
    bn = float(np.abs(prog.b).max()) if len(prog.b) else 0.0
    cn = float(np.abs(prog.c).max()) if len(prog.c) else 0.0
    return (res.primal_eq <= tol * (1 + bn) and res.dual <= tol * (1 + cn)
            and abs(res.gap) <= tol * (1 + abs(objective)))


def primal_cone_ok(prog: ConicProgram, z: np.ndarray) -> bool:
    off = 0
    for k in prog.cones:
        blk = z[off : off + k.dim]
        off += k.dim
        if not k.dim:
            continue
        if k.type == "nonneg":
            if blk.min() < -ORTHANT_TOL:
                return False
        else:
            M = smat(blk)
            if np.linalg.eigvalsh(M).min() < -RESIDUAL_TOL * (1 + np.linalg.norm(M, 2)):
                return False
    return True


def certificate_violation(prog: ConicProgram, y: np.ndarray) -> tuple[float, float]:
    """For an infeasibility ray ``y``: ``(|b.y - 1|, cone violation of -A^T y)``."""
    y = np.asarray(y, dtype=float)
    return abs(float(prog.b @ y) - 1.0), _cone_violation(prog, -(prog.A.T @ y))


# -- presolve ---------------------------------------------------------------


def _presolve(A: sp.csr_matrix, b: np.ndarray):
    """Drop zero and duplicate rows.

    Returns ``(keep, ray)``: indices of kept rows, or an infeasibility
    ray ``y`` over the original rows when the rows are inconsistent.
    """
    m = A.shape[0]
    A = A.tocsr()
    A.sum_duplicates()
    A.sort_indices()
    keep, seen = [], {}
    for i in range(m):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        idx, val = A.indices[lo:hi], A.data[lo:hi]
        nz = val != 0
        idx, val = idx[nz], val[nz]
        if not len(idx):
            if b[i] != 0:
                y = np.zeros(m)
                y[i] = 1.0 / b[i]
                return None, y
            continue
        key = (idx.tobytes(), val.tobytes())
        if key in seen:
            j = seen[key]
            if b[i] != b[j]:
                y = np.zeros(m)
                y[i], y[j] = 1.0, -1.0
                return None, y / (b[i] - b[j])
            continue
        seen[key] = i
        keep.append(i)
    return np.array(keep, dtype=int), None


# -- cvxopt bridge ------------------------------------------------------------


def _to_cvxopt(prog: ConicProgram, A: sp.csr_matrix):
    """Map columns of ``A`` (one per variable) to cvxopt's ``G`` rows.

    cvxopt solves ``min -b.y  s.t.  G y + s = h,  s in K`` with ``G = A^T``
    in its own cone layout; PSD blocks there are full column-major
    matrices with trace inner product, so an svec column ``a`` becomes the
    symmetric matrix with off-diagonals ``a / sqrt(2)``.
    """
    At = A.T.tocsr()
    Grows, hrows, dims = [], [], {"l": 0, "q": [], "s": []}
    off = 0
    for k in prog.cones:
        blk = At[off : off + k.dim]
        cblk = prog.c[off : off + k.dim]
        off += k.dim
        if k.type == "nonneg":
            Grows.append(blk)
            hrows.append(cblk)
            dims["l"] += k.size
    off = 0
    for k in prog.cones:
        blk = At[off : off + k.dim]
        cblk = prog.c[off : off + k.dim]
        off += k.dim
        if k.type != "psd":
            continue
        s = k.size
        r, c = svec_indices(s)
        scale = np.where(r == c, 1.0, 1.0 / SQRT2)
        # full column-major position of (r, c) and of its mirror (c, r)
        pos_lo, pos_up = r + c * s, c + r * s
        S = sp.diags(scale) @ blk
        P = sp.csr_matrix((np.ones(len(r)), (pos_lo, np.arange(len(r)))), shape=(s * s, len(r)))
        Pm = sp.csr_matrix((np.where(r == c, 0.0, 1.0), (pos_up, np.arange(len(r)))), shape=(s * s, len(r)))
        Grows.append((P + Pm) @ S)
        hrows.append((P + Pm) @ (scale * cblk))
        dims["s"].append(s)
    G = sp.vstack(Grows).tocsr() if Grows else sp.csr_matrix((0, A.shape[0]))
    h = np.concatenate(hrows) if hrows else np.zeros(0)
    return G, h, dims


def _from_cvxopt_cone(prog: ConicProgram, vec, dims) -> np.ndarray:
    """cvxopt cone vector (lower triangle significant) -> our svec layout."""
    v = np.array(vec).ravel()
    out_nonneg = v[: dims["l"]]
    pos = dims["l"]
    psd_parts = []
    for s in dims["s"]:
        M = v[pos : pos + s * s].reshape((s, s), order="F")
        pos += s * s
        L = np.tril(M)
        psd_parts.append(svec(L + np.tril(L, -1).T))
    out, ip, ipsd = [], 0, 0
    for k in prog.cones:
        if k.type == "nonneg":
            out.append(out_nonneg[ip : ip + k.size])
            ip += k.size
        else:
            out.append(psd_parts[ipsd])
            ipsd += 1
    return np.concatenate(out) if out else np.zeros(0)


def _scipy_to_cvx(M: sp.spmatrix) -> matrix:
    return matrix(np.asarray(M.todense()) if sp.issparse(M) else M)


def solve(prog: ConicProgram, tol: float = 1e-8, max_iter: int = 200, verbose: bool = False) -> SolverSolution:
    """Solve ``min c.z  s.t.  Az = b, z in K``.

    ``tol`` is handed to the backend and every answer is re-verified
    against the contract bounds (``1e-7`` scaled).  Backend claims that do
    not verify get a tighter retry and then a Farkas search; failures are
    reported through ``status``, never silently.
    """
    _validate(prog)
    m, n = prog.A.shape
    keep, ray = _presolve(prog.A, prog.b)
    if ray is not None:
        return SolverSolution(PRIMAL_INFEASIBLE, np.full(n, np.nan), np.full(m, np.nan), np.full(n, np.nan),
                              np.nan, Residuals(np.nan, np.nan, np.nan), 0, ray,
                              ["inconsistent rows detected in presolve"])
    A, b = prog.A[keep], prog.b[keep]
    G, h, dims = _to_cvxopt(prog, A)
    diagnostics = [f"presolve kept {len(keep)} of {m} rows"]
    # A run whose answer fails re-verification is retried once, two orders
    # tighter; the contract check is the same either way.
    for backend_tol, budget in ((tol, max_iter), (tol * 1e-2, min(max_iter, TIGHT_PASS_ITERS))):
        opts = {"show_progress": verbose, "maxiters": budget,
                "abstol": backend_tol, "reltol": backend_tol, "feastol": backend_tol}
        try:
            res = solvers.conelp(matrix(-b), _scipy_to_cvx(G), matrix(h), dims, options=opts)
        except (ArithmeticError, ValueError) as exc:
            # typically a singular KKT system on an infeasible program
            diagnostics.append(f"backend failure: {exc}")
            iters = 0
            break
        iters = int(res.get("iterations", 0))
        status = res["status"]
        diagnostics.append(f"backend status: {status} (tol {backend_tol:.0e})")

        if status == "dual infeasible":
            # cvxopt's dual is our primal: x is a ray with G x <= 0, b.x = 1
            y = np.zeros(m)
            y[keep] = np.array(res["x"]).ravel()
            y /= float(prog.b @ y)
            if _ray_ok(prog, y):
                return _infeasible(prog, iters, y, diagnostics)
            diagnostics.append("backend ray failed verification")
            break
        if status == "primal infeasible":
            z = _from_cvxopt_cone(prog, res["z"], dims)
            if _unbounded_ray_ok(prog, z):
                return SolverSolution(UNBOUNDED, np.full(n, np.nan), np.full(m, np.nan), np.full(n, np.nan),
                                      -np.inf, Residuals(np.nan, np.nan, np.nan), iters, z, diagnostics)
            diagnostics.append("backend unboundedness ray failed verification")
            break
        if res["z"] is not None:
            z = _from_cvxopt_cone(prog, res["z"], dims)
            s = _from_cvxopt_cone(prog, res["s"], dims)
            y = np.zeros(m)
            y[keep] = np.array(res["x"]).ravel()
            obj = float(prog.c @ z)
            provisional = SolverSolution(status, z, y, s, obj, Residuals(0, 0, 0), iters)
            r = residuals(prog, provisional)
            if residuals_ok(prog, r, obj) and primal_cone_ok(prog, z):
                return SolverSolution(OPTIMAL, z, y, s, obj, r, iters, None, diagnostics)
            diagnostics.append(f"re-verification failed: {r}")

    # Anything unverified gets a second opinion from a Farkas program.
    ray = _farkas(prog, keep, G, dims, opts, diagnostics)
    if ray is not None:
        return _infeasible(prog, iters, ray, diagnostics)
    final = MAX_ITERATIONS if iters >= max_iter else NUMERICAL_FAILURE
    return SolverSolution(final, np.full(n, np.nan), np.full(m, np.nan), np.full(n, np.nan),
                          np.nan, Residuals(np.nan, np.nan, np.nan), iters, None, diagnostics)


def _infeasible(prog, iters, y, diagnostics) -> SolverSolution:
    m, n = prog.A.shape
    return SolverSolution(PRIMAL_INFEASIBLE, np.full(n, np.nan), np.full(m, np.nan), np.full(n, np.nan),
                          np.nan, Residuals(np.nan, np.nan, np.nan), iters, y, diagnostics)


def _ray_ok(prog: ConicProgram, y: np.ndarray) -> bool:
    if not np.all(np.isfinite(y)):
        return False
    norm_err, cone_err = certificate_violation(prog, y)
    scale = 1.0 + float(np.abs(prog.A.T @ y).max(initial=0.0))
    return norm_err <= RESIDUAL_TOL and cone_err <= RESIDUAL_TOL * scale


def _unbounded_ray_ok(prog: ConicProgram, z: np.ndarray) -> bool:
    """``A z = 0``, ``z in K``, ``c.z < 0``, judged after scaling to ``c.z = -1``.

    The tolerance is absolute on purpose: a ray whose descent is only
    round-off (``|c.z| << ||z||``) blows up under this scaling and fails.
    """
    if not np.all(np.isfinite(z)):
        return False
    cz = float(prog.c @ z)
    if cz >= 0:
        return False
    z = z / -cz
    return (float(np.abs(prog.A @ z).max(initial=0.0)) <= RESIDUAL_TOL
            and _cone_violation(prog, z) <= RESIDUAL_TOL)


def _cone_identity(prog: ConicProgram) -> np.ndarray:
    parts = []
    for k in prog.cones:
        parts.append(np.ones(k.size) if k.type == "nonneg" else svec(np.eye(k.size)))
    return np.concatenate(parts) if parts else np.zeros(0)


def _farkas(prog: ConicProgram, keep, G, dims, opts, diagnostics):
    """Look for ``y`` with ``-A^T y in K`` and ``b.y > 0``.

    Solved as ``max b.y`` over ``-A^T y in K`` with ``<e, -A^T y> <= 1``
    (``e`` the cone identity), which is bounded and has ``y = 0`` feasible.
    """
    A, b = prog.A[keep], prog.b[keep]
    row = -(A @ _cone_identity(prog))
    G2 = sp.vstack([sp.csr_matrix(row[None, :]), G]).tocsr()
    h2 = np.zeros(G2.shape[0])
    h2[0] = 1.0
    dims2 = {"l": dims["l"] + 1, "q": [], "s": list(dims["s"])}
    try:
        res = solvers.conelp(matrix(-b), _scipy_to_cvx(G2), matrix(h2), dims2, options=opts)
    except (ArithmeticError, ValueError) as exc:
        diagnostics.append(f"farkas backend failure: {exc}")
        return None
    diagnostics.append(f"farkas status: {res['status']}")
    if res["x"] is None:
        return None
    y = np.zeros(prog.A.shape[0])
    y[keep] = np.array(res["x"]).ravel()
    by = float(prog.b @ y)
    if not by > RESIDUAL_TOL:
        return None
    y /= by
    if _ray_ok(prog, y):
        return y
    diagnostics.append("farkas ray failed verification")
    return None
