"""Sum-of-squares lift and standard-form conic program assembly.

Nonnegativity of ``P`` on [0, a] is moved to the real line with
``x = a t^2 / (1 + t^2)``:

    Pi(t) = (1 + t^2)^q P(a t^2 / (1 + t^2)),

and ``Pi >= 0`` on R is imposed as ``Pi_l = sum_{i+j=l} B_ij`` with a
PSD Gram matrix ``B`` over the monomials ``(1, t, ..., t^q)``.

If ``P`` has Bernstein coefficients ``b_k`` on [0, a] then
``Pi_{2k} = C(q, k) b_k`` and all odd coefficients vanish.  The program
therefore works with a diagonally rescaled Gram matrix
``B = D B' D``, ``D_i = sqrt(C(q, i))``, and each coupling row ``l`` is
divided by ``sqrt(C(q, floor(l/2)) C(q, ceil(l/2)))``.  ``B`` is PSD iff
``B'`` is; certificates are always reported as ``B`` in the monomial basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bernstein
from .density_evolution import AffinePolynomial
from .errors import IndexSpaceMismatch, InputError, ZeroPolynomial

MAX_LIFT_DEGREE = 200
SQRT2 = np.sqrt(2.0)


# -- symmetric-matrix vectorization -----------------------------------------


def svec_size(side: int) -> int:
    return side * (side + 1) // 2


def svec_indices(side: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column of each svec slot: lower triangle, column by column."""
    rows, cols = [], []
    for j in range(side):
        rows.extend(range(j, side))
        cols.extend([j] * (side - j))
    return np.array(rows, dtype=int), np.array(cols, dtype=int)


def svec(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    r, c = svec_indices(M.shape[0])
    return np.where(r == c, 1.0, SQRT2) * M[r, c]


def smat(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    side = int(round((np.sqrt(8 * len(v) + 1) - 1) / 2))
    if svec_size(side) != len(v):
        raise InputError(f"length {len(v)} is not a triangular number")
    r, c = svec_indices(side)
    vals = np.where(r == c, 1.0, 1.0 / SQRT2) * v
    M = np.zeros((side, side))
    M[r, c] = vals
    M[c, r] = vals
    return M


# -- Gram certificates -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def scale(self) -> float:
        return 1.0 + float(np.abs(self.entries).max())

    def is_psd(self, rel_tol: float = 1e-7) -> bool:
        return self.min_eigenvalue() >= -rel_tol * self.scale()

    def antidiagonal_sums(self) -> np.ndarray:
        B = self.entries
        n = B.shape[0]
        flipped = B[:, ::-1]
        return np.array([np.trace(flipped, offset=n - 1 - l) for l in range(2 * n - 1)])

    def to_json(self) -> list[list[float]]:
        return self.entries.tolist()

    @classmethod
    def from_json(cls, rows) -> "GramMatrix":
        return cls(np.array(rows, dtype=float))


def lift_to_real_line(P: AffinePolynomial, interval_end: float = 1.0) -> AffinePolynomial:
    """Return ``Pi(t) = (1 + t^2)^q P(a t^2 / (1 + t^2))`` as an affine monomial table.

    ``q`` is the degree of ``P`` (nominal degree for Bernstein input).
    The result always has ``2q + 1`` coefficients.
    """
    a = float(interval_end)
    if not 0.0 < a <= 1.0:
        raise InputError("interval_end must lie in (0, 1]")
    if P.is_zero():
        raise ZeroPolynomial("cannot lift the zero polynomial")
    const, grad = P.bernstein_table(a)
    q = len(const) - 1
    if q > MAX_LIFT_DEGREE:
        raise InputError(f"lift degree {q} exceeds cap {MAX_LIFT_DEGREE}")
    w = np.exp(bernstein.log_binom(q))
    pc = np.zeros(2 * q + 1)
    pg = np.zeros((2 * q + 1, P.num_vars))
    pc[0::2] = w * const
    pg[0::2] = w[:, None] * grad
    return AffinePolynomial(pc, pg, "monomial")


@dataclass(frozen=True, eq=False)
class SOSFragment:
    """Coupling rows between an affine ``Pi`` and one scaled Gram block.

    The Gram basis is ``t^lo, ..., t^hi``.  With ``reduce=True`` the
    outermost monomials are dropped whenever the corresponding extreme
    coefficients of ``Pi`` vanish identically (their Gram rows and
    columns would be forced to zero, leaving the SDP without an interior).
    """

    Pi: AffinePolynomial
    q: int
    lo: int
    hi: int

    @property
    def side(self) -> int:
        return self.hi - self.lo + 1

    @property
    def num_vars(self) -> int:
        return self.Pi.num_vars

    def basis_scale(self) -> np.ndarray:
        """``D_i`` for the retained monomials."""
        return np.exp(0.5 * bernstein.log_binom(self.q))[self.lo : self.hi + 1]

    def row_weights(self) -> np.ndarray:
        lb = bernstein.log_binom(self.q)
        l = np.arange(2 * self.q + 1)
        return np.exp(0.5 * (lb[l // 2] + lb[(l + 1) // 2]))

    def rows(self):
        """Yield ``(l, var_coeffs, gram_svec_coeffs, rhs)`` for each kept row.

        Row ``l`` reads ``sum_{i+j=l} B_ij - grad_l . z = const_l``, divided
        by its weight, with ``B`` written in terms of the scaled block.
        """
        lb = bernstein.log_binom(self.q)
        w = self.row_weights()
        r, c = svec_indices(self.side)
        gi, gj = r + self.lo, c + self.lo
        ssum = gi + gj
        mult = np.where(gi == gj, 1.0, SQRT2) * np.exp(0.5 * (lb[gi] + lb[gj]))
        for l in range(2 * self.lo, 2 * self.hi + 1):
            mask = ssum == l
            yield l, -self.Pi.grad[l] / w[l], np.where(mask, mult / w[l], 0.0), self.Pi.const[l] / w[l]

    def gram(self, block_svec: np.ndarray) -> GramMatrix:
        """Full ``(q+1) x (q+1)`` monomial-basis Gram matrix from a solved block."""
        Bs = smat(block_svec)
        D = self.basis_scale()
        B = np.zeros((self.q + 1, self.q + 1))
        B[self.lo : self.hi + 1, self.lo : self.hi + 1] = D[:, None] * Bs * D[None, :]
        return GramMatrix(B)

    def gram_residual(self, gram: GramMatrix, z=None) -> float:
        """Max weighted mismatch ``|sum_{i+j=l} B_ij - Pi_l| / w_l``."""
        target = self.Pi.coefficients(z)
        return float(np.max(np.abs(gram.antidiagonal_sums() - target) / self.row_weights()))


def build_sos_feasibility(Pi: AffinePolynomial, reduce: bool = True) -> SOSFragment:
    n = len(Pi.const)
    if n % 2 == 0:
        raise InputError("lifted polynomial must have odd length 2q + 1")
    q = (n - 1) // 2
    if q > MAX_LIFT_DEGREE:
        raise InputError(f"Gram side {q + 1} exceeds cap {MAX_LIFT_DEGREE + 1}")
    lo, hi = 0, q
    if reduce:
        nz = Pi._nonzero_rows()
        while lo < hi and not nz[2 * lo] and not nz[2 * lo + 1]:
            lo += 1
        while hi > lo and not nz[2 * hi] and not nz[2 * hi - 1]:
            hi -= 1
    return SOSFragment(Pi, q, lo, hi)


# -- standard-form program -----------------------------------------------------


@dataclass(frozen=True)
class Cone:
    type: str  # "nonneg" or "psd"
    size: int  # orthant length, or PSD side

    @property
    def dim(self) -> int:
        return self.size if self.type == "nonneg" else svec_size(self.size)

    def to_json(self) -> dict:
        key = "size" if self.type == "nonneg" else "side"
        return {"type": self.type, key: self.size}


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """``min c.z  s.t.  A z = b,  z in K`` with ``K`` a product of cones.

    PSD blocks are svec-stacked (lower triangle by columns, off-diagonals
    times sqrt(2)).  ``meta`` records the sense of the original objective
    and where each piece of the layout lives.
    """

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: tuple[Cone, ...]
    meta: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.c)

    def block_offsets(self) -> list[int]:
        out, off = [], 0
        for k in self.cones:
            out.append(off)
            off += k.dim
        return out

    def block(self, z: np.ndarray, k: int) -> np.ndarray:
        off = self.block_offsets()[k]
        return np.asarray(z)[off : off + self.cones[k].dim]

    def to_json(self) -> dict:
        A = self.A.tocoo()
        return {
            "c": self.c.tolist(),
            "A": [[int(i), int(j), float(v)] for i, j, v in zip(A.row, A.col, A.data)],
            "A_shape": list(A.shape),
            "b": self.b.tolist(),
            "cones": [k.to_json() for k in self.cones],
            "meta": self.meta,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def assemble_program(objective, fragments, linear_constraints=(), num_vars: int | None = None,
                     variable_bounds: str = "nonneg", sense: str = "max") -> ConicProgram:
    """Stack decision variables and Gram blocks into one :class:`ConicProgram`.

    ``objective`` is ``(constant, gradient)`` over the decision variables;
    ``linear_constraints`` are ``(coeffs, rhs)`` equalities.  Layout:
    decision variables first (one orthant block; free variables are split
    into positive and negative parts), then one PSD block per fragment.
    """
    obj_const, obj_grad = objective
    obj_grad = np.asarray(obj_grad, dtype=float)
    n = len(obj_grad) if num_vars is None else num_vars
    if len(obj_grad) != n:
        raise IndexSpaceMismatch("objective length does not match num_vars")
    for f in fragments:
        if f.num_vars != n:
            raise IndexSpaceMismatch(f"fragment has {f.num_vars} variables, expected {n}")
    lin = [(np.asarray(a, dtype=float), float(r)) for a, r in linear_constraints]
    for a, _ in lin:
        if len(a) != n:
            raise IndexSpaceMismatch("linear constraint length does not match num_vars")
    if sense not in ("max", "min"):
        raise InputError("sense must be 'max' or 'min'")
    if variable_bounds not in ("nonneg", "free"):
        raise InputError("variable_bounds must be 'nonneg' or 'free'")

    # decision-variable expansion: z_dec = E @ orthant part
    E = np.eye(n) if variable_bounds == "nonneg" else np.hstack([np.eye(n), -np.eye(n)])
    n_orth = E.shape[1]
    sign = -1.0 if sense == "max" else 1.0
    cones = [Cone("nonneg", n_orth)] if n_orth else []
    offsets, off = [], n_orth
    for f in fragments:
        offsets.append(off)
        cones.append(Cone("psd", f.side))
        off += svec_size(f.side)
    total = off

    c = np.zeros(total)
    c[:n_orth] = sign * (obj_grad @ E)
    rows, cols, vals, rhs, tags = [], [], [], [], []

    def add_row(var_coeffs, extra_cols, extra_vals, r, tag):
        k = len(rhs)
        dense = var_coeffs @ E
        nz = np.flatnonzero(dense)
        rows.extend([k] * (len(nz) + len(extra_cols)))
        cols.extend(nz.tolist() + list(extra_cols))
        vals.extend(dense[nz].tolist() + list(extra_vals))
        rhs.append(r)
        tags.append(tag)

    for idx, (a, r) in enumerate(lin):
        add_row(a, [], [], r, ["linear", idx])
    for fi, (f, start) in enumerate(zip(fragments, offsets)):
        for l, vc, gc, r in f.rows():
            nz = np.flatnonzero(gc)
            add_row(vc, (start + nz).tolist(), gc[nz].tolist(), r, ["gram", fi, l])

    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), total))
    meta = {
        "sense": sense,
        "objective_sign": sign,
        "objective_constant": float(obj_const),
        "num_decision_vars": n,
        "variable_bounds": variable_bounds,
        "gram_offsets": offsets,
        "gram_basis": [[f.lo, f.hi, f.q] for f in fragments],
        "row_tags": tags,
    }
    return ConicProgram(c, A, np.array(rhs, dtype=float), tuple(cones), meta)


def decision_values(prog: ConicProgram, z: np.ndarray) -> np.ndarray:
    n = prog.meta["num_decision_vars"]
    z = np.asarray(z)
    if prog.meta["variable_bounds"] == "free":
        return z[:n] - z[n : 2 * n]
    return z[:n]


def gram_block(prog: ConicProgram, z: np.ndarray, fragment_index: int = 0) -> np.ndarray:
    """svec of the scaled Gram block belonging to ``fragment_index``."""
    off = prog.meta["gram_offsets"][fragment_index]
    lo, hi, _ = prog.meta["gram_basis"][fragment_index]
    return np.asarray(z)[off : off + svec_size(hi - lo + 1)]


def original_objective(prog: ConicProgram, minimized_value: float) -> float:
    """Objective of the problem as posed, from the minimized ``c.z``."""
    return prog.meta["objective_sign"] * minimized_value + prog.meta["objective_constant"]
