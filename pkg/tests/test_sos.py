import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldpc_sos.conic import OPTIMAL, PRIMAL_INFEASIBLE, solve
from ldpc_sos.density_evolution import AffinePolynomial, FreeSide, build_de_poly_bec, check_feasibility_grid
from ldpc_sos.errors import IndexSpaceMismatch, InputError, ZeroPolynomial
from ldpc_sos.polynomials import CHECK, VARIABLE, Polynomial, regular
from ldpc_sos.sos import (
    GramMatrix,
    assemble_program,
    build_sos_feasibility,
    gram_block,
    lift_to_real_line,
    smat,
    svec,
    svec_size,
)


def concrete(coeffs):
    c = np.asarray(coeffs, dtype=float)
    return AffinePolynomial(c, np.zeros((len(c), 0)))


def sos_check(P, a=1.0, reduce=True):
    frag = build_sos_feasibility(lift_to_real_line(P, a), reduce=reduce)
    prog = assemble_program((0.0, np.zeros(0)), [frag], num_vars=0)
    sol = solve(prog)
    gram = frag.gram(gram_block(prog, sol.primal)) if sol.status == OPTIMAL else None
    return sol, frag, gram


class TestSvec:
    @given(st.integers(1, 7), st.integers(0, 2**31))
    def test_round_trip_and_inner_product(self, n, seed):
        r = np.random.default_rng(seed)
        A, B = r.normal(size=(n, n)), r.normal(size=(n, n))
        A, B = A + A.T, B + B.T
        np.testing.assert_allclose(smat(svec(A)), A, atol=1e-14)
        assert svec(A) @ svec(B) == pytest.approx(np.trace(A @ B), rel=1e-12, abs=1e-12)
        assert len(svec(A)) == svec_size(n)

    def test_layout(self):
        M = np.array([[1.0, 2.0], [2.0, 3.0]])
        np.testing.assert_allclose(svec(M), [1.0, 2.0 * np.sqrt(2), 3.0])

    def test_bad_length(self):
        with pytest.raises(InputError):
            smat(np.ones(4))


class TestLift:
    @pytest.mark.parametrize("coeffs, expected", [
        ([0, 1], [0, 0, 1]),
        ([0, 1, -1], [0, 0, 1, 0, 0]),
        ([1], [1]),
    ])
    def test_examples(self, coeffs, expected):
        Pi = lift_to_real_line(concrete(coeffs), 1.0)
        np.testing.assert_allclose(Pi.coefficients(), expected, atol=1e-14)

    def test_zero(self):
        with pytest.raises(ZeroPolynomial):
            lift_to_real_line(concrete([0, 0]), 1.0)

    def test_interval_check(self):
        with pytest.raises(InputError):
            lift_to_real_line(concrete([0, 1]), 0.0)

    def test_degree_cap(self):
        with pytest.raises(InputError):
            lift_to_real_line(concrete(np.ones(202)), 1.0)

    def test_random_lifts(self, rng):
        for _ in range(20):
            deg = int(rng.integers(0, 41))
            c = rng.uniform(-1, 1, deg + 1)
            a = float(rng.uniform(0.05, 1.0))
            Pi = lift_to_real_line(concrete(c), a).instantiate()
            q = Polynomial(c).degree()
            t = rng.uniform(-10, 10, 100)
            expected = (1 + t**2) ** q * Polynomial(c)(a * t**2 / (1 + t**2))
            got = Pi(t)
            assert np.all(np.abs(got - expected) <= 1e-9 * np.maximum(np.abs(expected), (1 + t**2) ** q * 1e-3))

    def test_affine_lift_instantiates(self):
        P = build_de_poly_bec(FreeSide(VARIABLE, 4), regular(CHECK, 4), 0.3)
        Pi = lift_to_real_line(P, 1.0)
        z = np.array([0.2, 0.5, 0.3])
        direct = lift_to_real_line(concrete(P.instantiate(z).array), 1.0)
        np.testing.assert_allclose(Pi.coefficients(z), direct.coefficients(), atol=1e-10)


class TestFragments:
    def test_square_t(self):
        sol, frag, gram = sos_check(concrete([0, 1]))  # lifts to t^2
        assert sol.status == OPTIMAL
        np.testing.assert_allclose(gram.entries, np.diag([0.0, 1.0]), atol=1e-7)

    def test_shifted_square(self):
        Pi = concrete([1, -2, 1])
        frag = build_sos_feasibility(Pi)
        prog = assemble_program((0.0, np.zeros(0)), [frag], num_vars=0)
        sol = solve(prog)
        assert sol.status == OPTIMAL
        np.testing.assert_allclose(frag.gram(gram_block(prog, sol.primal)).entries,
                                   [[1, -1], [-1, 1]], atol=1e-6)

    def test_negative_constant(self):
        frag = build_sos_feasibility(concrete([-1.0]))
        sol = solve(assemble_program((0.0, np.zeros(0)), [frag], num_vars=0))
        assert sol.status == PRIMAL_INFEASIBLE

    def test_even_length_rejected(self):
        with pytest.raises(InputError):
            build_sos_feasibility(concrete([1.0, 0.0]))

    def test_dimension_bookkeeping(self):
        P = build_de_poly_bec(FreeSide(VARIABLE, 3), regular(CHECK, 6), 0.3)
        frag = build_sos_feasibility(lift_to_real_line(P, 1.0), reduce=False)
        prog = assemble_program((0.0, 1 / np.arange(2, 4)), [frag], [(np.ones(2), 1.0)])
        assert [(k.type, k.size) for k in prog.cones] == [("nonneg", 2), ("psd", 11)]
        assert prog.num_vars == 2 + 66
        assert prog.A.shape[0] == 1 + 21
        assert prog.meta["row_tags"][0] == ["linear", 0]
        assert prog.meta["sense"] == "max" and prog.meta["objective_sign"] == -1.0

    def test_reduction_shrinks_side(self):
        P = build_de_poly_bec(FreeSide(VARIABLE, 3), regular(CHECK, 6), 0.3)
        frag = build_sos_feasibility(lift_to_real_line(P, 1.0))
        assert frag.side < 11 and frag.lo >= 1

    def test_mismatch(self):
        f2 = build_sos_feasibility(lift_to_real_line(AffinePolynomial([0, 1.0], np.zeros((2, 2))), 1.0))
        f3 = build_sos_feasibility(lift_to_real_line(AffinePolynomial([0, 1.0], np.zeros((2, 3))), 1.0))
        with pytest.raises(IndexSpaceMismatch):
            assemble_program((0.0, np.zeros(2)), [f2, f3])
        with pytest.raises(IndexSpaceMismatch):
            assemble_program((0.0, np.zeros(2)), [f2], [(np.ones(3), 1.0)])

    def test_json_dump(self):
        frag = build_sos_feasibility(concrete([1, -2, 1]))
        prog = assemble_program((0.0, np.zeros(0)), [frag], num_vars=0)
        obj = json.loads(prog.dumps())
        assert obj["cones"] == [{"type": "psd", "side": 2}]
        assert all(len(t) == 3 for t in obj["A"])
        assert len(obj["A"]) == prog.A.nnz
        assert len(obj["b"]) == prog.A.shape[0] and len(obj["c"]) == prog.num_vars


class TestExactness:
    def test_completeness(self, rng):
        """Strictly positive polynomials on [0, a] are always certified."""
        for _ in range(20):
            deg = int(rng.integers(1, 13))
            a = float(rng.uniform(0.1, 1.0))
            c = rng.uniform(-1, 1, deg + 1)
            x = np.linspace(0, a, 10_000)
            c[0] += 1e-3 + rng.uniform(0, 0.05) - Polynomial(c)(x).min()
            sol, frag, gram = sos_check(concrete(c), a)
            assert sol.status == OPTIMAL
            assert frag.gram_residual(gram) <= 1e-6
            assert gram.is_psd()

    def test_soundness(self, rng):
        """Whatever is certified also passes the grid oracle."""
        verdicts = []
        for _ in range(20):
            deg = int(rng.integers(1, 13))
            a = float(rng.uniform(0.1, 1.0))
            c = rng.uniform(-1, 1, deg + 1)
            x = np.linspace(0, a, 10_000)
            c[0] += rng.uniform(-0.05, 0.05) - Polynomial(c)(x).min()
            sol, _, _ = sos_check(concrete(c), a)
            verdicts.append(sol.status)
            if sol.status == OPTIMAL:
                assert check_feasibility_grid(Polynomial(c), a, 10_000, 1e-6).feasible
        assert OPTIMAL in verdicts and PRIMAL_INFEASIBLE in verdicts

    def test_gram_json(self):
        g = GramMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert GramMatrix.from_json(json.loads(json.dumps(g.to_json()))).entries.tolist() == g.entries.tolist()
        np.testing.assert_allclose(g.antidiagonal_sums(), [1, -2, 1])
