import json

import numpy as np
import pytest

from ldpc_sos.design import (
    BEC_LAMBDA,
    BEC_RHO,
    BSC_LAMBDA,
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
from ldpc_sos.errors import CrossoverOutOfRange, EpsilonOutOfRange, Infeasible, InputError
from ldpc_sos.polynomials import CHECK, VARIABLE, design_rate, regular

RHO6 = regular(CHECK, 6)
LAM3 = regular(VARIABLE, 3)


def check_result(res: DesignResult):
    assert res.validation.feasible and res.validation.tolerance == 1e-6
    assert abs(design_rate(res.lam, res.rho) - res.design_rate) <= 1e-9
    assert res.distribution.integral() == pytest.approx(res.objective, abs=1e-12)


class TestLambdaBEC:
    def test_forced_regular(self):
        res = optimize_lambda_bec(RHO6, 0.2, 2)
        assert res.distribution.weights == {2: 1.0}
        assert res.design_rate == pytest.approx(2 / 3, abs=1e-12)
        check_result(res)

    def test_forced_regular_infeasible(self):
        with pytest.raises(Infeasible):
            optimize_lambda_bec(RHO6, 0.25, 2)

    def test_against_lp(self):
        sos = optimize_lambda_bec(RHO6, 0.3, 10)
        lp = optimize_lambda_grid_lp(RHO6, 0.3, 10, 10_000)
        check_result(sos)
        assert 0.5 <= sos.design_rate <= 0.7
        assert lp.objective >= sos.objective - 1e-9
        assert lp.design_rate - sos.design_rate <= 2e-3
        assert sos.certificate.is_psd()
        assert sos.solver_stats["gram_residual"] <= 1e-6
        assert sos.design_rate <= 1 - 0.3 + 1e-9

    def test_lp_refinement(self):
        sos = optimize_lambda_bec(RHO6, 0.3, 10)
        gaps = [optimize_lambda_grid_lp(RHO6, 0.3, 10, n).objective - sos.objective for n in (100, 1000, 10_000)]
        assert all(g >= -1e-9 for g in gaps)
        assert gaps[0] + 1e-9 >= gaps[1] and gaps[1] + 1e-9 >= gaps[2]

    def test_lp_forced(self):
        assert optimize_lambda_grid_lp(RHO6, 0.2, 2, 10_000).design_rate == pytest.approx(2 / 3, abs=1e-12)

    def test_lp_grid_floor(self):
        with pytest.raises(InputError):
            optimize_lambda_grid_lp(RHO6, 0.3, 5, 99)

    def test_monotone_in_max_degree(self):
        objs = [optimize_lambda_bec(RHO6, 0.4, d).objective for d in (3, 5, 7, 9)]
        assert all(b >= a - 1e-8 for a, b in zip(objs, objs[1:]))

    def test_param_errors(self):
        with pytest.raises(EpsilonOutOfRange):
            optimize_lambda_bec(RHO6, 1.2, 5)
        with pytest.raises(InputError):
            optimize_lambda_bec(RHO6, 0.3, 1)

    def test_json_round_trip(self):
        res = optimize_lambda_bec(RHO6, 0.35, 5)
        back = DesignResult.from_json(json.loads(json.dumps(res.to_json())))
        assert back.distribution == res.distribution and back.design_rate == res.design_rate
        assert back.validation == res.validation
        np.testing.assert_array_equal(back.certificate.entries, res.certificate.entries)
        assert validate_design(back).feasible


class TestRhoBEC:
    def test_forced(self):
        res = optimize_rho_bec(LAM3, 0.4, 2)
        assert res.distribution.weights == {2: 1.0}
        assert res.objective == pytest.approx(0.5, abs=1e-12)
        check_result(res)

    def test_against_lp(self):
        sos = optimize_rho_bec(LAM3, 0.4, 8)
        lp = optimize_rho_grid_lp(LAM3, 0.4, 8, 10_000)
        check_result(sos)
        assert lp.objective <= sos.objective + 1e-9
        assert sos.objective - lp.objective <= 2e-3
        assert sos.design_rate <= 1 - 0.4 + 1e-9


class TestLambdaBSC:
    def test_small_crossover(self):
        res = optimize_lambda_bsc(RHO6, 0.01, 4)
        assert res.design_rate > 0
        assert res.validation.feasible and res.validation.argmax_x <= 0.01
        check_result(res)

    def test_large_crossover_infeasible(self):
        with pytest.raises(Infeasible):
            optimize_lambda_bsc(RHO6, 0.2, 3)
        with pytest.raises(Infeasible):
            optimize_lambda_bsc_grid_lp(RHO6, 0.2, 3, 10_000)

    def test_strongly_infeasible_is_classified(self):
        # backend alone misreports this one; the wrapper must still say infeasible
        with pytest.raises(Infeasible):
            optimize_lambda_bsc(RHO6, 0.08, 8)

    def test_against_lp(self):
        sos = optimize_lambda_bsc(RHO6, 0.05, 6)
        lp = optimize_lambda_bsc_grid_lp(RHO6, 0.05, 6, 10_000)
        assert abs(sos.design_rate - lp.design_rate) <= 2e-3
        assert lp.objective >= sos.objective - 1e-9

    def test_range(self):
        with pytest.raises(CrossoverOutOfRange):
            optimize_lambda_bsc(RHO6, 0.5, 4)


class TestCertify:
    @pytest.mark.parametrize("eps, expected", [(0.3, True), (0.42, True), (0.44, False), (0.6, False)])
    def test_both_forms(self, eps, expected):
        assert certify(BEC_LAMBDA, LAM3, RHO6, eps)[0] is expected
        assert certify(BEC_RHO, LAM3, RHO6, eps)[0] is expected

    def test_gram_returned(self):
        ok, gram, sol = certify_bec(LAM3, RHO6, 0.3)
        assert ok and gram.is_psd() and gram.dim == 11

    def test_bsc(self):
        assert certify(BSC_LAMBDA, LAM3, RHO6, 0.02)[0]
        assert not certify(BSC_LAMBDA, LAM3, RHO6, 0.2)[0]

    def test_unknown_problem(self):
        with pytest.raises(InputError):
            certify("awgn", LAM3, RHO6, 0.3)
