import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldpc_sos.design import optimize_lambda_bec
from ldpc_sos.errors import CapNonpositive, DEInfeasible, InputError, ParamOutOfRange, SourceIncompressible
from ldpc_sos.joint import (
    NON_POSITIVE_RATE,
    RECONSTRUCTED_OBJECTIVE,
    RS1_AT_ENTROPY_FLOOR,
    RS1_AT_UNITY,
    JointDesignResult,
    JointDesignSpec,
    binary_entropy,
    design_joint_mac,
    mac_caps,
    slepian_wolf_bounds,
    sweep_joint_mac,
)
from ldpc_sos.polynomials import CHECK, VARIABLE, from_degree_map, regular

EX_RHO = from_degree_map(CHECK, {3: 0.5821, 4: 0.4179})


def example_spec(**kw):
    base = dict(epsilon1=0.3, epsilon2=0.3, correlation_p=0.89, rho1=EX_RHO, rho2=EX_RHO,
                lambda2=regular(VARIABLE, 6), lambda1=regular(VARIABLE, 5))
    base.update(kw)
    return JointDesignSpec(**base)


def positive_spec(**kw):
    """A setup where both codes have positive rate (x^2 / x^9 pairs)."""
    base = dict(epsilon1=0.25, epsilon2=0.5, correlation_p=0.89, rho1=regular(CHECK, 10),
                rho2=regular(CHECK, 10), lambda2=regular(VARIABLE, 3), lambda1=regular(VARIABLE, 3))
    base.update(kw)
    return JointDesignSpec(**base)


class TestEntropy:
    def test_values(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
        assert binary_entropy(0.89) == pytest.approx(0.49991596, abs=1e-8)

    def test_range(self):
        with pytest.raises(ParamOutOfRange):
            binary_entropy(1.1)

    @given(st.floats(0, 1))
    def test_symmetric(self, u):
        assert abs(binary_entropy(u) - binary_entropy(1 - u)) <= 1e-12

    def test_symmetric_random(self, rng):
        u = rng.uniform(0, 1, 100)
        assert max(abs(binary_entropy(v) - binary_entropy(1 - v)) for v in u) <= 1e-12


class TestBounds:
    def test_slepian_wolf(self):
        lo, hi = slepian_wolf_bounds(0.89, 1.0)
        assert lo == binary_entropy(0.89) and hi == 1.0
        assert slepian_wolf_bounds(1.0, 1.0)[0] == 0.0
        assert slepian_wolf_bounds(0.89, 0.8)[0] == pytest.approx(0.69991596, abs=1e-8)

    @pytest.mark.parametrize("p, rs2", [(0.5, 1.0), (1.2, 1.0), (0.9, 1.5)])
    def test_slepian_wolf_range(self, p, rs2):
        with pytest.raises(ParamOutOfRange):
            slepian_wolf_bounds(p, rs2)

    def test_mac(self):
        assert mac_caps(0.3, 0.3, 0.5) == pytest.approx((0.7, 0.9))
        assert mac_caps(1 - 1e-6, 0.3, 0.5)[0] == pytest.approx(1e-6)
        assert mac_caps(0.3, 0.3, 1.4)[1] == pytest.approx(0.0, abs=1e-15)
        with pytest.raises(ParamOutOfRange):
            mac_caps(0.0, 0.3, 0.5)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ParamOutOfRange):
            example_spec(epsilon1=1.0)
        with pytest.raises(ParamOutOfRange):
            example_spec(correlation_p=0.4)
        with pytest.raises(ParamOutOfRange):
            example_spec(Rs2=0.9)
        with pytest.raises(InputError):
            example_spec(rho1=regular(VARIABLE, 3))
        with pytest.raises(InputError):
            example_spec(lambda1=None)
        with pytest.raises(InputError):
            example_spec(lambda1_mode="optimize")
        with pytest.raises(InputError):
            example_spec(lambda1_mode="guess")

    def test_json(self):
        obj = json.loads(json.dumps(example_spec().to_json()))
        assert obj["lambda1_mode"] == "fixed" and obj["Rs2"] == 1.0


class TestDesign:
    def test_example_literal_rates(self):
        res = design_joint_mac(example_spec())
        assert res.Rc2 == pytest.approx(-0.79105, abs=1e-5)
        assert res.Rc1 == pytest.approx(1 - 5 * (0.5821 / 3 + 0.4179 / 4), abs=1e-12)
        assert NON_POSITIVE_RATE in res.flags and RECONSTRUCTED_OBJECTIVE in res.flags
        assert res.assumptions

    def test_nonpositive_code_rate_sits_at_floor(self):
        res = design_joint_mac(example_spec())
        assert res.Rs1 == res.sw_lower and RS1_AT_ENTROPY_FLOOR in res.flags
        assert res.Rs1 * res.Rc1 <= min(res.cap_individual, res.cap_sum_residual) + 1e-9

    def test_sweep_invariants(self):
        rows = sweep_joint_mac(example_spec(), [11, 5, 7, 6, 9, 8, 10])
        assert [r.d_v1 for r in rows] == list(range(5, 12))
        rs1 = [r.Rs1 for r in rows]
        assert all(b <= a + 1e-12 for a, b in zip(rs1, rs1[1:]))
        for r in rows:
            assert r.sw_lower - 1e-12 <= r.Rs1 <= 1.0
            assert r.Rs1 * r.Rc1 <= min(r.cap_individual, r.cap_sum_residual) + 1e-9

    def test_interior_allocation(self):
        res = design_joint_mac(positive_spec())
        assert res.Rc1 == pytest.approx(0.7) and res.Rc2 == pytest.approx(0.7)
        assert res.cap_sum_residual == pytest.approx(0.55)
        assert res.Rs1 == pytest.approx(0.55 / 0.7, abs=1e-12)
        assert res.Rs1 * res.Rc1 == pytest.approx(min(res.cap_individual, res.cap_sum_residual))
        assert res.objective_R1_plus_R2 == pytest.approx(0.55 + 0.7)
        assert NON_POSITIVE_RATE not in res.flags

    def test_unity_clamp(self):
        res = design_joint_mac(positive_spec(epsilon2=0.1))
        assert res.Rs1 == 1.0 and RS1_AT_UNITY in res.flags

    def test_perfect_correlation(self):
        res = design_joint_mac(positive_spec(epsilon2=0.9, correlation_p=1.0))
        assert res.sw_lower == 0.0
        cap = min(res.cap_individual, res.cap_sum_residual)
        assert res.Rs1 == pytest.approx(min(1.0, cap / res.Rc1))

    def test_source_incompressible(self):
        with pytest.raises(SourceIncompressible):
            design_joint_mac(positive_spec(epsilon2=0.9))

    def test_cap_nonpositive(self):
        with pytest.raises(CapNonpositive):
            design_joint_mac(positive_spec(epsilon2=0.95, rho2=regular(CHECK, 20)))

    def test_de_infeasible(self):
        with pytest.raises(DEInfeasible):
            design_joint_mac(positive_spec(epsilon1=0.45, rho1=regular(CHECK, 6)))

    def test_optimize_mode(self):
        spec = positive_spec(lambda1=None, lambda1_mode="optimize", max_vdeg1=6)
        res = design_joint_mac(spec)
        ref = optimize_lambda_bec(spec.rho1, spec.epsilon1, 6)
        assert res.Rc1 == pytest.approx(ref.design_rate, abs=1e-9)
        assert res.d_v1 == 6

    def test_result_json(self):
        res = design_joint_mac(positive_spec())
        back = JointDesignResult.from_json(json.loads(json.dumps(res.to_json())))
        assert back.to_json() == res.to_json()
        assert np.isfinite(back.objective_R1_plus_R2)
