"""Joint source-channel rate allocation over a two-user erasure MAC.

Two correlated binary sources ``U1, U2`` with ``U2`` uniform and
``U2 = U1 xor Z``, ``P(Z = 0) = p``, are sent over orthogonal erasure
links with erasure probabilities ``eps1, eps2``.  User 2 is uncompressed
(``Rs2 = 1``) and uses a fixed code; user 1 picks a compression rate
``Rs1`` and an LDPC code of rate ``Rc1``, and the goal is to maximize
``Rs1 * Rc1`` under the MAC caps and the Slepian-Wolf floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .design import BEC_LAMBDA, certify, optimize_lambda_bec
from .errors import CapNonpositive, DEInfeasible, InputError, ParamOutOfRange, SourceIncompressible
from .polynomials import CHECK, VARIABLE, DegreeDistribution, design_rate, regular

NON_POSITIVE_RATE = "NonPositiveRate"
RS1_AT_ENTROPY_FLOOR = "Rs1AtEntropyFloor"
RS1_AT_UNITY = "Rs1AtUnity"
RECONSTRUCTED_OBJECTIVE = "ReconstructedObjective"

FIXED = "fixed"
OPTIMIZE = "optimize"

ASSUMPTIONS = (
    "MAC caps model orthogonal erasure links: I(X1;Y|X2) = 1 - eps1, I(X1,X2;Y) = 2 - eps1 - eps2",
    "source model: U2 uniform, U2 = U1 xor Z, so H(U1|U2) = h(p) and H(U1,U2) = 1 + h(p)",
    "sum rate is taken as Rs1*Rc1 + Rs2*Rc2 with Rs2 = 1",
    "code rates use the edge-perspective rate 1 - (sum rho_j/j)/(sum lambda_i/i) as given",
    "when Rc1 <= 0 the channel caps do not bind and Rs1 sits at the Slepian-Wolf floor",
)


def binary_entropy(u: float) -> float:
    """``h(u)`` in bits, with ``0 log 0 = 0``."""
    if not 0.0 <= u <= 1.0:
        raise ParamOutOfRange(f"u={u} not in [0, 1]")
    if u in (0.0, 1.0):
        return 0.0
    return -u * math.log2(u) - (1.0 - u) * math.log2(1.0 - u)


def slepian_wolf_bounds(correlation_p: float, Rs2: float = 1.0) -> tuple[float, float]:
    """``(lower, upper)`` on ``Rs1`` for the xor-correlated source pair."""
    if not 0.5 < correlation_p <= 1.0:
        raise ParamOutOfRange(f"correlation_p={correlation_p} not in (0.5, 1]")
    if not 0.0 <= Rs2 <= 1.0:
        raise ParamOutOfRange(f"Rs2={Rs2} not in [0, 1]")
    h = binary_entropy(correlation_p)
    return max(h, 1.0 + h - Rs2), 1.0


def mac_caps(epsilon1: float, epsilon2: float, Rc2: float) -> tuple[float, float]:
    """``(cap_individual, cap_sum_residual)`` for user 1.

    This is the only place the MAC model enters; swap it out to try a
    different channel.
    """
    for name, e in (("epsilon1", epsilon1), ("epsilon2", epsilon2)):
        if not 0.0 < e < 1.0:
            raise ParamOutOfRange(f"{name}={e} not in (0, 1)")
    c1, c2 = 1.0 - epsilon1, 1.0 - epsilon2
    return c1, c1 + c2 - Rc2


@dataclass(frozen=True, eq=False)
class JointDesignSpec:
    epsilon1: float
    epsilon2: float
    correlation_p: float
    rho1: DegreeDistribution
    rho2: DegreeDistribution
    lambda2: DegreeDistribution
    lambda1: DegreeDistribution | None = None  # used when lambda1_mode == "fixed"
    max_vdeg1: int | None = None  # used when lambda1_mode == "optimize"
    lambda1_mode: str = FIXED
    Rs2: float = 1.0

    def __post_init__(self):
        for name, e in (("epsilon1", self.epsilon1), ("epsilon2", self.epsilon2)):
            if not 0.0 < e < 1.0:
                raise ParamOutOfRange(f"{name}={e} not in (0, 1)")
        if not 0.5 < self.correlation_p <= 1.0:
            raise ParamOutOfRange(f"correlation_p={self.correlation_p} not in (0.5, 1]")
        if self.Rs2 != 1.0:
            raise ParamOutOfRange("Rs2 is fixed at 1")
        for name, d, kind in (("rho1", self.rho1, CHECK), ("rho2", self.rho2, CHECK),
                              ("lambda2", self.lambda2, VARIABLE)):
            if d.kind != kind:
                raise InputError(f"{name} must be a {kind} distribution")
        if self.lambda1_mode == FIXED:
            if self.lambda1 is None or self.lambda1.kind != VARIABLE:
                raise InputError("fixed mode needs a variable-side lambda1")
        elif self.lambda1_mode == OPTIMIZE:
            if self.max_vdeg1 is None or self.max_vdeg1 < 2:
                raise InputError("optimize mode needs max_vdeg1 >= 2")
        else:
            raise InputError(f"lambda1_mode must be {FIXED!r} or {OPTIMIZE!r}")

    @property
    def d_v1(self) -> int:
        """Sweep key: max variable degree of user 1's code."""
        return self.lambda1.max_degree if self.lambda1_mode == FIXED else int(self.max_vdeg1)

    def to_json(self) -> dict:
        return {
            "epsilon1": self.epsilon1,
            "epsilon2": self.epsilon2,
            "correlation_p": self.correlation_p,
            "rho1": self.rho1.to_json(),
            "rho2": self.rho2.to_json(),
            "lambda2": self.lambda2.to_json(),
            "lambda1": None if self.lambda1 is None else self.lambda1.to_json(),
            "max_vdeg1": self.max_vdeg1,
            "lambda1_mode": self.lambda1_mode,
            "Rs2": self.Rs2,
        }


@dataclass(frozen=True, eq=False)
class JointDesignResult:
    d_v1: int
    Rs1: float
    Rc1: float
    Rc2: float
    lambda1: DegreeDistribution
    cap_individual: float
    cap_sum_residual: float
    objective_R1_plus_R2: float
    sw_lower: float
    flags: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "d_v1": self.d_v1,
            "Rs1": self.Rs1,
            "Rc1": self.Rc1,
            "Rc2": self.Rc2,
            "lambda1": self.lambda1.to_json(),
            "cap_individual": self.cap_individual,
            "cap_sum_residual": self.cap_sum_residual,
            "objective_R1_plus_R2": self.objective_R1_plus_R2,
            "sw_lower": self.sw_lower,
            "flags": list(self.flags),
            "assumptions": list(self.assumptions),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointDesignResult":
        return cls(int(obj["d_v1"]), float(obj["Rs1"]), float(obj["Rc1"]), float(obj["Rc2"]),
                   DegreeDistribution.from_json(obj["lambda1"]), float(obj["cap_individual"]),
                   float(obj["cap_sum_residual"]), float(obj["objective_R1_plus_R2"]),
                   float(obj["sw_lower"]), list(obj.get("flags", [])), list(obj.get("assumptions", [])))


def design_joint_mac(spec: JointDesignSpec, **solver_kw) -> JointDesignResult:
    flags = [RECONSTRUCTED_OBJECTIVE]
    Rc2 = design_rate(spec.lambda2, spec.rho2)
    if Rc2 <= 0:
        flags.append(NON_POSITIVE_RATE)
    cap_ind, cap_sum = mac_caps(spec.epsilon1, spec.epsilon2, Rc2)
    cap = min(cap_ind, cap_sum)
    if cap <= 0:
        raise CapNonpositive(f"channel cap {cap:.6g} leaves no room for user 1")

    if spec.lambda1_mode == FIXED:
        lam1 = spec.lambda1
        ok, _, _ = certify(BEC_LAMBDA, lam1, spec.rho1, spec.epsilon1, **solver_kw)
        if not ok:
            raise DEInfeasible(f"lambda1 does not converge at epsilon1={spec.epsilon1}")
        Rc1 = design_rate(lam1, spec.rho1)
    else:
        res = optimize_lambda_bec(spec.rho1, spec.epsilon1, spec.max_vdeg1, **solver_kw)
        lam1, Rc1 = res.distribution, res.design_rate

    sw_lower, upper = slepian_wolf_bounds(spec.correlation_p, spec.Rs2)
    if Rc1 <= 0:
        # Rs1 * Rc1 <= 0 < cap, so only the source bounds remain and the
        # product is largest at the smallest admissible Rs1.
        if NON_POSITIVE_RATE not in flags:
            flags.append(NON_POSITIVE_RATE)
        Rs1 = sw_lower
    else:
        ratio = cap / Rc1
        if ratio < sw_lower:
            raise SourceIncompressible(
                f"cap/Rc1 = {ratio:.6g} is below the Slepian-Wolf floor {sw_lower:.6g}")
        Rs1 = min(ratio, upper)
    if Rs1 == sw_lower:
        flags.append(RS1_AT_ENTROPY_FLOOR)
    if Rs1 == upper:
        flags.append(RS1_AT_UNITY)
    return JointDesignResult(spec.d_v1, Rs1, Rc1, Rc2, lam1, cap_ind, cap_sum,
                             Rs1 * Rc1 + spec.Rs2 * Rc2, sw_lower, flags, list(ASSUMPTIONS))


def sweep_joint_mac(spec: JointDesignSpec, dv1_list, **solver_kw) -> list[JointDesignResult]:
    """Run ``design_joint_mac`` for each ``d_v1``; results are ordered by ``d_v1``.

    In fixed mode ``lambda1`` becomes the regular ``x**(d - 1)``; in optimize
    mode ``d`` is the maximum variable degree.
    """
    out = []
    for d in sorted(set(int(d) for d in dv1_list)):
        if spec.lambda1_mode == FIXED:
            s = replace(spec, lambda1=regular(VARIABLE, d))
        else:
            s = replace(spec, max_vdeg1=d)
        out.append(design_joint_mac(s, **solver_kw))
    return out
