"""Univariate polynomials and edge-perspective degree distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegreeBelowTwo, InputError, NegativeWeight, WeightsNotNormalized

TRIM_TOL = 1e-15
NORMALIZATION_TOL = 1e-9


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(v) for v in coeffs]
    while c and abs(c[-1]) <= TRIM_TOL:
        c.pop()
    return tuple(c) if c else (0.0,)


@dataclass(frozen=True)
class Polynomial:
    """Dense real polynomial, coefficients lowest degree first.

    Trailing coefficients with magnitude <= 1e-15 are trimmed on
    construction, so ``Polynomial([0.0])`` and ``Polynomial([])`` are the
    same zero polynomial.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs=()):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    def degree(self) -> int:
        """Index of the last retained coefficient (0 for the zero polynomial)."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def __call__(self, x):
        return eval_poly(self, x)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polyadd(self.array, other.array))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(npoly.polysub(self.array, other.array))

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(npoly.polymul(self.array, other.array))
        return Polynomial(self.array * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.array)


def eval_poly(p: Polynomial, x):
    """Horner evaluation; ``x`` may be a scalar or a numpy array."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return float(acc) if acc.ndim == 0 else acc


def compose(outer: Polynomial, inner: Polynomial) -> Polynomial:
    """Return ``outer(inner(x))`` (Horner scheme over polynomials)."""
    acc = np.zeros(1)
    q = inner.array
    for c in reversed(outer.coeffs):
        acc = npoly.polyadd(npoly.polymul(acc, q), [c])
    return Polynomial(acc)


VARIABLE = "variable"
CHECK = "check"


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distribution.

    ``weights[d]`` is the fraction of edges attached to nodes of degree
    ``d``; the polynomial form is ``sum_d weights[d] * x**(d - 1)``.
    Build instances with :func:`from_degree_map`, which validates and
    renormalizes.
    """

    kind: str
    weights: Mapping[int, float] = field(hash=False)

    @property
    def degrees(self) -> list[int]:
        return sorted(self.weights)

    @property
    def max_degree(self) -> int:
        return max(self.weights)

    def polynomial(self) -> Polynomial:
        c = np.zeros(self.max_degree)
        for d, w in self.weights.items():
            c[d - 1] = w
        return Polynomial(c)

    def __call__(self, x):
        """Evaluate the distribution polynomial directly (no Horner)."""
        x = np.asarray(x, dtype=float)
        out = sum(w * x ** (d - 1) for d, w in self.weights.items())
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = sum(w * (d - 1) * x ** (d - 2) for d, w in self.weights.items() if d > 1)
        return float(out) if np.ndim(out) == 0 else out

    def integral(self) -> float:
        """``sum_d w_d / d``, the integral of the polynomial over [0, 1]."""
        # fsum keeps the value independent of dict ordering
        return math.fsum(w / d for d, w in self.weights.items())

    def vector(self, max_degree: int | None = None) -> np.ndarray:
        """Weights of degrees 2..max_degree as a dense array."""
        D = max_degree or self.max_degree
        v = np.zeros(D - 1)
        for d, w in self.weights.items():
            if d > D:
                raise InputError(f"degree {d} exceeds max degree {D}")
            v[d - 2] = w
        return v

    def to_json(self) -> dict:
        return {"kind": self.kind, "weights": {str(d): self.weights[d] for d in self.degrees}}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DegreeDistribution":
        return from_degree_map(obj["kind"], {int(k): float(v) for k, v in obj["weights"].items()})

    def compact(self) -> str:
        """``degree:coeff`` list as used on the command line."""
        return ",".join(f"{d}:{self.weights[d]!r}" for d in self.degrees)


def from_degree_map(kind: str, weights: Mapping[int, float]) -> DegreeDistribution:
    if kind not in (VARIABLE, CHECK):
        raise InputError(f"unknown distribution kind {kind!r}")
    if not weights:
        raise InputError("empty degree map")
    clean = {}
    for d, w in weights.items():
        d, w = int(d), float(w)
        if d < 2:
            raise DegreeBelowTwo(f"degree {d} < 2")
        if w < 0:
            raise NegativeWeight(f"weight {w} for degree {d}")
        if w > 0:
            clean[d] = w
    total = math.fsum(clean.values())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise WeightsNotNormalized(f"weights sum to {total!r}")
    return DegreeDistribution(kind, {d: clean[d] / total for d in sorted(clean)})


def from_vector(kind: str, values, drop_below: float = 0.0) -> DegreeDistribution:
    """Distribution from weights of degrees 2, 3, ...; renormalizes."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, None)
    v[v <= drop_below] = 0.0
    total = v.sum()
    if total <= 0:
        raise InputError("all weights vanish")
    return from_degree_map(kind, {i + 2: x / total for i, x in enumerate(v) if x > 0})


def parse_degree_spec(text: str, kind: str) -> DegreeDistribution:
    """Parse ``"3:0.5,4:0.5"`` into a distribution."""
    weights: dict[int, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            d, w = item.split(":")
            weights[int(d)] = weights.get(int(d), 0.0) + float(w)
        except ValueError as exc:
            raise InputError(f"bad degree term {item!r}; expected degree:coeff") from exc
    return from_degree_map(kind, weights)


def regular(kind: str, degree: int) -> DegreeDistribution:
    return from_degree_map(kind, {degree: 1.0})


def design_rate(lam: DegreeDistribution, rho: DegreeDistribution) -> float:
    """``1 - (sum rho_j / j) / (sum lambda_i / i)``; may be negative."""
    if lam.kind != VARIABLE or rho.kind != CHECK:
        raise InputError("design_rate expects (variable, check) distributions")
    return 1.0 - rho.integral() / lam.integral()
