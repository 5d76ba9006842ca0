"""Bernstein-basis helpers on [0, 1].

A coefficient vector ``b`` of length ``n + 1`` stands for
``sum_k b[k] * C(n, k) * s**k * (1 - s)**(n - k)``.  Products and degree
elevation only form convex combinations of coefficients, which is what
keeps density-evolution polynomials of degree ~100 accurate in double
precision where the monomial expansion is not.

Every function accepts 2-D arrays, treating each column as a separate
polynomial, so affine coefficient tables go through unchanged.
"""

from __future__ import annotations

import numpy as np
from scipy.special import comb, gammaln


def log_binom(n: int) -> np.ndarray:
    k = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _as2d(c):
    c = np.asarray(c, dtype=float)
    return (c[:, None], True) if c.ndim == 1 else (c, False)


def multiply(a, b) -> np.ndarray:
    """Product of ``a`` (1-D) with ``b`` (1-D or column-stacked 2-D)."""
    a = np.asarray(a, dtype=float)
    B, flat = _as2d(b)
    m, n = len(a) - 1, B.shape[0] - 1
    aw = a * comb(m, np.arange(m + 1))
    bw = B * comb(n, np.arange(n + 1))[:, None]
    out = np.empty((m + n + 1, B.shape[1]))
    for j in range(B.shape[1]):
        out[:, j] = np.convolve(aw, bw[:, j])
    out /= comb(m + n, np.arange(m + n + 1))[:, None]
    return out[:, 0] if flat else out


def elevate(c, degree: int) -> np.ndarray:
    """Raise the nominal degree of ``c`` to ``degree`` (exact)."""
    C, _ = _as2d(c)
    r = degree - (C.shape[0] - 1)
    if r < 0:
        raise ValueError("cannot lower degree by elevation")
    if r == 0:
        return np.array(c, dtype=float)
    return multiply(np.ones(r + 1), c)


def power(c, k: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(k):
        out = multiply(c, out)
    return out


def powers(c, k_max: int) -> list[np.ndarray]:
    """``[c**0, c**1, ..., c**k_max]``."""
    out = [np.ones(1)]
    for _ in range(k_max):
        out.append(multiply(c, out[-1]))
    return out


def from_monomial(p, a: float = 1.0) -> np.ndarray:
    """Bernstein coefficients on [0, a] of the monomial polynomial ``p`` in x."""
    P, flat = _as2d(p)
    n = P.shape[0] - 1
    scaled = P * (a ** np.arange(n + 1))[:, None]
    out = np.zeros_like(scaled)
    cn = comb(n, np.arange(n + 1))
    for k in range(n + 1):
        j = np.arange(k + 1)
        out[k] = ((comb(k, j) / cn[: k + 1])[:, None] * scaled[: k + 1]).sum(axis=0)
    return out[:, 0] if flat else out


def to_monomial(b, a: float = 1.0) -> np.ndarray:
    """Monomial coefficients in x of a Bernstein polynomial on [0, a].

    Ill-conditioned for high degree; meant for small cases and tests.
    """
    B, flat = _as2d(b)
    n = B.shape[0] - 1
    out = np.zeros_like(B)
    cn = comb(n, np.arange(n + 1))
    for j in range(n + 1):
        k = np.arange(j + 1)
        w = cn[j] * comb(j, k) * (-1.0) ** (j - k)
        out[j] = (w[:, None] * B[: j + 1]).sum(axis=0)
    out /= (a ** np.arange(n + 1))[:, None]
    return out[:, 0] if flat else out


def evaluate(b, s) -> np.ndarray:
    """de Casteljau evaluation of a 1-D Bernstein vector at points ``s``."""
    s = np.asarray(s, dtype=float)
    work = np.tile(np.asarray(b, dtype=float)[:, None], (1, s.size))
    sv = s.ravel()[None, :]
    for r in range(len(b) - 1, 0, -1):
        work = (1 - sv) * work[:r] + sv * work[1 : r + 1]
    out = work[0].reshape(s.shape)
    return float(out) if out.ndim == 0 else out
