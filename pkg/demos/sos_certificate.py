"""
Reading an SOS certificate
==========================

A polynomial that is nonnegative on [0, a] becomes, after the rational
substitution, a polynomial that is nonnegative on the whole line, which
in one variable means it is a sum of squares: ``Pi(t) = m(t)^T B m(t)``
with ``B`` positive semidefinite and ``m(t) = (1, t, ..., t^q)``.
"""

import numpy as np

from ldpc_sos import CHECK, VARIABLE, certify_bec, regular
from ldpc_sos.density_evolution import bec_margin

lam, rho, eps = regular(VARIABLE, 3), regular(CHECK, 6), 0.40
ok, gram, sol = certify_bec(lam, rho, eps)
print(f"certified: {ok}   Gram side {gram.dim}   backend iterations {sol.iterations}")

B = gram.entries
w, V = np.linalg.eigh(B)
print(f"eigenvalues of B range from {w.min():.2e} to {w.max():.2e}")

# evaluate m(t)^T B m(t) against the lifted polynomial at a few points;
# dividing by (1 + t^2)^q keeps the numbers small
q = gram.dim - 1
for t in (0.0, 0.3, 1.0, 3.0):
    m = t ** np.arange(q + 1) / (1 + t * t) ** (q / 2)
    x = t * t / (1 + t * t)
    print(f"  t={t:3.1f}  m'Bm={m @ B @ m: .6e}  P(x)={float(bec_margin(lam, rho, eps)(x)): .6e}")

# above threshold there is no certificate; the solver proves it
ok, gram, sol = certify_bec(lam, rho, 0.45)
print(f"eps=0.45: certified={ok}, status={sol.status}")
