"""
Erasure thresholds by bisection
===============================

Density evolution on the BEC collapses to the scalar recursion
``x <- eps * lambda(1 - rho(1 - x))``.  Bisecting on whether it reaches
zero gives the ensemble threshold.
"""

from ldpc_sos import CHECK, VARIABLE, de_recursion_bec, from_degree_map, regular, threshold_bec

lam, rho = regular(VARIABLE, 3), regular(CHECK, 6)
eps_star = threshold_bec(lam, rho, bisect_tol=1e-6)
print(f"(3,6) threshold: {eps_star:.5f}")

# just below and just above; below threshold the recursion stops as soon
# as eps * lambda(rho'(1) x) < x, after which the decrease to 0 is monotone
for eps in (eps_star - 1e-3, eps_star + 1e-3):
    r = de_recursion_bec(lam, rho, eps)
    print(f"  eps={eps:.5f}  converged={r.converged}  x_final={r.final_x:.3e}  iters={r.iters}")

# with lambda = x the recursion is a concave map and the threshold is 1/5
print(f"lambda=x, rho=x^5: {threshold_bec(regular(VARIABLE, 2), rho):.5f}")

# an irregular pair
lam_irr = from_degree_map(VARIABLE, {2: 0.25, 3: 0.35, 8: 0.40})
print(f"irregular lambda: {threshold_bec(lam_irr, rho):.5f}")
