"""
The BSC sufficient condition
============================

On the BSC the design constraint only has to hold for ``x`` in
``[0, p]``.  The lift then uses ``x = p t^2 / (1 + t^2)`` and the rest of
the pipeline is unchanged.
"""

from ldpc_sos import CHECK, Infeasible, optimize_lambda_bsc, optimize_lambda_bsc_grid_lp, regular
from ldpc_sos.joint import binary_entropy

rho = regular(CHECK, 6)
print(" p       SOS rate   LP rate    1-h(p)")
for p in (0.01, 0.03, 0.05, 0.07, 0.09):
    try:
        s = optimize_lambda_bsc(rho, p, max_vdeg=8).design_rate
        l = optimize_lambda_bsc_grid_lp(rho, p, max_vdeg=8).design_rate
        print(f" {p:.2f}   {s:.6f}   {l:.6f}   {1 - binary_entropy(p):.6f}")
    except Infeasible:
        # no distribution with these degrees meets the condition; the
        # solver returned a verified Farkas ray rather than giving up
        print(f" {p:.2f}   infeasible")
