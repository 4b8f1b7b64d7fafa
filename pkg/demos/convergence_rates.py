"""
Observed approximation orders of SK operators.

Runs every rate check on synthetic functions and prints the fitted
log-log slopes next to the orders predicted by the theory: ``-alpha`` for
Hölder-`alpha` functions in sup and L2 norm, ``-2 alpha`` for the cSSIM
dissimilarity, and a bounded ``error * w / log w`` for a Jackson kernel of
order 1, whose first moment is infinite.

Run as ``python3 demos/convergence_rates.py``.
"""
from skrecon.convergence import run_suite

for case, fit, ok in run_suite("all"):
    errs = "  ".join(f"{e:.2e}" for e in fit.errors)
    ws = ",".join(f"{w:g}" for w in fit.w_values)
    print(f"{case.name}\n  w = {ws}\n  errors {errs}")
    if case.max_spread is not None:
        print(f"  error*w/log(w) spread {fit.constant_spread:.3f}  ({case.criterion()})  {'ok' if ok else 'FAIL'}")
    else:
        print(f"  slope {fit.slope:.3f}  ({case.criterion()})  {'ok' if ok else 'FAIL'}")
