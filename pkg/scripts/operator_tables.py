"""T_k on monomials (coefficient tables) and empirical operator constants vs seed."""
import argparse

import numpy as np

from pdisks.cauchy_ops import apply_Tk_coeffs, estimate_bounds
from pdisks.disk_field import monomial

ap = argparse.ArgumentParser()
ap.add_argument("--R", type=float, default=1.0)
ap.add_argument("--max-degree", type=int, default=4)
ap.add_argument("--samples", type=int, default=30)
ap.add_argument("--seeds", type=int, default=3)
args = ap.parse_args()

print("# T_k(zeta^l zetabar^m): nonzero output terms as (l', m', coefficient)")
print("l,m,k,terms")
for l in range(args.max_degree + 1):
    for m in range(args.max_degree + 1 - l):
        for k in (-1, 0, 1, None):
            out = apply_Tk_coeffs(monomial(l, m), args.R, k)[0]
            terms = " ".join(f"({a},{b},{out[a, b].real:+.6g})" for a, b in zip(*np.nonzero(out)))
            print(f"{l},{m},{'inf' if k is None else ('T' if k == -1 else k)},{terms}")

print("\n# empirical constants")
print("seed,samples,c1_hat,c2_hat,C_hat,mu_hat")
for seed in range(args.seeds):
    e = estimate_bounds(seed, args.samples)
    print(f"{seed},{e.sample_count},{e.c1_hat:.4f},{e.c2_hat:.4f},{e.C_hat:.4f},{e.mu_hat:.4f}", flush=True)
