"""Direct vs layered Picard on the perturbed structure across amplitudes.

    python3 scripts/solver_envelope.py [--R-solve 0.9 0.95] [--out envelope.csv]
"""
import argparse
import csv
import sys
import time

import numpy as np

from pdisks.acs import catalog
from pdisks.solver import JetCondition, SolveConfig, solve

ap = argparse.ArgumentParser()
ap.add_argument("--R-solve", type=float, nargs="+", default=[0.9, 0.95])
ap.add_argument("--amplitudes", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2, 0.4, 0.8])
ap.add_argument("--u2", type=float, default=0.03)
ap.add_argument("--out", default=None)
args = ap.parse_args()

fh = open(args.out, "w", newline="") if args.out else sys.stdout
w = csv.writer(fh)
w.writerow(["amplitude", "R_solve", "scheme", "verdict", "iterations", "residual", "kappa_hat", "max_deviation", "seconds"])
for amp in args.amplitudes:
    J = catalog("perturbed", n=2, R=1.0, amplitude=amp)
    for Rs in args.R_solve:
        for scheme in ("direct", "layered"):
            t0 = time.perf_counter()
            res = solve(J, JetCondition.at_origin([1.0, args.u2]), SolveConfig(R_solve=Rs, scheme=scheme))
            d = res.diagnostics
            w.writerow([amp, Rs, scheme, res.verdict, res.iterations, f"{res.residual:.3e}",
                        f"{d.get('kappa_hat', np.nan):.3f}", f"{d.get('max_deviation', np.nan):.3e}",
                        f"{time.perf_counter() - t0:.2f}"])
            fh.flush()
