"""Success ball around v0 = (1, 0): 5x5 jet samples per ball radius and amplitude."""
import argparse

from pdisks.acs import catalog
from pdisks.solver import SolveConfig, jet_sweep

ap = argparse.ArgumentParser()
ap.add_argument("--amplitudes", type=float, nargs="+", default=[0.05, 0.2, 0.5])
ap.add_argument("--radii", type=float, nargs="+", default=[0.05, 0.2, 0.5])
ap.add_argument("--R-solve", type=float, default=0.9)
ap.add_argument("--workers", type=int, default=1)
args = ap.parse_args()

print("amplitude,ball_radius,converged,total,success_radius,worst_residual")
for amp in args.amplitudes:
    J = catalog("perturbed", n=2, R=1.0, amplitude=amp)
    for rad in args.radii:
        s = jet_sweep(J, radius=rad, config=SolveConfig(R_solve=args.R_solve), workers=args.workers)
        ok = [r for r in s.rows if r["verdict"] == "converged"]
        worst = max((r["residual"] for r in ok), default=float("nan"))
        print(f"{amp},{rad},{len(ok)},{len(s.rows)},{s.success_radius:.4f},{worst:.2e}", flush=True)
