"""Excess max F(v) - F(v0) over shrinking balls, perturbed structure."""
import argparse

from pdisks.acs import catalog
from pdisks.kobayashi import semicontinuity_probe

ap = argparse.ArgumentParser()
ap.add_argument("--amplitude", type=float, default=0.05)
ap.add_argument("--radii", type=float, nargs="+", default=[0.0, 0.005, 0.01, 0.02, 0.05, 0.1])
ap.add_argument("--samples", type=int, default=12)
args = ap.parse_args()

J = catalog("perturbed", n=2, R=1.0, amplitude=args.amplitude)
print("radius,F0,max_excess,relative_excess")
for r in args.radii:
    out = semicontinuity_probe(J, [0, 0], [1, 0], r, n_samples=args.samples)
    print(f"{r},{out['F0']:.5f},{out['max_excess']:.5f},{out['relative_excess']:.4f}", flush=True)
