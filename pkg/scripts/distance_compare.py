"""Chain vs path-integral distances on random pairs (slow: minutes per perturbed pair)."""
import argparse
import time

import numpy as np

from pdisks.acs import catalog
from pdisks.kobayashi import chain_distance, path_distance

ap = argparse.ArgumentParser()
ap.add_argument("--catalog", default="perturbed")
ap.add_argument("--pairs", type=int, default=3)
ap.add_argument("--scale", type=float, default=0.5, help="pairs sampled in |z_i| <= scale * R_i")
ap.add_argument("--seed", type=int, default=7)
ap.add_argument("--levels", default="1,2")
ap.add_argument("--max-chain-length", type=int, default=4)
args = ap.parse_args()

R1 = 1.0 if args.catalog == "integrable" else None
J = catalog(args.catalog, n=2, R=1.0, R1=R1)
rng = np.random.default_rng(args.seed)
levels = tuple(int(s) for s in args.levels.split(","))


def point():
    return args.scale * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2)) * J.domain.radii


print("pair,chain,path,relative_gap,chain_s,path_s")
for k in range(args.pairs):
    p, q = point(), point()
    t0 = time.perf_counter()
    c = chain_distance(J, p, q, max_chain_length=args.max_chain_length, optimize_up_to=2).value
    t1 = time.perf_counter()
    d = path_distance(J, p, q, levels=levels).value
    t2 = time.perf_counter()
    print(f"{k},{c:.5f},{d:.5f},{abs(c - d) / max(c, d):.4f},{t1 - t0:.1f},{t2 - t1:.1f}", flush=True)
