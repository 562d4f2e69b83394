"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Oracles: closed forms for the operator tables, the pointwise Cauchy integral
(independent of the coefficient route) for the identities, the Poincare
metric for unit and product disks.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from pdisks.acs import catalog
from pdisks.cauchy_ops import apply_Tk_coeffs, cauchy_integral, random_polynomial
from pdisks.disk_field import (
    DiskField,
    PolarGrid,
    dbar,
    evaluate_coeffs,
    fit_polynomial,
    monomial,
    prime_norm,
    sampled_norm,
    truncate,
)
from pdisks.kobayashi import (
    KobayashiConfig,
    chain_distance,
    path_distance,
    pseudonorm,
    semicontinuity_probe,
)
from pdisks.solver import JetCondition, jet_sweep, linear_model_solve, solve_direct


@pytest.fixture
def report(capsys):
    def emit(n, ok, what):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {what}")
    return emit


def pad_err(a, b):
    D = max(a.shape[1], b.shape[1]) - 1
    return float(np.abs(truncate(a, D) - truncate(b, D)).max())


def test_01_operator_exactness(report):
    t0 = time.perf_counter()
    R = 1.3
    err = 0.0
    want = np.zeros((1, 5, 5), complex)
    want[0, 3, 1], want[0, 2, 0] = 1.0, -R**2
    err = max(err, pad_err(apply_Tk_coeffs(monomial(3, 0), R, 1), want))
    want = np.zeros((1, 2, 2), complex)
    want[0, 0, 1] = 1.0
    err = max(err, pad_err(apply_Tk_coeffs(monomial(0, 0), R, 1), want))
    for l in range(13):
        for m in range(13 - l):
            w = monomial(l, m + 1, scale=1.0 / (m + 1))
            err = max(err, pad_err(apply_Tk_coeffs(monomial(l, m), R, None), w))
    dt = time.perf_counter() - t0
    ok = err <= 1e-12 and dt < 1.0
    report(1, ok, f"T_1/T_inf monomial tables, max coefficient error {err:.2e}, {dt:.2f}s")
    assert ok


def test_02_identities(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    R = 1.0
    grid = PolarGrid(R, 24, 48)
    # S evaluated pointwise by the boundary trapezoid rule on an inner disk,
    # then refit: an independent route from the coefficient projection
    inner = PolarGrid(0.8 * R, 14, 28)
    n_bdry = 256
    bdry = R * np.exp(2j * np.pi * np.arange(n_bdry) / n_bdry)
    res = dict(dbarT=0.0, dbarS=0.0, ST=0.0, pompeiu=0.0)
    for _ in range(100):
        deg = int(rng.integers(1, 11))
        c = random_polynomial(rng, deg, R=R)
        f = DiskField.from_coeffs(grid, c)
        Tc = apply_Tk_coeffs(c, R, -1)
        res["dbarT"] = max(res["dbarT"], pad_err(dbar(DiskField.from_coeffs(grid, Tc)).coeffs, c))
        fb = evaluate_coeffs(c, bdry)
        Sf_vals = cauchy_integral(fb, R, inner.nodes)
        Sf = fit_polynomial(inner, Sf_vals, 13)
        res["dbarS"] = max(res["dbarS"], float(np.abs(dbar(Sf).coeffs).max() * (0.8 * R) ** 13))
        STf = cauchy_integral(evaluate_coeffs(Tc, bdry), R, inner.nodes)
        res["ST"] = max(res["ST"], float(np.abs(STf).max()))
        Tdf = evaluate_coeffs(apply_Tk_coeffs(dbar(f).coeffs, R, -1), inner.nodes)
        pomp = Sf_vals + Tdf - evaluate_coeffs(c, inner.nodes)
        res["pompeiu"] = max(res["pompeiu"], float(np.abs(pomp).max()))
    dt = time.perf_counter() - t0
    worst = max(res.values())
    ok = worst <= 1e-8 and dt < 10
    report(2, ok, "identities on 100 random polynomials: "
           + ", ".join(f"{k} {v:.1e}" for k, v in res.items()) + f", {dt:.1f}s")
    assert ok


def test_03_norm_inequality(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    lam = 0.5
    worst, flagged, hard = 0.0, 0, 0
    for k in range(200):
        R = (0.5, 1.0, 2.0)[k % 3]
        g = PolarGrid(R, 8, 16)
        pts = g.closed_nodes
        c = random_polynomial(rng, int(rng.integers(1, 9)), R=R, vanish_at_zero=True)
        f = DiskField.from_coeffs(g, c)
        ratio = sampled_norm(f, lam, pts) / (6 * R * prime_norm(f, lam, pts))
        worst = max(worst, ratio)
        flagged += 1.0 < ratio <= 1.05
        hard += ratio > 1.05
    dt = time.perf_counter() - t0
    ok = hard == 0 and dt < 30
    report(3, ok, f"||f|| <= 6R||f||' on 200 polynomials: worst ratio {worst:.3f}, "
           f"{flagged} flagged, {hard} hard violations, {dt:.1f}s")
    assert ok


def test_04_integrable_solve(report):
    J = catalog("integrable", n=2, R=1.0)
    jet = JetCondition([0.2, 0.01j], [0.7 - 0.1j, 0.03])
    res = solve_direct(J, jet)
    exact = np.zeros_like(res.disk.coeffs)
    exact[:, 0, 0], exact[:, 1, 0] = jet.p, jet.u
    err = float(np.abs(res.disk.coeffs - exact).max())
    ok = res.converged and res.iterations == 1 and res.residual <= 1e-12 and err == 0.0
    report(4, ok, f"a = 0 gives p + u zeta in {res.iterations} step, residual {res.residual:.1e}")
    assert ok


def test_05_success_ball(report):
    t0 = time.perf_counter()
    J = catalog("perturbed", n=2, R=1.0, amplitude=0.05)
    sweep = jet_sweep(J, radius=0.05, n_side=5)
    worst = max(r["residual"] for r in sweep.rows)
    dt = time.perf_counter() - t0
    ok = sweep.all_converged and len(sweep.rows) == 25 and worst <= 1e-6 and sweep.success_radius > 0 and dt < 120
    report(5, ok, f"25 jets within 0.05 of v0 at R_solve 0.9: "
           f"{sum(r['verdict'] == 'converged' for r in sweep.rows)}/25 converged, worst residual {worst:.1e}, "
           f"success radius {sweep.success_radius}, {dt:.1f}s")
    assert ok


def test_06_linear_model(report):
    t0 = time.perf_counter()
    v = 0.7 + 0.2j
    lm = linear_model_solve((0.0, 0.3), [v], k_max=40)
    first = np.zeros_like(lm.iterates[1][0])
    first[1, 0], first[0, 2] = v, -0.3 * np.conj(v) / 2
    exact = np.array_equal(lm.iterates[1][0], first)
    tr = np.array(lm.trace)
    ratios = tr[6:] / tr[5:-1]
    ratios = ratios[np.isfinite(ratios) & (tr[5:-1] > 1e-14)]
    rmax = float(ratios.max()) if ratios.size else 0.0
    dt = time.perf_counter() - t0
    ok = exact and rmax <= 0.5 and dt < 5
    report(6, ok, f"first iterate exact: {exact}; max difference ratio beyond step 5 {rmax:.3f}, {dt:.2f}s")
    assert ok


def test_07_pseudonorm_oracles(report):
    t0 = time.perf_counter()
    F1 = pseudonorm(catalog("integrable", n=1, R=1.0), [0], [1]).value
    t1 = time.perf_counter() - t0
    F2 = pseudonorm(catalog("product-disk", n=2, R=1.0, R1=0.5), [0, 0], [1, 1]).value
    t2 = time.perf_counter() - t0 - t1
    ok = abs(F1 - 1) <= 0.01 and abs(F2 - 2) <= 0.1 and max(t1, t2) < 120
    report(7, ok, f"F(D_1, 0, 1) = {F1:.4f} (oracle 1), F(D_1 x D_0.5, 0, (1,1)) = {F2:.4f} (oracle 2)")
    assert ok


def test_08_poincare_path(report):
    t0 = time.perf_counter()
    r = path_distance(catalog("integrable", n=1, R=1.0), np.array([0]), np.array([0.5]))
    rel = abs(r.value - math.atanh(0.5)) / math.atanh(0.5)
    ok = rel <= 0.03
    report(8, ok, f"path distance 0 -> 0.5 = {r.value:.4f} vs arctanh(0.5) = {math.atanh(0.5):.4f} "
           f"({100 * rel:.2f}%), {time.perf_counter() - t0:.1f}s")
    assert ok


def _pairs(J, scale, seed, count):
    rng = np.random.default_rng(seed)

    def rp():
        r = scale * np.sqrt(rng.random(J.n))
        return r * np.exp(2j * np.pi * rng.random(J.n)) * J.domain.radii

    return [(rp(), rp()) for _ in range(count)]


@pytest.mark.slow
def test_09_chain_equals_path(report):
    t0 = time.perf_counter()
    rows = []
    J = catalog("integrable", n=2, R=1.0, R1=1.0)
    for p, q in _pairs(J, 0.7, 1, 5):
        c = chain_distance(J, p, q).value
        d = path_distance(J, p, q, levels=(1, 2, 4)).value
        rows.append(("D1xD1", c, d))
    J = catalog("perturbed", n=2, R=1.0, amplitude=0.05)
    for p, q in _pairs(J, 0.5, 7, 3):
        c = chain_distance(J, p, q, max_chain_length=4, optimize_up_to=2).value
        d = path_distance(J, p, q, levels=(1, 2)).value
        rows.append(("perturbed", c, d))
    gaps = [abs(c - d) / max(c, d) for _, c, d in rows]
    dt = time.perf_counter() - t0
    ok = max(gaps) <= 0.05 and dt < 600
    report(9, ok, "chain vs path gaps " + ", ".join(f"{k} {100 * g:.1f}%" for (k, _, _), g in zip(rows, gaps))
           + f"; {dt:.0f}s")
    assert ok


def test_10_pseudodistance_axioms(report):
    cfg = KobayashiConfig()
    J = catalog("integrable", n=2, R=1.0, R1=1.0)
    rng = np.random.default_rng(10)

    def pt():
        return 0.6 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))

    sym, tri = 0.0, -np.inf
    for _ in range(10):
        a, b, c = pt(), pt(), pt()
        ab, ba = chain_distance(J, a, b, config=cfg).value, chain_distance(J, b, a, config=cfg).value
        bc = chain_distance(J, b, c, config=cfg).value
        ac = chain_distance(J, a, c, config=cfg).value
        sym = max(sym, abs(ab - ba) / max(ab, 1e-300))
        tri = max(tri, ac - (ab + bc) * (1 + 2 * cfg.tol))
    ok = sym <= cfg.tol and tri <= 0
    report(10, ok, f"10 triples: max relative asymmetry {sym:.1e}, worst triangle margin {tri:.3f}")
    assert ok


def test_11_semicontinuity(report):
    t0 = time.perf_counter()
    J = catalog("perturbed", n=2, R=1.0, amplitude=0.05)
    out = semicontinuity_probe(J, [0, 0], [1, 0], 0.02, n_samples=12)
    ok = out["relative_excess"] <= 0.05
    report(11, ok, f"F(v0) = {out['F0']:.4f}, max excess over 0.02-ball {100 * out['relative_excess']:.2f}% "
           f"of F(v0), {time.perf_counter() - t0:.1f}s")
    assert ok


def test_12_determinism(report, tmp_path):
    cmds = [
        ["solve", "--catalog", "perturbed", "--u", "1,0.02"],
        ["operator-check", "--count", "10", "--samples", "3", "--seed", "5"],
        ["hyperbolicity", "--catalog", "perturbed", "--region", "center", "--directions", "4", "--seed", "3"],
    ]
    same = True
    for k, cmd in enumerate(cmds):
        outs = []
        for run, threads in enumerate((1, 1, 8)):
            # same relative output name in separate directories: the config echo includes it
            (tmp_path / f"run{run}").mkdir(exist_ok=True)
            path = tmp_path / f"run{run}" / f"out{k}.json"
            env = dict(os.environ, PDISKS_THREADS=str(threads))
            proc = subprocess.run([sys.executable, "-m", "pdisks"] + cmd + ["--output", path.name],
                                  env=env, capture_output=True, text=True, cwd=path.parent)
            assert proc.returncode == 0, proc.stderr
            outs.append(path.read_bytes())
        same &= outs[0] == outs[1] == outs[2]
    report(12, same, "3 commands x (seeded rerun, threads 1 vs 8): outputs bit-identical" if same
           else "outputs differ between runs")
    assert same
