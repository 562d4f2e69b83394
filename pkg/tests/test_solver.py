import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdisks.acs import catalog
from pdisks.disk_field import DiskField, evaluate_coeffs, dz
from pdisks.solver import (
    JetCondition,
    SolveConfig,
    jet_from_tangent,
    jet_sweep,
    linear_model_solve,
    mobius_seed,
    picard_step,
    residual,
    solve,
    solve_direct,
    solve_layered,
)

seeds = st.integers(0, 2**32 - 1)
PERTURBED = catalog("perturbed", n=2, R=1.0, amplitude=0.05)


def test_integrable_is_affine_after_one_step():
    J = catalog("integrable", n=2)
    jet = JetCondition([0.1, 0.01j], [0.5, 0.02])
    res = solve_direct(J, jet)
    assert res.converged and res.iterations == 1 and res.residual <= 1e-12
    c = res.disk.coeffs
    assert np.allclose(c[:, 0, 0], jet.p) and np.allclose(c[:, 1, 0], jet.u)


def test_zero_jet_gives_constant_disk():
    res = solve_direct(PERTURBED, JetCondition.at_origin([0, 0]))
    assert res.converged and np.count_nonzero(res.disk.coeffs) == 0


small = st.floats(-0.03, 0.03)


@given(small, small, small, small)
def test_picard_step_keeps_the_jet(a, b, c, d):
    u = np.array([1.0 + a + 1j * b, c + 1j * d])
    jet = JetCondition.at_origin(u)
    cfg = SolveConfig(n_radial=16, n_angular=32, d_max=10)
    z = DiskField.from_coeffs(cfg.grid, np.pad(np.stack([[[0, 0], [u[0], 0]], [[0, 0], [u[1], 0]]]),
                                                ((0, 0), (0, 1), (0, 1))))
    z2 = picard_step(picard_step(z, PERTURBED, jet, 10), PERTURBED, jet, 10)
    assert np.allclose(z2.value_at_zero(), 0, atol=1e-14)
    assert np.allclose(z2.dz_at_zero(), u, atol=1e-14)


def test_perturbed_solve_converges_and_satisfies_equation():
    res = solve(PERTURBED, JetCondition.at_origin([1.0, 0.03]))
    assert res.converged and res.residual <= 1e-6
    assert res.residual == pytest.approx(residual(res.disk, PERTURBED), rel=1e-12)
    # B_delta: the disk stays within delta of the affine reference
    assert res.diagnostics["max_deviation"] <= res.diagnostics["delta"]
    h = res.disk.coeffs.copy()
    assert np.allclose(h[:, 1, 0], [1.0, 0.03])


def test_layered_agrees_with_direct():
    jet = JetCondition.at_origin([1.0, 0.02])
    a = solve(PERTURBED, jet, SolveConfig(scheme="direct"))
    b = solve(PERTURBED, jet, SolveConfig(scheme="layered"))
    assert a.converged and b.converged
    pts = a.disk.grid.closed_nodes
    D = max(a.disk.degree, b.disk.degree)
    diff = evaluate_coeffs(a.disk.with_degree(D).coeffs - b.disk.with_degree(D).coeffs, pts)
    assert np.abs(diff).max() < 1e-4


def test_layered_on_linear_model_matches_linear_iteration():
    J = catalog("linear-transverse", n=2, pbar=0.3, R1=0.1)
    v2 = 0.02 + 0.01j
    res = solve_layered(J, JetCondition.at_origin([1.0, v2]), SolveConfig(residual_tol=1e-9))
    lm = linear_model_solve((0.0, 0.3), [v2], grid=res.disk.grid)
    pts = res.disk.grid.nodes
    got = evaluate_coeffs(res.disk.coeffs, pts)[1]
    want = evaluate_coeffs(lm.disk.coeffs, pts)[0]
    assert res.converged and np.abs(got - want).max() < 1e-8


def test_leaving_the_domain_is_a_verdict_not_an_exception():
    res = solve(catalog("integrable", n=2), JetCondition.at_origin([1.0, 0.5]))
    assert res.verdict == "diverged" and "domain" in res.diagnostics["failure"]


def test_strong_structure_diverges_or_leaves_tube():
    res = solve(catalog("perturbed", n=2, amplitude=2.0), JetCondition.at_origin([1.0, 0.05]),
                SolveConfig(max_iterations=30))
    assert res.verdict in ("diverged", "left_Bdelta")
    assert "failure" in res.diagnostics


def test_linear_model_first_iterate():
    v = 0.7 + 0.2j
    lm = linear_model_solve((0.0, 0.3), [v])
    z1 = lm.iterates[1][0]
    want = np.zeros_like(z1)
    want[1, 0] = v
    want[0, 2] = -0.3 * np.conj(v) / 2
    assert np.abs(z1 - want).max() == 0.0
    assert lm.verdict == "converged"


def test_mobius_seed_is_exact_disk_in_product():
    J = catalog("product-disk", n=2, R=1.0, R1=0.5)
    p = np.array([0.3, 0.1j])
    jet = JetCondition(p, np.array([0.5, 0.2]))
    h = mobius_seed(jet, J.domain.radii, 0.9, deg=40)
    z = DiskField.from_coeffs(SolveConfig().grid, h)
    assert np.allclose(z.value_at_zero(), p) and np.allclose(dz(z).value_at_zero(), jet.u)


def test_jet_from_tangent_integrable_is_identity():
    v = np.array([0.3 + 0.1j, -0.2j])
    assert np.allclose(jet_from_tangent(catalog("integrable"), np.zeros(2), v), v)


def test_jet_sweep_reports_ball():
    sweep = jet_sweep(catalog("integrable", n=2), radius=0.05, n_side=3)
    assert sweep.all_converged and sweep.success_radius == 0.05 and len(sweep.rows) == 9


def test_result_serializes():
    res = solve(PERTURBED, JetCondition.at_origin([1.0, 0.0]))
    doc = json.loads(json.dumps(res.to_dict()))
    assert doc["verdict"] == "converged" and doc["coefficients"][0]["i"] >= 1


@pytest.mark.parametrize("kw", [dict(R_solve=0), dict(residual_tol=-1), dict(scheme="newton"),
                                dict(max_iterations=0), dict(delta=0), dict(contraction_floor=1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolveConfig(**kw)


def test_jet_dimension_mismatch():
    with pytest.raises(ValueError):
        solve(PERTURBED, JetCondition.at_origin([1.0]))
    with pytest.raises(ValueError):
        JetCondition([0, 0], [1])
