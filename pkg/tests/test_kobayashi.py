import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdisks.acs import catalog
from pdisks.kobayashi import (
    KobayashiConfig,
    chain_distance,
    hyperbolicity_scan,
    link_distance,
    path_distance,
    poincare_distance,
    poincare_metric,
    pseudonorm,
    semicontinuity_probe,
)

coord = st.floats(-0.6, 0.6)
disk_pt = st.builds(complex, coord, coord)
D1 = catalog("integrable", n=1, R=1.0)
D1xD1 = catalog("integrable", n=2, R=1.0, R1=1.0)


def mobius(a, z):
    return (z - a) / (1 - np.conj(a) * z)


@given(disk_pt, disk_pt, disk_pt)
def test_poincare_is_a_metric(a, b, c):
    assert poincare_distance(a, b) == pytest.approx(poincare_distance(b, a), abs=1e-12)
    assert poincare_distance(a, c) <= poincare_distance(a, b) + poincare_distance(b, c) + 1e-12
    # invariance under disk automorphisms
    assert poincare_distance(mobius(c, a), mobius(c, b)) == pytest.approx(poincare_distance(a, b), abs=1e-9)


def test_poincare_values():
    assert poincare_distance(0, 0.5) == pytest.approx(math.atanh(0.5))
    assert poincare_metric(0.5, 1.0) == pytest.approx(1 / 0.75)
    with pytest.raises(ValueError):
        poincare_distance(0, 1.0)


def test_pseudonorm_unit_disk_origin():
    est = pseudonorm(D1, [0], [1])
    assert est.value == pytest.approx(1.0, rel=1e-2)
    assert est.r_lo < est.r_hi and est.witness.converged


@pytest.mark.parametrize("p", [0.3, -0.4j])
def test_pseudonorm_unit_disk_matches_poincare_metric(p):
    est = pseudonorm(D1, [p], [1])
    assert est.value == pytest.approx(poincare_metric(p, 1.0), rel=2e-2)


@given(st.floats(0.2, 5.0))
def test_pseudonorm_homogeneous(t):
    v = np.array([0.6 + 0.2j])
    a, b = pseudonorm(D1, [0], v).value, pseudonorm(D1, [0], t * v).value
    assert b == pytest.approx(t * a, rel=1e-9)


def test_zero_vector():
    est = pseudonorm(D1xD1, [0, 0], [0, 0])
    assert est.value == 0.0


def test_product_disk_is_max_of_factors():
    J = catalog("product-disk", n=2, R=1.0, R1=0.5)
    assert pseudonorm(J, [0, 0], [1, 1]).value == pytest.approx(2.0, rel=0.05)


def test_link_on_unit_disk_is_poincare():
    cost, t = link_distance(D1, np.array([0.1]), np.array([0.4j]))
    assert cost == pytest.approx(poincare_distance(0.1, 0.4j), rel=1e-2)


def test_chain_symmetric():
    a, b = np.array([0.2, -0.1j]), np.array([-0.3, 0.25])
    assert chain_distance(D1xD1, a, b).value == pytest.approx(chain_distance(D1xD1, b, a).value, rel=1e-6)


def test_coarse_path_on_unit_disk():
    r = path_distance(D1, np.array([0]), np.array([0.5]), levels=(1, 2))
    assert r.value == pytest.approx(math.atanh(0.5), rel=0.03)
    assert r.method == "path_integral" and len(r.history) >= 1


def test_semicontinuity_zero_radius():
    out = semicontinuity_probe(D1, [0], [1], 0.0, n_samples=3)
    assert out["max_excess"] == 0.0


def test_scan_integrable_product():
    out = hyperbolicity_scan(catalog("integrable", n=2), [[0, 0]], n_directions=2)
    assert out["min"] > 0 and out["verdict"] == "hyperbolic evidence"
    assert len(out["samples"]) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        KobayashiConfig(tol=0)
    with pytest.raises(ValueError):
        KobayashiConfig(seeds=("newton",))
