import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdisks.cauchy_ops import (
    T_quadrature,
    apply_Tk_coeffs,
    boundary_values,
    cauchy_integral,
    estimate_bounds,
    op_S,
    op_T,
    op_Tinf,
    op_Tk,
    random_polynomial,
)
from pdisks.disk_field import DiskField, PolarGrid, dbar, evaluate_coeffs, monomial, truncate

seeds = st.integers(0, 2**32 - 1)
radii = st.sampled_from([0.5, 1.0, 2.0])


def padded(a, b):
    D = max(a.shape[1], b.shape[1]) - 1
    return truncate(a, D), truncate(b, D)


@given(seeds, radii, st.sampled_from([-1, 0, 1, 3, None]))
def test_dbar_inverts_every_Tk(seed, R, k):
    rng = np.random.default_rng(seed)
    c = random_polynomial(rng, 6, R=R)
    g = PolarGrid(R, 4, 8)
    out = dbar(DiskField.from_coeffs(g, apply_Tk_coeffs(c, R, k))).coeffs
    a, b = padded(out, c)
    assert np.abs(a - b).max() < 1e-12


@given(seeds, radii)
def test_T1_kills_value_and_derivative_at_origin(seed, R):
    rng = np.random.default_rng(seed)
    f = DiskField.from_coeffs(PolarGrid(R, 4, 8), random_polynomial(rng, 6, R=R))
    g = op_Tk(f, 1)
    assert abs(g.value_at_zero()[0]) == 0 and abs(g.dz_at_zero()[0]) == 0


def test_Tinf_is_antiderivative_in_zetabar():
    f = DiskField.from_coeffs(PolarGrid(1.0, 4, 8), monomial(5, 2))
    out = op_Tinf(f).coeffs
    assert out[0, 5, 3] == pytest.approx(1 / 3) and np.count_nonzero(out) == 1


def test_T_matches_independent_quadrature(rng):
    """Coefficient route versus the singular area integral done numerically."""
    # the subtracted kernel is only Lipschitz at w, so the quadrature converges slowly
    c = random_polynomial(rng, 5)
    w = np.array([0.0, 0.3 + 0.1j, -0.5j, 0.72])
    errs = []
    for g in (PolarGrid(1.0, 24, 48), PolarGrid(1.0, 48, 96)):
        f = DiskField.from_coeffs(g, c)
        errs.append(np.abs(op_T(f)(w) - T_quadrature(f, w, g)).max())
    assert errs[1] < 2e-3 and errs[1] < errs[0]


def test_S_reproduces_holomorphic_and_kills_conjugates():
    g = PolarGrid(1.0, 8, 32)
    h = DiskField.from_coeffs(g, monomial(3, 0))
    assert np.abs(op_S(h.boundary_values(), g).coeffs[0, 3, 0] - 1) < 1e-12
    # boundary values of conj(w)^2 = w^-2 carry no nonnegative Fourier modes
    ab = DiskField.from_coeffs(g, monomial(0, 2))
    assert np.abs(op_S(ab.boundary_values(), g).coeffs).max() < 1e-12


@given(seeds)
def test_cauchy_integral_agrees_with_S(seed):
    rng = np.random.default_rng(seed)
    g = PolarGrid(1.0, 4, 64)
    f = DiskField.from_coeffs(g, random_polynomial(rng, 6))
    w = 0.6 * (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)) / np.sqrt(2)
    Sf = op_S(boundary_values(f), g)
    assert np.allclose(cauchy_integral(boundary_values(f), 1.0, w), Sf(w), atol=1e-10)


def test_cauchy_integral_interior_only():
    with pytest.raises(ValueError, match="interior"):
        cauchy_integral(np.ones(8), 1.0, np.array([1.0]))


def test_S_checks_sample_count():
    with pytest.raises(ValueError, match="boundary samples"):
        op_S(np.ones(7), PolarGrid(1.0, 4, 8))


def test_bounds_empty_and_deterministic():
    empty = estimate_bounds(0, 0)
    assert empty.sample_count == 0 and empty.c1_hat == 0.0
    a, b = estimate_bounds(7, 3), estimate_bounds(7, 3)
    assert a == b and a.c1_hat > 0 and a.c2_hat > 0
    with pytest.raises(ValueError):
        estimate_bounds(0, -1)


def test_Tk_times_composes():
    c = monomial(4, 0)
    twice = apply_Tk_coeffs(c, 1.0, None, times=2)
    once = apply_Tk_coeffs(apply_Tk_coeffs(c, 1.0, None), 1.0, None)
    a, b = padded(twice, once)
    assert np.array_equal(a, b)
    assert evaluate_coeffs(twice, np.array([0.5]))[0, 0] == pytest.approx(0.5**4 * 0.25 / 2)
