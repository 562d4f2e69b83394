"""Cauchy-Green operators on the disk D_R.

The area operator ``T``, its Taylor-truncated versions ``T_k`` and the limit
``T_inf`` act exactly on the coefficient table of a :class:`DiskField`:

    T_k(w^l wbar^m) = w^l wbar^(m+1)/(m+1) - [l >= k+m+2] R^(2(m+1))/(m+1) w^(l-m-1)

``T`` itself is the case k = -1 (nothing removed), ``T_inf`` drops the second
term altogether.  ``S`` is the boundary Cauchy integral; its Taylor
coefficients are computed with the trapezoid rule in the angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disk_field import (
    DiskField,
    PolarGrid,
    evaluate_coeffs,
    prime_norm,
    sampled_norm,
    poly_conj,
    poly_mul,
    truncate,
)

__all__ = [
    "op_T",
    "op_Tk",
    "op_Tinf",
    "op_S",
    "cauchy_integral",
    "boundary_values",
    "T_quadrature",
    "OperatorBoundEstimate",
    "estimate_bounds",
    "random_polynomial",
    "apply_Tk_coeffs",
]

T_FULL = -1


def apply_Tk_coeffs(coeffs: np.ndarray, R: float, k: int | None, times: int = 1) -> np.ndarray:
    """T_k on a coefficient table; ``k=None`` is T_inf, ``k=-1`` is T."""
    out = coeffs
    for _ in range(times):
        out = _apply_once(out, R, k)
    return out


def _apply_once(coeffs, R, k):
    n, D1, _ = coeffs.shape
    out = np.zeros((n, D1 + 1, D1 + 1), dtype=complex)
    m = np.arange(D1)
    inv = 1.0 / (m + 1.0)
    out[:, :D1, 1 : D1 + 1] = coeffs * inv[None, None, :]
    if k is None:
        return out
    for l in range(D1):
        for mm in range(D1 - l):
            if l >= k + mm + 2:
                c = coeffs[:, l, mm]
                if np.any(c):
                    out[:, l - mm - 1, 0] -= c * (R ** (2 * (mm + 1)) / (mm + 1))
    return out


def op_Tk(f: DiskField, k: int) -> DiskField:
    """T f with its Taylor polynomial at 0 through order k removed."""
    if k < 0:
        raise ValueError("k must be nonnegative (use op_T for the full operator)")
    return DiskField.from_coeffs(f.grid, apply_Tk_coeffs(f.coeffs, f.R, k))


def op_T(f: DiskField) -> DiskField:
    """Cauchy-Green area operator; ``dbar(op_T(f)) == f`` on coefficients."""
    return DiskField.from_coeffs(f.grid, apply_Tk_coeffs(f.coeffs, f.R, T_FULL))


def op_Tinf(f: DiskField, times: int = 1) -> DiskField:
    """zeta-bar antiderivative: c[l, m] -> c[l, m]/(m+1) at (l, m+1); iterated ``times``."""
    return DiskField.from_coeffs(f.grid, apply_Tk_coeffs(f.coeffs, f.R, None, times))


def boundary_values(f: DiskField) -> np.ndarray:
    return f.boundary_values()


def _taylor_from_boundary(values: np.ndarray, R: float, deg: int) -> np.ndarray:
    """Taylor coefficients of S f from samples on the circle |zeta| = R."""
    values = np.atleast_2d(values)
    n_ang = values.shape[1]
    # trapezoid rule for (1/2 pi) int f e^{-i j theta} d theta, j >= 0
    b = np.fft.fft(values, axis=1) / n_ang
    deg = min(deg, (n_ang - 1) // 2)
    j = np.arange(deg + 1)
    out = np.zeros((values.shape[0], deg + 1, deg + 1), dtype=complex)
    out[:, j, 0] = b[:, j] / R ** j
    return out


def op_S(boundary: np.ndarray, grid: PolarGrid, degree: int | None = None) -> DiskField:
    """Boundary Cauchy integral of samples at the grid's angular nodes on |zeta| = R."""
    boundary = np.atleast_2d(np.asarray(boundary, dtype=complex))
    if boundary.shape[1] != grid.n_angular:
        raise ValueError(f"expected {grid.n_angular} boundary samples, got {boundary.shape[1]}")
    if degree is None:
        degree = (grid.n_angular - 1) // 2
    return DiskField.from_coeffs(grid, _taylor_from_boundary(boundary, grid.R, degree))


def cauchy_integral(boundary: np.ndarray, R: float, w) -> np.ndarray:
    """Pointwise trapezoid evaluation of (1/2 pi i) oint f/(zeta - w) d zeta at interior w."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= R):
        raise ValueError("interior only: S f is evaluated on Int D_R")
    boundary = np.atleast_2d(np.asarray(boundary, dtype=complex))
    n_ang = boundary.shape[1]
    zeta = R * np.exp(2j * np.pi * np.arange(n_ang) / n_ang)
    kern = zeta[:, None] / (zeta[:, None] - w.ravel()[None, :]) / n_ang
    return (boundary @ kern).reshape((boundary.shape[0],) + w.shape)


def T_quadrature(f: DiskField, w, grid: PolarGrid | None = None) -> np.ndarray:
    """Direct singularity-subtracted quadrature of T f at interior points.

    Independent of the coefficient route; only used to cross-check op_T.
    Uses int_{D_R} dA/(zeta - w) = -pi conj(w) for |w| < R.
    """
    grid = grid or PolarGrid(f.R, 64, 128)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    zeta = grid.nodes
    fz = evaluate_coeffs(f.coeffs, zeta)
    fw = evaluate_coeffs(f.coeffs, w)
    out = np.empty((f.n, w.size), dtype=complex)
    for j, wj in enumerate(w):
        d = zeta - wj
        d[np.abs(d) < 1e-14] = np.inf
        integral = ((fz - fw[:, j, None]) / d) @ grid.weights
        integral += fw[:, j] * (-np.pi * np.conj(wj))
        out[:, j] = -integral / np.pi
    return out


@dataclass(frozen=True)
class OperatorBoundEstimate:
    """Observed maxima of the operator-norm ratios on random polynomial inputs."""

    c1_hat: float
    c2_hat: float
    C_hat: float
    mu_hat: float
    sample_count: int


def random_polynomial(rng: np.random.Generator, deg: int, n: int = 1, R: float = 1.0,
                      vanish_at_zero: bool = False) -> np.ndarray:
    """Random coefficient table scaled so each monomial is O(1) on D_R."""
    l, m = np.indices((deg + 1, deg + 1))
    mask = (l + m) <= deg
    c = rng.standard_normal((n, deg + 1, deg + 1)) + 1j * rng.standard_normal((n, deg + 1, deg + 1))
    c *= mask / (R ** (l + m) * (1.0 + l + m))
    if vanish_at_zero:
        c[:, 0, 0] = 0.0
    return c


def _linear_model_apply(coeffs_p: np.ndarray, p_coef: np.ndarray, pbar_coef: np.ndarray) -> np.ndarray:
    """A(zeta, p) = P(zeta) p + Pbar(zeta) conj(p) for a scalar transverse coordinate."""
    deg = max(coeffs_p.shape[1], p_coef.shape[1]) - 1
    out = poly_mul(p_coef, coeffs_p, deg + p_coef.shape[1] - 1)
    out = out + poly_mul(pbar_coef, poly_conj(coeffs_p), out.shape[1] - 1)
    return out


def estimate_bounds(seed: int, samples: int, *, degree: int = 6, lam: float = 0.5,
                    radii=(0.5, 1.0, 2.0), k_max: int = 4, model=None,
                    norm_grid: tuple[int, int] = (8, 16)) -> OperatorBoundEstimate:
    """Empirical constants for ||Tf||' <= c1 ||f||, ||Sf|| <= c2 ||f|| and
    ||T_inf^k A(p)||' <= C exp(mu R) ||p||.

    ``model`` is a pair (P, Pbar) of coefficient tables of the linear transverse
    model A(zeta, p) = P p + Pbar conj(p); default P = 0, Pbar = 0.3.
    Deterministic for a fixed seed.
    """
    if samples < 0:
        raise ValueError("samples must be nonnegative")
    if samples == 0:
        return OperatorBoundEstimate(0.0, 0.0, 0.0, 0.0, 0)
    if model is None:
        model = (np.zeros((1, 1, 1), complex), np.full((1, 1, 1), 0.3, complex))
    P, Pbar = model
    rng = np.random.default_rng(seed)
    c1 = c2 = 0.0
    per_radius = {}
    for R in radii:
        grid = PolarGrid(R, *norm_grid)
        pts = grid.closed_nodes
        best = 0.0
        for _ in range(samples):
            cf = random_polynomial(rng, degree, R=R)
            f = DiskField.from_coeffs(grid, cf)
            nf = sampled_norm(f, lam, pts)
            if nf == 0.0:
                continue
            if R == radii[len(radii) // 2]:
                Tf = DiskField.from_coeffs(grid, apply_Tk_coeffs(cf, R, T_FULL))
                c1 = max(c1, prime_norm(Tf, lam, pts) / nf)
                Sf = op_S(f.boundary_values(), grid, degree)
                c2 = max(c2, sampled_norm(Sf, lam, pts) / nf)
            # T_inf^k of the linear model applied to a polynomial p with p(0) = 0
            cf0 = cf.copy()
            cf0[:, 0, 0] = 0.0
            p = DiskField.from_coeffs(grid, cf0)
            npn = sampled_norm(p, lam, pts)
            Ap = _linear_model_apply(cf0, P, Pbar)
            for k in range(1, k_max + 1):
                Tk = DiskField.from_coeffs(grid, apply_Tk_coeffs(Ap, R, None, k))
                best = max(best, prime_norm(Tk, lam, pts) / npn)
        per_radius[R] = best
    rs = sorted(per_radius)
    mu = 0.0
    for a, b in zip(rs, rs[1:]):
        if per_radius[a] > 0 and per_radius[b] > 0:
            mu = max(mu, math.log(per_radius[b] / per_radius[a]) / (b - a))
    C = max(per_radius[r] * math.exp(-mu * r) for r in rs)
    return OperatorBoundEstimate(c1, c2, C, mu, samples)

