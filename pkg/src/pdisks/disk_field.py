"""Fields on the disk D_R held as polar-grid samples plus a (zeta, zeta-bar) polynomial.

A field with ``n`` components stores its polynomial part as a coefficient array
``coeffs[i, l, m]`` multiplying ``zeta**l * conj(zeta)**m``.  Only entries with
``l + m <= degree`` are ever nonzero.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.signal import convolve2d

__all__ = [
    "PolarGrid",
    "DiskField",
    "HolderReport",
    "fit_polynomial",
    "dbar",
    "dz",
    "holder_norm",
    "prime_norm",
    "sampled_norm",
    "evaluate_coeffs",
    "monomial",
    "poly_mul",
    "poly_conj",
    "truncate",
]


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class PolarGrid:
    """Gauss-Legendre radial nodes times uniform angular nodes on D_R."""

    R: float
    n_radial: int = 32
    n_angular: int = 64

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"grid radius must be positive, got {self.R}")
        if self.n_radial < 2:
            raise ValueError("n_radial must be at least 2")
        if self.n_angular < 1:
            raise ValueError("n_angular must be positive")

    @cached_property
    def _radial(self):
        x, w = _gauss_legendre(self.n_radial)
        r = 0.5 * self.R * (x + 1.0)
        return r, 0.5 * self.R * w

    @property
    def radii(self) -> np.ndarray:
        return self._radial[0]

    @cached_property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_angular) / self.n_angular

    @cached_property
    def nodes(self) -> np.ndarray:
        """Interior nodes, radial-major: ``nodes[j * n_angular + k]``."""
        r, _ = self._radial
        return (r[:, None] * np.exp(1j * self.angles)[None, :]).ravel()

    @cached_property
    def weights(self) -> np.ndarray:
        r, wr = self._radial
        dtheta = 2.0 * np.pi / self.n_angular
        return np.repeat(wr * r * dtheta, self.n_angular)

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        return self.R * np.exp(1j * self.angles)

    @cached_property
    def closed_nodes(self) -> np.ndarray:
        """Interior nodes followed by the boundary circle (closed-disk sample set)."""
        return np.concatenate([self.nodes, self.boundary_nodes])

    @property
    def size(self) -> int:
        return self.n_radial * self.n_angular

    def refined(self) -> "PolarGrid":
        return PolarGrid(self.R, 2 * self.n_radial, 2 * self.n_angular)

    def refined_angular(self) -> "PolarGrid":
        # nested refinement: every old node is also a node of the new grid
        return PolarGrid(self.R, self.n_radial, 2 * self.n_angular)

    def with_radius(self, R: float) -> "PolarGrid":
        return PolarGrid(R, self.n_radial, self.n_angular)


def _powers(w: np.ndarray, deg: int) -> np.ndarray:
    out = np.empty((deg + 1,) + w.shape, dtype=complex)
    out[0] = 1.0
    for k in range(1, deg + 1):
        out[k] = out[k - 1] * w
    return out


def evaluate_coeffs(coeffs: np.ndarray, w) -> np.ndarray:
    """Evaluate ``sum c[i,l,m] w**l conj(w)**m``; returns shape ``(n,) + w.shape``."""
    w = np.asarray(w, dtype=complex)
    used = coeffs != 0
    rows = np.flatnonzero(used.any(axis=(0, 2)))
    cols = np.flatnonzero(used.any(axis=(0, 1)))
    if rows.size == 0:
        return np.zeros((coeffs.shape[0],) + w.shape, dtype=complex)
    L, M = rows[-1], cols[-1]
    P = _powers(w.ravel(), max(L, M))
    # sum_m (sum_l c[l,m] w^l) conj(w)^m, contracted with BLAS
    tmp = np.matmul(np.swapaxes(coeffs[:, : L + 1, : M + 1], 1, 2), P[: L + 1])
    vals = np.einsum("imp,mp->ip", tmp, np.conj(P[: M + 1]))
    return vals.reshape((coeffs.shape[0],) + w.shape)


def _degree_mask(deg: int) -> np.ndarray:
    l, m = np.indices((deg + 1, deg + 1))
    return (l + m) <= deg


def truncate(coeffs: np.ndarray, deg: int) -> np.ndarray:
    """Resize a coefficient table to total degree ``deg`` (drops higher terms)."""
    n, d0 = coeffs.shape[0], coeffs.shape[1] - 1
    out = np.zeros((n, deg + 1, deg + 1), dtype=complex)
    k = min(d0, deg)
    out[:, : k + 1, : k + 1] = coeffs[:, : k + 1, : k + 1]
    out[:, ~_degree_mask(deg)] = 0.0
    return out


def poly_conj(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of the complex conjugate function."""
    return np.conj(np.swapaxes(coeffs, 1, 2))


def poly_mul(a: np.ndarray, b: np.ndarray, deg: int | None = None) -> np.ndarray:
    """Componentwise product of two coefficient tables (2-D convolution)."""
    if a.shape[0] != b.shape[0]:
        if a.shape[0] == 1:
            a = np.broadcast_to(a, (b.shape[0],) + a.shape[1:])
        elif b.shape[0] == 1:
            b = np.broadcast_to(b, (a.shape[0],) + b.shape[1:])
        else:
            raise ValueError("component counts differ")
    full = np.stack([convolve2d(x, y) for x, y in zip(a, b)])
    if deg is None:
        deg = (a.shape[1] - 1) + (b.shape[1] - 1)
    return truncate(full, deg)


def monomial(l: int, m: int, deg: int | None = None, scale: complex = 1.0) -> np.ndarray:
    deg = max(deg or 0, l + m)
    c = np.zeros((1, deg + 1, deg + 1), dtype=complex)
    c[0, l, m] = scale
    return c


@lru_cache(maxsize=64)
def _unit_fit_operator(n_radial: int, n_angular: int, deg: int):
    """Least-squares operator on the unit-disk grid; radius enters only by scaling."""
    grid = PolarGrid(1.0, n_radial, n_angular)
    l, m = np.nonzero(_degree_mask(deg))
    n_coef = l.size
    if grid.size < n_coef:
        raise ValueError(
            f"insufficient nodes: {grid.size} nodes for {n_coef} coefficients (degree {deg})"
        )
    P = _powers(grid.nodes, deg)
    V = (P[l] * np.conj(P[m])).T
    U, sv, Vh = np.linalg.svd(V, full_matrices=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise ValueError(
            f"insufficient nodes: grid {n_radial}x{n_angular} cannot resolve degree {deg}"
        )
    pinv = (Vh.conj().T / sv) @ U.conj().T
    pinv.setflags(write=False)
    return l, m, pinv


@lru_cache(maxsize=64)
def _fit_operator(grid: PolarGrid, deg: int):
    l, m, pinv = _unit_fit_operator(grid.n_radial, grid.n_angular, deg)
    if grid.R == 1.0:
        return l, m, pinv
    pinv = pinv / (grid.R ** (l + m).astype(float))[:, None]
    pinv.setflags(write=False)
    return l, m, pinv


@dataclass(frozen=True, eq=False)
class DiskField:
    """An n-component field on D_R: samples at grid nodes and a polynomial fit."""

    grid: PolarGrid
    coeffs: np.ndarray  # (n, D+1, D+1)
    samples: np.ndarray  # (n, grid.size)
    fit_residual: float = 0.0

    @classmethod
    def from_coeffs(cls, grid: PolarGrid, coeffs) -> "DiskField":
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim == 2:
            coeffs = coeffs[None]
        coeffs = coeffs.copy()
        coeffs[:, ~_degree_mask(coeffs.shape[1] - 1)] = 0.0
        return cls(grid, coeffs, evaluate_coeffs(coeffs, grid.nodes), 0.0)

    @classmethod
    def from_function(cls, grid: PolarGrid, func, d_max: int) -> "DiskField":
        vals = np.asarray(func(grid.nodes), dtype=complex)
        return fit_polynomial(grid, vals, d_max)

    @classmethod
    def zeros(cls, grid: PolarGrid, n: int = 1, deg: int = 0) -> "DiskField":
        return cls.from_coeffs(grid, np.zeros((n, deg + 1, deg + 1), dtype=complex))

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def R(self) -> float:
        return self.grid.R

    def __call__(self, w) -> np.ndarray:
        return evaluate_coeffs(self.coeffs, w)

    def boundary_values(self) -> np.ndarray:
        return evaluate_coeffs(self.coeffs, self.grid.boundary_nodes)

    def component(self, i) -> "DiskField":
        idx = np.atleast_1d(np.arange(self.n)[i])
        return DiskField(self.grid, self.coeffs[idx], self.samples[idx], self.fit_residual)

    def conj(self) -> "DiskField":
        return DiskField(self.grid, poly_conj(self.coeffs), np.conj(self.samples), self.fit_residual)

    def with_degree(self, deg: int) -> "DiskField":
        return DiskField.from_coeffs(self.grid, truncate(self.coeffs, deg))

    def on_grid(self, grid: PolarGrid) -> "DiskField":
        """Same polynomial, resampled on another grid (radius may differ)."""
        return DiskField.from_coeffs(grid, self.coeffs)

    def _combine(self, other, op):
        if isinstance(other, DiskField):
            deg = max(self.degree, other.degree)
            a, b = truncate(self.coeffs, deg), truncate(other.coeffs, deg)
            return DiskField(
                self.grid, op(a, b), op(self.samples, other.samples),
                self.fit_residual + other.fit_residual,
            )
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, s):
        s = complex(s)
        return DiskField(self.grid, self.coeffs * s, self.samples * s, abs(s) * self.fit_residual)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def value_at_zero(self) -> np.ndarray:
        return self.coeffs[:, 0, 0].copy()

    def dz_at_zero(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(self.n, dtype=complex)
        return self.coeffs[:, 1, 0].copy()

    @staticmethod
    def stack(fields) -> "DiskField":
        fields = list(fields)
        deg = max(f.degree for f in fields)
        coeffs = np.concatenate([truncate(f.coeffs, deg) for f in fields])
        samples = np.concatenate([f.samples for f in fields])
        return DiskField(fields[0].grid, coeffs, samples, max(f.fit_residual for f in fields))


def fit_polynomial(grid: PolarGrid, samples, d_max: int) -> DiskField:
    """Least-squares fit in (zeta, zeta-bar) of total degree <= d_max.

    ``samples`` has shape ``(grid.size,)`` or ``(n, grid.size)``.  The recorded
    fit residual is the max node-wise error.
    """
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 1:
        samples = samples[None]
    if samples.shape[1] != grid.size:
        raise ValueError(f"expected {grid.size} samples per component, got {samples.shape[1]}")
    l, m, pinv = _fit_operator(grid, d_max)
    flat = samples @ pinv.T
    coeffs = np.zeros((samples.shape[0], d_max + 1, d_max + 1), dtype=complex)
    coeffs[:, l, m] = flat
    fitted = evaluate_coeffs(coeffs, grid.nodes)
    resid = float(np.max(np.abs(fitted - samples))) if samples.size else 0.0
    return DiskField(grid, coeffs, samples.copy(), resid)


def dbar(f: DiskField) -> DiskField:
    """d/d(zeta-bar), exact on the coefficient table."""
    c = f.coeffs
    out = np.zeros_like(c)
    m = np.arange(1, c.shape[2])
    out[:, :, :-1] = c[:, :, 1:] * m[None, None, :]
    return DiskField.from_coeffs(f.grid, out)


def dz(f: DiskField) -> DiskField:
    """d/d(zeta), exact on the coefficient table."""
    c = f.coeffs
    out = np.zeros_like(c)
    l = np.arange(1, c.shape[1])
    out[:, :-1, :] = c[:, 1:, :] * l[None, :, None]
    return DiskField.from_coeffs(f.grid, out)


del_ = dz


@dataclass(frozen=True)
class HolderReport:
    lam: float
    sup_norm: float
    seminorm: float
    norm: float
    prime_norm: float


@lru_cache(maxsize=8)
def _inv_dist(points_key, lam: float):
    pts = np.frombuffer(points_key, dtype=complex)
    d = np.abs(pts[:, None] - pts[None, :])
    with np.errstate(divide="ignore"):
        inv = d ** (-lam)
    inv[~np.isfinite(inv)] = 0.0
    inv.setflags(write=False)
    return inv


def _holder_values(values: np.ndarray, points: np.ndarray, lam: float):
    """Sup norm and H_lambda of each row of ``values`` sampled at ``points``."""
    values = np.atleast_2d(values)
    inv = _inv_dist(np.ascontiguousarray(points).tobytes(), float(lam))
    sup = np.max(np.abs(values), axis=1)
    H = np.zeros(values.shape[0])
    step = 256
    for k, v in enumerate(values):
        h = 0.0
        for s in range(0, v.size, step):
            blk = np.abs(v[s : s + step, None] - v[None, :]) * inv[s : s + step]
            h = max(h, float(blk.max()))
        H[k] = h
    return sup, H


def _norm_of(f: DiskField, lam: float, points) -> tuple[float, float, float]:
    vals = evaluate_coeffs(f.coeffs, points)
    sup, H = _holder_values(vals, points, lam)
    s, h = float(sup.sum()), float(H.sum())
    return s, h, s + (2.0 * f.R) ** lam * h


def sampled_norm(f: DiskField, lam: float = 0.5, points=None) -> float:
    """|f| + (2R)^lam H_lam[f] on the sampled closed disk (summed over components)."""
    pts = f.grid.closed_nodes if points is None else points
    return _norm_of(f, lam, pts)[2]


def prime_norm(f: DiskField, lam: float = 0.5, points=None) -> float:
    """max(||df||, ||dbar f||) on the sampled closed disk."""
    pts = f.grid.closed_nodes if points is None else points
    return max(_norm_of(dz(f), lam, pts)[2], _norm_of(dbar(f), lam, pts)[2])


def holder_norm(f: DiskField, lam: float = 0.5, points=None) -> HolderReport:
    """Sampled lambda-Hoelder norms of ``f``.

    Sup and seminorm are maxima over the closed-disk sample set (interior nodes
    plus the boundary circle), so every value is a lower bound for the true
    norm.  For vector fields the component norms are summed.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie in (0, 1)")
    pts = f.grid.closed_nodes if points is None else np.asarray(points, dtype=complex)
    sup, H, norm = _norm_of(f, lam, pts)
    return HolderReport(lam, sup, H, norm, prime_norm(f, lam, pts))
