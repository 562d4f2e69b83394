"""Almost complex structures on the model domain D_R x (D_R1)^(n-1).

A structure is given by its Cauchy-Riemann coefficients ``a[i, m](z)``: a map
``zeta -> z(zeta)`` is pseudoholomorphic iff

    dbar z^i + sum_m a[i, m](z) dbar conj(z^m) = 0.

Coefficient callables are vectorized: ``z`` has shape ``(n, ...)`` and the
result has shape ``(n, n, ...)``.  Indices are 0-based in code; the JSON
structure file uses the 1-based ``i`` / ``mbar`` of the usual notation.
"""
from __future__ import annotations

import functools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .disk_field import PolarGrid, fit_polynomial, evaluate_coeffs, truncate

log = logging.getLogger(__name__)

__all__ = [
    "ModelDomain",
    "AlmostComplexStructure",
    "LinearizedStructure",
    "validate_adapted",
    "cr_coefficients_check",
    "J_matrix_from_coefficients",
    "coefficients_from_J_matrix",
    "standard_J",
    "rescale",
    "linearize",
    "structure_from_terms",
    "linear_transverse_terms",
    "auto_rescale_factor",
    "catalog",
    "structure_from_dict",
    "load_structure",
    "CATALOG_NAMES",
]

ADAPTED_TOL = 1e-10


@dataclass(frozen=True)
class ModelDomain:
    R: float
    R1: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension n must be >= 1")
        if not (self.R > 0 and self.R1 > 0):
            raise ValueError("radii must be positive")
        if self.R1 > self.R:
            raise ValueError(f"transverse radius R1={self.R1} exceeds R={self.R}")
        if self.n > 1 and self.R1 > self.R / 10:
            log.warning("R1=%g is not small compared to R=%g", self.R1, self.R)

    @property
    def radii(self) -> np.ndarray:
        return np.array([self.R] + [self.R1] * (self.n - 1))

    def violation(self, z: np.ndarray) -> float:
        """max_i |z^i| / R_i over the given points (<= 1 means inside)."""
        z = np.asarray(z)
        return float(np.max(np.abs(z).reshape(self.n, -1) / self.radii[:, None]))


def _polynomial_coeff(n: int, terms: list[dict]) -> Callable:
    parsed = [
        (t["i"] - 1, t["mbar"] - 1, np.asarray(t["alpha"], int), np.asarray(t["beta"], int),
         complex(t.get("re", 0.0), t.get("im", 0.0)))
        for t in terms
    ]

    def coeff(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros((n, n) + z.shape[1:], dtype=complex)
        zb = np.conj(z)
        for i, m, al, be, c in parsed:
            v = np.full(z.shape[1:], c, dtype=complex)
            for k in range(n):
                if al[k]:
                    v = v * z[k] ** al[k]
                if be[k]:
                    v = v * zb[k] ** be[k]
            out[i, m] += v
        return out

    return coeff


@dataclass(frozen=True, eq=False)
class AlmostComplexStructure:
    """Cauchy-Riemann coefficient field on a model domain.

    ``regularity`` is declared metadata (k, lambda) and is never verified.
    Polynomial structures keep their ``terms`` so they can be written back to
    a structure file.
    """

    domain: ModelDomain
    coeff: Callable[[np.ndarray], np.ndarray]
    regularity: tuple = (2, 0.5)
    adapted: bool = True
    name: str = "custom"
    params: dict = field(default_factory=dict)
    terms: tuple | None = None

    def __post_init__(self):
        if self.adapted:
            ok, viol = validate_adapted(self, 64)
            if not ok:
                raise ValueError(
                    f"structure flagged adapted but |a| = {viol:.3g} on the central disk"
                )

    @property
    def n(self) -> int:
        return self.domain.n

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.asarray(self.coeff(z), dtype=complex)
        if out.shape != (self.n, self.n) + z.shape[1:]:
            raise ValueError(f"coefficient callable returned shape {out.shape}")
        return out

    def is_zero(self) -> bool:
        return self.terms is not None and len(self.terms) == 0

    def to_dict(self) -> dict:
        if self.terms is None:
            raise ValueError(f"structure {self.name!r} is not polynomial; cannot serialize")
        return {"n": self.n, "R": self.domain.R, "R1": self.domain.R1,
                "terms": [dict(t) for t in self.terms]}


def _central_samples(R: float, count: int) -> np.ndarray:
    # sunflower points on the closed disk plus its boundary
    k = np.arange(count)
    r = R * np.sqrt((k + 0.5) / count)
    theta = k * math.pi * (3.0 - math.sqrt(5.0))
    inner = r * np.exp(1j * theta)
    ring = R * np.exp(2j * math.pi * np.arange(max(count // 4, 8)) / max(count // 4, 8))
    return np.concatenate([[0.0], inner, ring])


def validate_adapted(J: AlmostComplexStructure, n_samples: int = 256) -> tuple[bool, float]:
    """Check that all a[i, m] vanish on the central disk D_R x {0}."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    w = _central_samples(J.domain.R, n_samples)
    z = np.zeros((J.n, w.size), dtype=complex)
    z[0] = w
    a = np.asarray(J.coeff(z))
    viol = float(np.max(np.abs(a))) if a.size else 0.0
    return viol <= ADAPTED_TOL, viol


# --- J matrix <-> coefficients ------------------------------------------------
# Real coordinates are ordered (x^1..x^n, y^1..y^n); a real vector (vx, vy) has
# d/dz components vx + i vy and d/dzbar components vx - i vy.


def standard_J(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


def _to_complex_basis(n):
    I = np.eye(n)
    return np.block([[I, 1j * I], [I, -1j * I]])


def J_matrix_from_coefficients(a: np.ndarray) -> np.ndarray:
    """Real 2n x 2n structure whose (0,1)-space is spanned by d/dzbar^m - sum_i a[i,m] d/dz^i."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    I = np.eye(n)
    V01 = np.vstack([-a, I])
    V10 = np.vstack([I, -np.conj(a)])
    V = np.hstack([V10, V01])
    D = np.diag(np.r_[np.full(n, 1j), np.full(n, -1j)])
    Jc = V @ D @ np.linalg.inv(V)
    P = _to_complex_basis(n)
    Jr = np.linalg.solve(P, Jc @ P)
    return Jr.real


def _check_almost_complex(Jm: np.ndarray):
    n2 = Jm.shape[0]
    err = np.abs(Jm @ Jm + np.eye(n2)).max()
    if err > 1e-10 * max(1.0, np.abs(Jm).max() ** 2):
        raise ValueError(f"not almost complex: |J^2 + 1| = {err:.3g}")


def coefficients_from_J_matrix(Jm: np.ndarray) -> np.ndarray:
    """Recover a[i, m] from the -i eigenspace of a real structure matrix."""
    Jm = np.asarray(Jm, dtype=float)
    _check_almost_complex(Jm)
    n = Jm.shape[0] // 2
    P = _to_complex_basis(n)
    Jc = P @ Jm @ np.linalg.inv(P)
    w, V = np.linalg.eig(Jc)
    V01 = V[:, np.argsort(np.abs(w + 1j))[:n]]
    X, Y = V01[:n], V01[n:]
    return -X @ np.linalg.inv(Y)


def _antilinear_part_from_J(Jm: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Solve f_* J0 = J f_* for the zeta-bar derivative beta of an affine map
    zeta -> alpha zeta + beta conj(zeta), by a direct real linear solve."""
    n = alpha.size

    def vec(c):
        return np.r_[c.real, c.imag]

    # J (alpha + beta) = i alpha - i beta, linear in (Re beta, Im beta)
    M = np.zeros((2 * n, 2 * n))
    for k in range(2 * n):
        e = np.zeros(n, complex)
        e[k % n] = 1.0 if k < n else 1j
        M[:, k] = Jm @ vec(e) + vec(1j * e)
    rhs = vec(1j * alpha) - Jm @ vec(alpha)
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:n] + 1j * sol[n:]


def cr_coefficients_check(J_matrix, a: AlmostComplexStructure, z, L) -> float:
    """Discrepancy between the coefficient form and f_* J0 = J f_* at a point.

    ``J_matrix`` is a real 2n x 2n array or a callable of the point.  ``L`` is
    the complex-linear part of the candidate differential, either an n-vector
    alpha (= dz at the point) or a real 2n x 2 matrix whose complex-linear part
    is extracted.  Returns max |beta_a - beta_J| where beta_a = -a(z) conj(alpha)
    and beta_J solves the intertwining equation directly.
    """
    z = np.asarray(z, dtype=complex)
    Jm = np.asarray(J_matrix(z) if callable(J_matrix) else J_matrix, dtype=float)
    _check_almost_complex(Jm)
    n = a.n
    L = np.asarray(L)
    if L.shape == (2 * n, 2):
        d_s = L[:n, 0] + 1j * L[n:, 0]
        d_t = L[:n, 1] + 1j * L[n:, 1]
        alpha = 0.5 * (d_s - 1j * d_t)
    else:
        alpha = L.astype(complex).reshape(n)
    amat = a(z.reshape(n, 1))[:, :, 0]
    beta_a = -amat @ np.conj(alpha)
    beta_J = _antilinear_part_from_J(Jm, alpha)
    return float(np.max(np.abs(beta_a - beta_J)))


# --- rescaling -----------------------------------------------------------------


def rescale(J: AlmostComplexStructure, N: float) -> AlmostComplexStructure:
    """Transport J under the contraction z^1 -> z^1, z^I -> z^I / N.

    With w = (z^1, z^I / N) the coefficient law that keeps the equation
    invariant is a~[i, m](w) = (s_m / s_i) a[i, m](z), s = (1, N, ..., N).
    The transverse radius becomes R1 / N.
    """
    if not N > 0:
        raise ValueError("N must be positive")
    if N == 1:
        return J
    n = J.n
    s = np.array([1.0] + [float(N)] * (n - 1))
    ratio = s[None, :] / s[:, None]
    base = J.coeff

    def coeff(w):
        w = np.asarray(w, dtype=complex)
        z = w * s.reshape((n,) + (1,) * (w.ndim - 1))
        out = np.asarray(base(z))
        return out * ratio.reshape((n, n) + (1,) * (w.ndim - 1))

    terms = None
    if J.terms is not None:
        terms = []
        for t in J.terms:
            deg_t = sum(t["alpha"][1:]) + sum(t["beta"][1:])
            fac = N ** deg_t * ratio[t["i"] - 1, t["mbar"] - 1]
            c = complex(t["re"], t["im"]) * fac
            terms.append({**t, "re": c.real, "im": c.imag})
        terms = tuple(terms)
    dom = ModelDomain(J.domain.R, J.domain.R1 / N, n) if n > 1 else J.domain
    return AlmostComplexStructure(dom, coeff, J.regularity, J.adapted,
                                  name=J.name, params={**J.params, "rescale_N": N * J.params.get("rescale_N", 1.0)},
                                  terms=terms)


def auto_rescale_factor(J: AlmostComplexStructure, h: float | None = None, samples: int = 64) -> float:
    """max(1, 10 * sup |da/dz^I| * R), derivative sampled on the central disk."""
    if J.n == 1:
        return 1.0
    h = h or 1e-4 * J.domain.R1
    w = _central_samples(J.domain.R, samples)
    sup = 0.0
    for I in range(1, J.n):
        for e in (1.0, 1j):
            zp = np.zeros((J.n, w.size), complex)
            zp[0] = w
            zm = zp.copy()
            zp[I] += e * h
            zm[I] -= e * h
            d = (np.asarray(J.coeff(zp)) - np.asarray(J.coeff(zm))) / (2 * h)
            sup = max(sup, float(np.abs(d).max()))
    return max(1.0, 10.0 * sup * J.domain.R)


# --- linearization along the central disk --------------------------------------


@dataclass(frozen=True, eq=False)
class LinearizedStructure:
    """Split of a^I_1bar along the central disk into linear and remainder parts.

    a^I_1(z) = sum_m (L[I,m](z^1) z^m + Lbar[I,m](z^1) conj(z^m)) + hat a^I_1(z),
    with L, Lbar approximated by polynomials P, Pbar in (z^1, conj z^1) up to
    the errors alpha = L - P, alphabar = Lbar - Pbar.
    Transverse indices I, m run over 1..n-1 (0-based positions in the arrays).
    """

    structure: AlmostComplexStructure
    P: np.ndarray  # (n-1, n-1, D+1, D+1)
    Pbar: np.ndarray
    degree: int
    remainder_bound: float
    fd_step: float
    grid: PolarGrid

    @property
    def n(self) -> int:
        return self.structure.n

    def a11(self, z) -> np.ndarray:
        return self.structure(z)[0, 0]

    def linear_coeffs(self, z1) -> tuple[np.ndarray, np.ndarray]:
        """Wirtinger derivatives d a^I_1/dz^m, d a^I_1/dzbar^m at (z1, 0)."""
        return _transverse_derivatives(self.structure, np.asarray(z1, complex), self.fd_step)

    def poly_values(self, z1) -> tuple[np.ndarray, np.ndarray]:
        z1 = np.asarray(z1, complex)
        k = self.n - 1
        flatP = self.P.reshape(k * k, *self.P.shape[2:])
        flatQ = self.Pbar.reshape(k * k, *self.Pbar.shape[2:])
        return (evaluate_coeffs(flatP, z1).reshape((k, k) + z1.shape),
                evaluate_coeffs(flatQ, z1).reshape((k, k) + z1.shape))

    def alpha(self, z1) -> tuple[np.ndarray, np.ndarray]:
        L, Lb = self.linear_coeffs(z1)
        P, Pb = self.poly_values(z1)
        return L - P, Lb - Pb

    def hat(self, z) -> np.ndarray:
        """hat a^I_m(z) for I >= 2, all m; shape (n-1, n, ...)."""
        z = np.asarray(z, complex)
        a = self.structure(z)
        out = a[1:].copy()
        L, Lb = self.linear_coeffs(z[0])
        lin = np.einsum("im...,m...->i...", L, z[1:]) + np.einsum("im...,m...->i...", Lb, np.conj(z[1:]))
        out[:, 0] = out[:, 0] - lin
        return out

    def reconstruct(self, z) -> np.ndarray:
        """Linear part plus hat remainder; equals a^I_1(z)."""
        z = np.asarray(z, complex)
        L, Lb = self.linear_coeffs(z[0])
        lin = np.einsum("im...,m...->i...", L, z[1:]) + np.einsum("im...,m...->i...", Lb, np.conj(z[1:]))
        return lin + self.hat(z)[:, 0]

    def model_values(self, zeta, y) -> np.ndarray:
        """A^I(zeta, y) = sum_m P[I,m](zeta) y^m + Pbar[I,m](zeta) conj(y^m)."""
        P, Pb = self.poly_values(zeta)
        return np.einsum("im...,m...->i...", P, y) + np.einsum("im...,m...->i...", Pb, np.conj(y))

    def second_order_constant(self, rng: np.random.Generator, samples: int = 100) -> float:
        """max |hat a^I_1(z)| / |z^I|^2 over random z with |z^I| <= R1/4."""
        n, dom = self.n, self.structure.domain
        z = np.empty((n, samples), complex)
        z[0] = dom.R * np.sqrt(rng.random(samples)) * np.exp(2j * np.pi * rng.random(samples))
        rad = dom.R1 / 4 * np.sqrt(rng.random((n - 1, samples)))
        z[1:] = rad * np.exp(2j * np.pi * rng.random((n - 1, samples)))
        h = np.abs(self.hat(z)[:, 0]).max(axis=0)
        nz2 = np.sum(np.abs(z[1:]) ** 2, axis=0)
        return float(np.max(h / nz2))


def _transverse_derivatives(J: AlmostComplexStructure, z1: np.ndarray, h: float):
    n = J.n
    shape = z1.shape
    flat = z1.ravel()
    L = np.zeros((n - 1, n - 1, flat.size), complex)
    Lb = np.zeros_like(L)
    for m in range(1, n):
        d = {}
        for e in (1.0, 1j):
            zp = np.zeros((n, flat.size), complex)
            zp[0] = flat
            zm = zp.copy()
            zp[m] += e * h
            zm[m] -= e * h
            d[e] = (np.asarray(J.coeff(zp))[1:, 0] - np.asarray(J.coeff(zm))[1:, 0]) / (2 * h)
        L[:, m - 1] = 0.5 * (d[1.0] - 1j * d[1j])
        Lb[:, m - 1] = 0.5 * (d[1.0] + 1j * d[1j])
    return L.reshape((n - 1, n - 1) + shape), Lb.reshape((n - 1, n - 1) + shape)


def linearize(J: AlmostComplexStructure, fd_step: float | None = None,
              weierstrass_degree: int = 10, eps: float = 1e-3,
              grid: PolarGrid | None = None) -> LinearizedStructure:
    """Extract and polynomially approximate the transverse-linear part of a^I_1.

    The returned degree is the smallest one <= ``weierstrass_degree`` whose sup
    error over the closed-disk samples is below ``eps``.
    """
    if J.n < 2:
        raise ValueError("linearization needs n >= 2")
    if not J.adapted:
        raise ValueError("linearization is taken along the central disk of an adapted structure")
    if eps <= 0:
        raise ValueError("eps must be positive")
    h = fd_step if fd_step is not None else 1e-4 * J.domain.R1
    if h <= 0:
        raise ValueError("fd_step must be positive")
    grid = grid or PolarGrid(J.domain.R, 32, 64)
    k = J.n - 1
    L, Lb = _transverse_derivatives(J, grid.nodes, h)
    Lc, Lbc = _transverse_derivatives(J, grid.closed_nodes, h)
    samples = np.concatenate([L.reshape(k * k, -1), Lb.reshape(k * k, -1)])
    exact = np.concatenate([Lc.reshape(k * k, -1), Lbc.reshape(k * k, -1)])
    err = np.inf
    for d in range(weierstrass_degree + 1):
        fit = fit_polynomial(grid, samples, d)
        err = float(np.abs(evaluate_coeffs(fit.coeffs, grid.closed_nodes) - exact).max())
        if err < eps:
            break
    else:
        raise ValueError(
            f"degree too low: Weierstrass error {err:.3g} >= eps {eps:g} at degree {weierstrass_degree}"
        )
    coeffs = truncate(fit.coeffs, d)
    P = coeffs[: k * k].reshape(k, k, d + 1, d + 1)
    Pb = coeffs[k * k:].reshape(k, k, d + 1, d + 1)
    return LinearizedStructure(J, P, Pb, d, err, h, grid)


# --- catalog ---------------------------------------------------------------------

CATALOG_NAMES = ("integrable", "linear-transverse", "perturbed", "product-disk")


def _zero_structure(n, R, R1, name, params):
    def coeff(z):
        z = np.asarray(z)
        return np.zeros((n, n) + z.shape[1:], complex)

    return AlmostComplexStructure(ModelDomain(R, R1, n), coeff, (math.inf, 0.5), True,
                                  name=name, params=params, terms=())


def _as_tables(val, k):
    """Normalize linear-model input to coefficient tables of shape (k, k, D+1, D+1)."""
    if val is None:
        return np.zeros((k, k, 1, 1), complex)
    arr = np.asarray(val, dtype=complex)
    if arr.ndim == 0:
        return (arr * np.eye(k))[:, :, None, None].astype(complex)
    if arr.ndim == 2:
        return arr[:, :, None, None]
    if arr.ndim == 4:
        return arr
    raise ValueError("linear-transverse coefficients must be a scalar, a (k,k) array or (k,k,D+1,D+1) tables")


def linear_transverse_terms(n: int, P: np.ndarray, Pbar: np.ndarray) -> list[dict]:
    terms = []
    for tables, conj in ((P, False), (Pbar, True)):
        for I in range(n - 1):
            for m in range(n - 1):
                tab = tables[I, m]
                for l, mm in zip(*np.nonzero(tab)):
                    alpha = [0] * n
                    beta = [0] * n
                    alpha[0] += int(l)
                    beta[0] += int(mm)
                    (beta if conj else alpha)[m + 1] += 1
                    c = complex(tab[l, mm])
                    terms.append({"i": I + 2, "mbar": 1, "alpha": alpha, "beta": beta,
                                  "re": c.real, "im": c.imag})
    return terms


def structure_from_terms(n, R, R1, terms, name="polynomial", params=None, adapted=None):
    coeff = _polynomial_coeff(n, list(terms))
    if adapted is None:
        # a polynomial term vanishes on the central disk iff it has a transverse factor
        adapted = all(sum(t["alpha"][1:]) + sum(t["beta"][1:]) > 0 or
                      complex(t.get("re", 0), t.get("im", 0)) == 0 for t in terms)
    return AlmostComplexStructure(ModelDomain(R, R1, n), coeff, (math.inf, 0.5), adapted,
                                  name=name, params=params or {}, terms=tuple(dict(t) for t in terms))



def _perturb_weights(n):
    i, m = np.indices((n, n))
    return np.exp(0.7j * (i - m)) / (1.0 + np.abs(i - m))


def _perturbed_profile(s):
    return 0.25 * s + 0.25 * np.conj(s) + s * np.conj(s) + 0.5 * s * s


@functools.lru_cache(maxsize=None)
def _perturbed_sup(n: int, sigma_rel: float) -> float:
    """sup over M0 of the unnormalized perturbed profile (equal transverse parts maximize |s|)."""
    r, th, rho, ph = np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 2 * np.pi, 48, endpoint=False),
                                 np.linspace(0, n - 1, 41), np.linspace(0, 2 * np.pi, 48, endpoint=False),
                                 indexing="ij", sparse=True)
    z1 = r * np.exp(1j * th)
    s = rho * np.exp(1j * ph)
    env = np.exp(-r ** 2 / (2 * sigma_rel ** 2) - 0.5 * rho ** 2 / (n - 1))
    return float(np.abs(_perturbed_profile(s) * (1.0 + 0.5 * z1) * env).max())


def catalog(name: str, n: int = 2, R: float = 1.0, R1: float | None = None, **params) -> AlmostComplexStructure:
    """Test-structure factory.

    integrable         a = 0
    product-disk       a = 0 on D_R x D_R1 (used for Kobayashi oracles)
    linear-transverse  a^I_1 = sum_m P[I,m] z^m + Pbar[I,m] conj(z^m), params ``p``, ``pbar``
    perturbed          smooth Gaussian-localized coefficients vanishing on the
                       central disk, params ``amplitude`` and ``sigma``
    """
    if R1 is None:
        R1 = R if name == "product-disk" else 0.1 * R
    if name in ("integrable", "product-disk"):
        return _zero_structure(n, R, R1, name, dict(params))
    if name == "linear-transverse":
        if n < 2:
            raise ValueError("linear-transverse needs n >= 2")
        k = n - 1
        P = _as_tables(params.get("p"), k) if "p" in params else np.zeros((k, k, 1, 1), complex)
        Pb = _as_tables(params.get("pbar"), k) if "pbar" in params else np.zeros((k, k, 1, 1), complex)
        return structure_from_terms(n, R, R1, linear_transverse_terms(n, P, Pb), name=name,
                                    params={"p": P.tolist(), "pbar": Pb.tolist()}, adapted=True)
    if name == "perturbed":
        if n < 2:
            raise ValueError("perturbed needs n >= 2")
        amp = float(params.get("amplitude", 0.05))
        sigma = float(params.get("sigma", 0.5 * R))
        K = amp * _perturb_weights(n) / _perturbed_sup(n, sigma / R)

        def coeff(z):
            z = np.asarray(z, dtype=complex)
            t = z[1:] / R1
            env = np.exp(-np.abs(z[0]) ** 2 / (2 * sigma ** 2) - 0.5 * np.sum(np.abs(t) ** 2, axis=0))
            shape = _perturbed_profile(t.sum(axis=0)) * (1.0 + 0.5 * z[0] / R) * env
            return K.reshape((n, n) + (1,) * (z.ndim - 1)) * shape[None, None]

        return AlmostComplexStructure(ModelDomain(R, R1, n), coeff, (math.inf, 0.5), True,
                                      name=name, params={"amplitude": amp, "sigma": sigma})
    raise ValueError(f"unknown catalog structure {name!r}; known: {', '.join(CATALOG_NAMES)}")


# --- structure files -------------------------------------------------------------

_TERM_FIELDS = ("i", "mbar", "alpha", "beta", "re", "im")


def structure_from_dict(doc: dict) -> AlmostComplexStructure:
    """Build a polynomial structure from the JSON schema; errors name the field."""
    for key in ("n", "R", "R1", "terms"):
        if key not in doc:
            raise ValueError(f"structure file: missing field '{key}'")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("structure file: field 'n' must be a positive integer")
    terms = doc["terms"]
    if not isinstance(terms, list):
        raise ValueError("structure file: field 'terms' must be a list")
    for j, t in enumerate(terms):
        for key in _TERM_FIELDS:
            if key not in t:
                raise ValueError(f"structure file: terms[{j}] missing field '{key}'")
        if not (1 <= t["i"] <= n and 1 <= t["mbar"] <= n):
            raise ValueError(f"structure file: terms[{j}] field 'i'/'mbar' out of range 1..{n}")
        for key in ("alpha", "beta"):
            if len(t[key]) != n or any((not isinstance(x, int)) or x < 0 for x in t[key]):
                raise ValueError(f"structure file: terms[{j}] field '{key}' must be {n} nonnegative ints")
    return structure_from_terms(n, float(doc["R"]), float(doc["R1"]), terms, name="file")


def load_structure(path) -> AlmostComplexStructure:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"structure file: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return structure_from_dict(doc)
