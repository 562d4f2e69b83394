"""Pseudoholomorphic disks with a prescribed 1-jet at the origin.

The equation solved on D_{R_solve} is

    dbar z^i + sum_m a[i, m](z) dbar conj(z^m) = 0,  z(0) = p,  dz(0) = u.

``solve_direct`` iterates the Picard map z -> h + T_1[-sum_m a(z) dbar conj(z^m)]
where h is a holomorphic polynomial carrying the jet (the affine disk p + u zeta
by default).  ``solve_layered`` runs the large-radius scheme: rescale the
transverse directions, linearize a^I_1 along the central disk, treat the
polynomial part of z^I with the zeta-bar antiderivative T_inf and only the
remainders with T_1, and update z^1 by a scalar Picard step.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .acs import AlmostComplexStructure, LinearizedStructure, auto_rescale_factor, linearize, rescale
from .cauchy_ops import apply_Tk_coeffs
from .disk_field import (
    DiskField,
    PolarGrid,
    dz,
    evaluate_coeffs,
    fit_polynomial,
    poly_conj,
    poly_mul,
    prime_norm,
    truncate,
)

__all__ = [
    "JetCondition",
    "SolveConfig",
    "SolveResult",
    "LeftDomainError",
    "picard_step",
    "solve_direct",
    "solve_layered",
    "solve",
    "scalar_step_psi1",
    "linear_model_solve",
    "LinearModelResult",
    "residual",
    "affine_seed",
    "mobius_seed",
    "jet_from_tangent",
    "jet_sweep",
    "JetSweep",
]

VERDICTS = ("converged", "diverged", "left_Bdelta")


class LeftDomainError(ValueError):
    def __init__(self, worst_node, violation):
        self.worst_node = worst_node
        self.violation = violation
        super().__init__(f"left domain: |z^i|/R_i = {violation:.6g} at zeta = {worst_node:.6g}")


@dataclass(frozen=True)
class JetCondition:
    p: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=complex).reshape(-1))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex).reshape(-1))
        if self.p.shape != self.u.shape:
            raise ValueError("jet value and derivative must have the same length")

    @classmethod
    def at_origin(cls, u) -> "JetCondition":
        u = np.asarray(u, dtype=complex)
        return cls(np.zeros_like(u), u)

    @property
    def n(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class SolveConfig:
    R_solve: float = 0.9
    epsilon: float = 0.1
    delta: float | None = None  # B_delta radius; None -> 0.1 * R1, inf disables
    max_iterations: int = 100
    residual_tol: float = 1e-6
    contraction_floor: float = 0.95
    scheme: str = "direct"
    n_radial: int = 32
    n_angular: int = 64
    d_max: int = 16
    lam: float = 0.5
    norm_grid: tuple = (8, 16)
    divergence_window: int = 3
    domain_slack: float = 0.0  # intermediate iterates only; returned disks must lie in the domain
    # layered scheme
    weierstrass_eps: float = 1e-3
    weierstrass_degree: int = 12
    eps_r: float = 0.5
    nu: float = 0.1
    rescale_N: float | None = None
    inner_max: int = 40

    def __post_init__(self):
        if not self.R_solve > 0:
            raise ValueError("R_solve must be positive")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.contraction_floor < 1:
            raise ValueError("contraction_floor must lie in (0, 1)")
        if self.scheme not in ("direct", "layered"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.domain_slack < 0:
            raise ValueError("domain_slack must be nonnegative")

    @property
    def grid(self) -> PolarGrid:
        return PolarGrid(self.R_solve, self.n_radial, self.n_angular)

    def delta_for(self, J: AlmostComplexStructure) -> float:
        if self.delta is not None:
            return self.delta
        return 0.1 * (J.domain.R1 if J.n > 1 else J.domain.R)


@dataclass
class SolveResult:
    disk: DiskField
    residual: float
    iterations: int
    history: list
    verdict: str
    jet: JetCondition
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def to_dict(self) -> dict:
        c = self.disk.coeffs
        idx = [(i, l, m) for i, l, m in zip(*np.nonzero(c))]
        return {
            "verdict": self.verdict,
            "residual": self.residual,
            "iterations": self.iterations,
            "history": list(map(float, self.history)),
            "R_solve": self.disk.R,
            "jet": {"p": _cplx_list(self.jet.p), "u": _cplx_list(self.jet.u)},
            "degree": self.disk.degree,
            "coefficients": [
                {"i": int(i) + 1, "l": int(l), "m": int(m), "re": float(c[i, l, m].real),
                 "im": float(c[i, l, m].imag)}
                for i, l, m in idx
            ],
            "diagnostics": _jsonable(self.diagnostics),
        }


def _cplx_list(v):
    return [[float(x.real), float(x.imag)] for x in np.asarray(v).ravel()]


def _jsonable(d):
    if isinstance(d, dict):
        return {str(k): _jsonable(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_jsonable(v) for v in d]
    if isinstance(d, (np.floating, np.integer)):
        return d.item()
    if isinstance(d, (complex, np.complexfloating)):
        return [float(d.real), float(d.imag)]
    if isinstance(d, float) and not math.isfinite(d):
        return str(d)
    return d


# --- seeds (holomorphic part carrying the jet) -----------------------------------


def affine_seed(jet: JetCondition, deg: int = 1) -> np.ndarray:
    c = np.zeros((jet.n, deg + 1, deg + 1), dtype=complex)
    c[:, 0, 0] = jet.p
    c[:, 1, 0] = jet.u
    return c


def mobius_seed(jet: JetCondition, radii, r: float, deg: int = 24) -> np.ndarray:
    """Per-coordinate disk automorphism seed h_i(zeta) = R_i M_a(lam zeta / r).

    M_a(w) = (w + a)/(1 + conj(a) w) with a = p_i/R_i and lam chosen so that
    dh_i(0) = u_i.  When |lam| <= 1 the coordinate stays in D_{R_i}; the seed
    is the extremal holomorphic disk of a polydisk.  Truncated Taylor series.
    """
    radii = np.asarray(radii, dtype=float)
    c = np.zeros((jet.n, deg + 1, deg + 1), dtype=complex)
    for i in range(jet.n):
        a = jet.p[i] / radii[i]
        if abs(a) >= 1.0:
            c[i, 0, 0], c[i, 1, 0] = jet.p[i], jet.u[i]
            continue
        s = 1.0 - abs(a) ** 2
        lam = jet.u[i] * r / (radii[i] * s)
        c[i, 0, 0] = jet.p[i]
        ratio = lam / r
        k = np.arange(1, deg + 1)
        c[i, k, 0] = radii[i] * s * (-np.conj(a)) ** (k - 1) * ratio ** k
    return c


def jet_from_tangent(J: AlmostComplexStructure, p, v) -> np.ndarray:
    """Derivative u = dz(0) of a disk whose real differential sends 1 to v.

    f_* e = dz + dbar z = u - a(p) conj(u); solved as a real-linear system.
    """
    p = np.asarray(p, complex).reshape(-1)
    v = np.asarray(v, complex).reshape(-1)
    n = p.size
    a = J(p.reshape(n, 1))[:, :, 0]
    if not np.any(a):
        return v.copy()
    M = np.zeros((2 * n, 2 * n))
    for k in range(2 * n):
        e = np.zeros(n, complex)
        e[k % n] = 1.0 if k < n else 1j
        img = e - a @ np.conj(e)
        M[:, k] = np.r_[img.real, img.imag]
    sol = np.linalg.solve(M, np.r_[v.real, v.imag])
    return sol[:n] + 1j * sol[n:]


# --- the Picard map ------------------------------------------------------------------


def _domain_ratios(z_coeffs, J, grid, ring: int | None = None):
    """Per-coordinate max |z^i|/R_i over the nodes and a dense boundary ring."""
    ring = ring or 4 * grid.n_angular
    pts = np.concatenate([grid.nodes, grid.R * np.exp(2j * np.pi * np.arange(ring) / ring)])
    ratio = np.abs(evaluate_coeffs(z_coeffs, pts)) / J.domain.radii[:, None]
    return ratio, pts


def _check_domain(z_coeffs, J, grid, slack: float = 0.0):
    ratio, pts = _domain_ratios(z_coeffs, J, grid)
    worst = ratio.max(axis=0)
    j = int(np.argmax(worst))
    if not np.all(np.isfinite(worst)) or worst[j] > 1.0 + slack + 1e-9:
        raise LeftDomainError(pts[j], float(worst[j]) if np.isfinite(worst[j]) else math.inf)
    return float(worst[j])


def _cr_rhs(z: DiskField, J: AlmostComplexStructure, rows=None) -> np.ndarray:
    """-sum_m a[i,m](z) conj(dz^m) at the grid nodes."""
    zv = evaluate_coeffs(z.coeffs, z.grid.nodes)
    dzv = evaluate_coeffs(dz(z).coeffs, z.grid.nodes)
    a = J(zv)
    if rows is not None:
        a = a[rows]
    return -np.einsum("im...,m...->i...", a, np.conj(dzv))


def picard_step(z: DiskField, J: AlmostComplexStructure, jet: JetCondition, d_max: int = 16,
                holomorphic: np.ndarray | None = None, domain_slack: float = 0.0) -> DiskField:
    """(Phi z)^i = h^i + T_1[-sum_m a[i,m](z) dbar conj(z^m)], h = p + u zeta by default.

    ``domain_slack`` lets the input exceed the model domain by that fraction
    (the coefficients must then be defined there).
    """
    _check_domain(z.coeffs, J, z.grid, domain_slack)
    h = affine_seed(jet) if holomorphic is None else holomorphic
    if J.is_zero():
        g_coeffs = np.zeros((z.n, 1, 1), complex)
    else:
        g = fit_polynomial(z.grid, _cr_rhs(z, J), d_max)
        g_coeffs = g.coeffs
    t1 = apply_Tk_coeffs(g_coeffs, z.R, 1)
    deg = max(t1.shape[1], h.shape[1]) - 1
    return DiskField.from_coeffs(z.grid, truncate(t1, deg) + truncate(h, deg))


def residual(z: DiskField, J: AlmostComplexStructure, grid: PolarGrid | None = None) -> float:
    """sup over nodes of |dbar z + sum_m a(z) dbar conj(z^m)| (Euclidean in i)."""
    grid = grid or z.grid
    nodes = grid.nodes
    zv = evaluate_coeffs(z.coeffs, nodes)
    c = z.coeffs
    n, D1, _ = c.shape
    dzb = np.zeros_like(c)
    dzb[:, :, :-1] = c[:, :, 1:] * np.arange(1, D1)[None, None, :]
    dzz = np.zeros_like(c)
    dzz[:, :-1, :] = c[:, 1:, :] * np.arange(1, D1)[None, :, None]
    lhs = evaluate_coeffs(dzb, nodes)
    if not J.is_zero():
        lhs = lhs + np.einsum("im...,m...->i...", J(zv), np.conj(evaluate_coeffs(dzz, nodes)))
    return float(np.max(np.sqrt(np.sum(np.abs(lhs) ** 2, axis=0))))


def _norm_points(config: SolveConfig) -> np.ndarray:
    return PolarGrid(config.R_solve, *config.norm_grid).closed_nodes


def _diff_norm(a: np.ndarray, b: np.ndarray, grid, pts, lam) -> float:
    deg = max(a.shape[1], b.shape[1]) - 1
    d = truncate(a, deg) - truncate(b, deg)
    if not np.any(d):
        return 0.0
    return prime_norm(DiskField(grid, d, np.zeros((d.shape[0], 0)), 0.0), lam, pts)


class _Stopper:
    """A-posteriori geometric stopping rule with online contraction estimate."""

    def __init__(self, config: SolveConfig):
        self.cfg = config
        self.history: list[float] = []
        self.bad = 0
        self.kappa = math.nan

    def update(self, step: float) -> str | None:
        self.history.append(step)
        if not math.isfinite(step):
            return "diverged"
        if step == 0.0:
            return "stop"
        if len(self.history) >= 2 and self.history[-2] > 0:
            self.kappa = step / self.history[-2]
            if self.kappa < 1.0:
                if step <= self.cfg.residual_tol * (1.0 - self.kappa) / max(self.kappa, 1e-300):
                    return "stop"
            if self.kappa >= self.cfg.contraction_floor:
                self.bad += 1
                if self.bad >= self.cfg.divergence_window:
                    return "diverged"
            else:
                self.bad = 0
        if step > 1e8:
            return "diverged"
        return None


def _finish(z: DiskField, J, jet, config, stopper, reason, iterations, max_dev, diag) -> SolveResult:
    res = residual(z, J)
    diag = dict(diag)
    diag["kappa_hat"] = stopper.kappa
    diag["max_deviation"] = max_dev
    delta = config.delta_for(J)
    diag["delta"] = delta
    verdict = "diverged"
    if reason == "stop":
        diag["domain_ratios"] = _domain_ratios(z.coeffs, J, z.grid)[0].max(axis=1).tolist()
        try:
            diag["domain_ratio"] = _check_domain(z.coeffs, J, z.grid)
            inside = True
        except LeftDomainError as exc:
            diag["left_domain"] = str(exc)
            inside = False
        if not inside:
            verdict = "diverged"
        elif max_dev > delta:
            verdict = "left_Bdelta"
        elif res <= config.residual_tol:
            verdict = "converged"
        else:
            diag["failure"] = "residual above tolerance at the fixed point (fit floor)"
    else:
        diag.setdefault("failure", reason)
    return SolveResult(z, res, iterations, list(stopper.history), verdict, jet, diag)


def solve_direct(J: AlmostComplexStructure, jet: JetCondition, config: SolveConfig = SolveConfig(),
                 holomorphic: np.ndarray | None = None) -> SolveResult:
    """Picard iteration from z_[0] = h (affine p + u zeta unless a seed is given)."""
    if jet.n != J.n:
        raise ValueError(f"jet has {jet.n} components, structure has n = {J.n}")
    grid = config.grid
    pts = _norm_points(config)
    h = affine_seed(jet) if holomorphic is None else np.asarray(holomorphic, complex)
    z = DiskField.from_coeffs(grid, h)
    stopper = _Stopper(config)
    max_dev = 0.0
    reason = "max_iterations"
    it = 0
    for it in range(1, config.max_iterations + 1):
        try:
            z_new = picard_step(z, J, jet, config.d_max, h, config.domain_slack)
        except LeftDomainError as exc:
            return _finish(z, J, jet, config, stopper, f"left domain: {exc}", it - 1, max_dev, {})
        max_dev = max(max_dev, _deviation(z_new.coeffs, h, grid))
        step = _diff_norm(z_new.coeffs, z.coeffs, grid, pts, config.lam)
        z = z_new
        status = stopper.update(step)
        if status is not None:
            reason = status
            break
    return _finish(z, J, jet, config, stopper, reason, it, max_dev, {"scheme": "direct"})


def _deviation(c, h, grid) -> float:
    deg = max(c.shape[1], h.shape[1]) - 1
    d = truncate(c, deg) - truncate(h, deg)
    if not np.any(d):
        return 0.0
    return float(np.abs(evaluate_coeffs(d, grid.closed_nodes)).max())


# --- scalar step and linear model -----------------------------------------------------


def scalar_step_psi1(z1: DiskField, zI: DiskField, J: AlmostComplexStructure, jet: JetCondition,
                     d_max: int = 16) -> DiskField:
    """One Picard step for the first equation with the transverse part frozen."""
    z = DiskField.stack([z1, zI])
    h = affine_seed(JetCondition(jet.p[:1], jet.u[:1]))
    if J.is_zero():
        g = np.zeros((1, 1, 1), complex)
    else:
        g = fit_polynomial(z.grid, _cr_rhs(z, J, rows=slice(0, 1)), d_max).coeffs
    t1 = apply_Tk_coeffs(g, z.R, 1)
    deg = max(t1.shape[1], h.shape[1]) - 1
    return DiskField.from_coeffs(z.grid, truncate(t1, deg) + truncate(h, deg))


def _model_tables(model):
    if isinstance(model, LinearizedStructure):
        return model.P, model.Pbar
    if isinstance(model, AlmostComplexStructure):
        if model.name != "linear-transverse":
            raise ValueError("structure is not a linear-transverse model")
        return np.asarray(model.params["p"], complex), np.asarray(model.params["pbar"], complex)
    P, Pb = (np.asarray(x, complex) for x in model)
    if P.ndim == 0:  # scalar coefficients of a single transverse coordinate
        P, Pb = P.reshape(1, 1, 1, 1), Pb.reshape(1, 1, 1, 1)
    return P, Pb


def apply_linear_model(P: np.ndarray, Pbar: np.ndarray, y: np.ndarray, deg: int) -> np.ndarray:
    """Coefficients of A^I(zeta, y) = sum_m P[I,m] y^m + Pbar[I,m] conj(y^m)."""
    k = P.shape[0]
    yb = poly_conj(y)
    out = np.zeros((k, deg + 1, deg + 1), complex)
    for I in range(k):
        for m in range(k):
            if np.any(P[I, m]):
                out[I] += poly_mul(P[I, m][None], y[m][None], deg)[0]
            if np.any(Pbar[I, m]):
                out[I] += poly_mul(Pbar[I, m][None], yb[m][None], deg)[0]
    return out


@dataclass
class LinearModelResult:
    disk: DiskField
    trace: list
    iterates: list
    verdict: str


def linear_model_solve(model, vI, k_max: int = 60, grid: PolarGrid | None = None,
                       d_cap: int = 30, tol: float = 1e-12) -> LinearModelResult:
    """Iterate z_(k+1) = v zeta - T_inf[A(zeta, z_(k))] from z_(0) = v zeta.

    ``trace`` holds the sampled sup norms of successive differences.
    """
    P, Pb = _model_tables(model)
    vI = np.asarray(vI, complex).reshape(-1)
    k = vI.size
    grid = grid or PolarGrid(1.0, 32, 64)
    base = np.zeros((k, d_cap + 1, d_cap + 1), complex)
    base[:, 1, 0] = vI
    z = base.copy()
    iterates = [z]
    trace = []
    verdict = "diverged"
    pts = grid.closed_nodes
    for _ in range(k_max):
        A = apply_linear_model(P, Pb, z, d_cap)
        z_new = base - truncate(apply_Tk_coeffs(A, grid.R, None), d_cap)
        diff = float(np.abs(evaluate_coeffs(z_new - z, pts)).max())
        trace.append(diff)
        z = z_new
        iterates.append(z)
        if diff <= tol:
            verdict = "converged"
            break
    return LinearModelResult(DiskField.from_coeffs(grid, z), trace, iterates, verdict)


# --- layered scheme ---------------------------------------------------------------------


def _weierstrass_split(theta: np.ndarray, grid: PolarGrid, nu: float):
    """theta = Q + q with Q the lowest-degree truncation meeting |q| <= nu |theta|."""
    pts = grid.closed_nodes
    tv = evaluate_coeffs(theta, pts)
    sup = float(np.abs(tv).max()) if tv.size else 0.0
    D = theta.shape[1] - 1
    if sup == 0.0:
        return theta.copy(), np.zeros_like(theta), 0
    for d in range(D + 1):
        Q = truncate(truncate(theta, d), D)
        q = theta - Q
        if float(np.abs(evaluate_coeffs(q, pts)).max()) <= nu * sup:
            return Q, q, d
    return theta.copy(), np.zeros_like(theta), D


def _remainder_U(lin: LinearizedStructure, z: DiskField) -> np.ndarray:
    """U^I = A_delta + U_1 + U_2 + U_3 at the grid nodes."""
    zeta = z.grid.nodes
    zv = evaluate_coeffs(z.coeffs, zeta)
    dzc = np.conj(evaluate_coeffs(dz(z).coeffs, zeta))
    z1, zI = zv[0], zv[1:]
    A_zeta = lin.model_values(zeta, zI)
    A_z1 = lin.model_values(z1, zI)
    A_delta = A_zeta - A_z1
    U1 = A_z1 * (1.0 - dzc[0])
    U2 = -np.einsum("im...,m...->i...", lin.hat(zv), dzc)
    al, alb = lin.alpha(z1)
    U3 = -(np.einsum("im...,m...->i...", al, zI) + np.einsum("im...,m...->i...", alb, np.conj(zI))) * dzc[0]
    return A_delta + U1 + U2 + U3


def solve_layered(J: AlmostComplexStructure, jet: JetCondition, config: SolveConfig = SolveConfig()) -> SolveResult:
    """Large-radius scheme: rescale, linearize, T_inf on polynomial parts, T_1 on remainders."""
    if jet.n != J.n:
        raise ValueError(f"jet has {jet.n} components, structure has n = {J.n}")
    if np.any(jet.p != 0):
        raise ValueError("layered scheme works in the normal form p = 0")
    if J.n == 1:
        res = solve_direct(J, jet, config)
        res.diagnostics["scheme"] = "layered(n=1: scalar Picard only)"
        return res
    N = config.rescale_N or auto_rescale_factor(J)
    Jr = rescale(J, N)
    s = np.array([1.0] + [N] * (J.n - 1))
    jr = JetCondition(jet.p, jet.u / s)
    grid = config.grid
    pts = _norm_points(config)
    diag = {"scheme": "layered", "rescale_N": N}
    try:
        lin = linearize(Jr, weierstrass_degree=config.weierstrass_degree, eps=config.weierstrass_eps)
    except ValueError as exc:
        diag["failure"] = f"epsilon margin: {exc}"
        z0 = DiskField.from_coeffs(grid, affine_seed(jet))
        return SolveResult(z0, residual(z0, J), 0, [], "diverged", jet, diag)
    diag["weierstrass_degree"] = lin.degree
    diag["weierstrass_error"] = lin.remainder_bound
    # polynomial parts carry extra degree so that products with the degree-d
    # linear model are not cut back to the fit degree
    D = config.d_max + 2 * (lin.degree + 1) + 4
    k = J.n - 1
    vz = np.zeros((k, D + 1, D + 1), complex)
    vz[:, 1, 0] = jr.u[1:]
    z1 = DiskField.from_coeffs(grid, affine_seed(JetCondition(jr.p[:1], jr.u[:1])))
    P = vz.copy()
    theta = np.zeros_like(vz)
    stopper = _Stopper(config)
    kr_hist = []
    max_dev = 0.0
    reason = "max_iterations"
    it = 0
    zcur = DiskField.stack([z1, DiskField.from_coeffs(grid, P + theta)])
    for it in range(1, config.max_iterations + 1):
        try:
            _check_domain(zcur.coeffs, Jr, grid, config.domain_slack)
        except LeftDomainError as exc:
            reason = f"left domain: {exc}"
            break
        Q, q, _ = _weierstrass_split(theta, grid, config.nu)
        # polynomial part: inner sweeps of the linear model until the tail contracts
        TQ = truncate(apply_Tk_coeffs(apply_linear_model(lin.P, lin.Pbar, Q, D), grid.R, None), D)
        y = P
        prev = None
        kr = config.inner_max
        for j in range(1, config.inner_max + 1):
            y_new = vz - truncate(apply_Tk_coeffs(apply_linear_model(lin.P, lin.Pbar, y, D), grid.R, None), D) - TQ
            d = float(np.abs(y_new - y).max())
            y = y_new
            if d == 0.0 or (prev is not None and prev > 0 and d / prev < config.eps_r and d < 1e-14 * max(1.0, np.abs(y).max())):
                kr = j
                break
            if prev is not None and prev > 0 and d / prev < config.eps_r and j >= 2 and d < config.residual_tol * 1e-3:
                kr = j
                break
            prev = d
        kr_hist.append(kr)
        P_new = y
        # remainder parts through T_1
        Aq = apply_linear_model(lin.P, lin.Pbar, q, D)
        U = fit_polynomial(grid, _remainder_U(lin, zcur), config.d_max).coeffs
        theta_new = truncate(apply_Tk_coeffs(truncate(U, D) - Aq, grid.R, 1), D)
        z1_new = scalar_step_psi1(zcur.component(0), zcur.component(slice(1, None)), Jr, jr, config.d_max)
        z_new = DiskField.stack([z1_new.with_degree(D), DiskField.from_coeffs(grid, P_new + theta_new)])
        ref = truncate(affine_seed(jr), D)
        max_dev = max(max_dev, _deviation(z_new.coeffs * s[:, None, None], ref * s[:, None, None], grid))
        step = _diff_norm(z_new.coeffs, zcur.coeffs, grid, pts, config.lam)
        P, theta, zcur = P_new, theta_new, z_new
        status = stopper.update(step)
        if status is not None:
            reason = status
            break
    diag["k_r"] = kr_hist
    if reason == "diverged" and stopper.kappa >= config.contraction_floor:
        diag["margins"] = _margin_report(lin, config, kr_hist, max_dev, J)
    z_out = DiskField.from_coeffs(grid, zcur.coeffs * s[:, None, None])
    return _finish(z_out, J, jet, config, stopper, reason, it, max_dev, diag)


def _margin_report(lin, config, kr_hist, max_dev, J) -> dict:
    return {
        "delta": {"observed": max_dev, "allowed": config.delta_for(J), "ok": max_dev <= config.delta_for(J)},
        "epsilon": {"observed": lin.remainder_bound, "allowed": config.weierstrass_eps,
                    "ok": lin.remainder_bound < config.weierstrass_eps},
        "eps_r": {"inner_sweeps": kr_hist[-1] if kr_hist else None, "cap": config.inner_max,
                  "ok": bool(kr_hist) and kr_hist[-1] < config.inner_max},
        "nu": {"value": config.nu},
    }


def solve(J: AlmostComplexStructure, jet: JetCondition, config: SolveConfig = SolveConfig(),
          holomorphic: np.ndarray | None = None) -> SolveResult:
    if config.scheme == "layered":
        return solve_layered(J, jet, config)
    return solve_direct(J, jet, config, holomorphic)


@dataclass
class JetSweep:
    """Solve outcomes on a square sample of jets around v0, clipped to a ball."""

    v0: np.ndarray
    radius: float
    rows: list
    success_radius: float

    @property
    def all_converged(self) -> bool:
        return all(r["verdict"] == "converged" for r in self.rows)


def jet_sweep(J: AlmostComplexStructure, v0=None, radius: float = 0.05, n_side: int = 5,
              config: SolveConfig = SolveConfig(), workers: int = 1) -> JetSweep:
    """Jets (0, v0 + d) with d on an n_side x n_side grid in the (u^1, u^2) real plane.

    Grid points outside the ball are pulled radially onto its boundary.  The
    success radius is the largest sampled |d| below every failing |d| (``radius``
    when everything converges).
    """
    v0 = np.eye(J.n, dtype=complex)[0] if v0 is None else np.asarray(v0, complex)
    axis = np.linspace(-radius, radius, n_side)
    jets = []
    for dx in axis:
        for dy in axis:
            d = np.array([dx, dy])
            if np.hypot(*d) > radius:
                d *= radius / np.hypot(*d)
            u = v0.copy()
            u[0] += d[0]
            if J.n > 1:
                u[1] += d[1]
            jets.append(u)

    def one(u):
        return solve(J, JetCondition.at_origin(u), config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jets))
    else:
        results = [one(u) for u in jets]
    rows = [{"u": u, "offset": float(np.linalg.norm(u - v0)), "verdict": res.verdict,
             "residual": res.residual, "iterations": res.iterations,
             "max_deviation": res.diagnostics.get("max_deviation", math.nan)}
            for u, res in zip(jets, results)]
    bad = [r["offset"] for r in rows if r["verdict"] != "converged"]
    if not bad:
        rad = float(radius)
    else:
        first_bad = min(bad)
        ok = [r["offset"] for r in rows if r["verdict"] == "converged" and r["offset"] < first_bad]
        rad = max(ok, default=0.0)
    return JetSweep(v0, float(radius), rows, rad)
