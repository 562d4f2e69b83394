"""Kobayashi-Royden pseudonorm and pseudodistances with the solver as disk engine.

All disks live in the model-domain chart, so every value here is an upper
bound for the chart-free infimum.  The pseudonorm is a bisection over the
disk radius with "the solver converged" as the oracle; distances come from
polyline paths (integrating the pseudonorm) or from chains of disks (summing
Poincare distances).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .acs import AlmostComplexStructure
from .solver import (
    JetCondition,
    SolveConfig,
    SolveResult,
    affine_seed,
    jet_from_tangent,
    mobius_seed,
    solve_direct,
    solve_layered,
)

__all__ = [
    "poincare_metric",
    "poincare_distance",
    "KobayashiConfig",
    "PseudonormEstimate",
    "DistanceResult",
    "pseudonorm",
    "semicontinuity_probe",
    "path_distance",
    "chain_distance",
    "link_distance",
    "hyperbolicity_scan",
]


def poincare_metric(z, v) -> float:
    """|v| / (1 - |z|^2) on the unit disk."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("point must lie in the open unit disk")
    return abs(complex(v)) / (1.0 - abs(z) ** 2)


def poincare_distance(z, w) -> float:
    """arctanh |(z - w)/(1 - conj(z) w)|."""
    z, w = complex(z), complex(w)
    if abs(z) >= 1.0 or abs(w) >= 1.0:
        raise ValueError("points must lie in the open unit disk")
    return float(np.arctanh(abs(z - w) / abs(1.0 - np.conj(z) * w)))


@dataclass(frozen=True)
class KobayashiConfig:
    tol: float = 1e-2
    n_radial: int = 20
    n_angular: int = 40
    d_max: int = 16
    residual_tol: float = 1e-5
    max_iterations: int = 60
    norm_grid: tuple = (6, 12)
    seeds: tuple = ("mobius", "affine")
    use_layered: bool = True
    max_bisections: int = 60
    domain_slack: float = 0.25

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        bad = set(self.seeds) - {"mobius", "affine"}
        if bad or not self.seeds:
            raise ValueError(f"unknown seeds {sorted(bad)}")

    def solve_config(self, r: float, scheme: str = "direct") -> SolveConfig:
        return SolveConfig(R_solve=r, delta=math.inf, max_iterations=self.max_iterations,
                           residual_tol=self.residual_tol, scheme=scheme, n_radial=self.n_radial,
                           n_angular=self.n_angular, d_max=self.d_max, norm_grid=self.norm_grid,
                           domain_slack=self.domain_slack)


@dataclass
class PseudonormEstimate:
    value: float
    r_lo: float
    r_hi: float
    witness: SolveResult | None
    p: np.ndarray
    v: np.ndarray
    failure: SolveResult | None = None
    solves: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bracket": [self.r_lo, self.r_hi],
            "p": [[float(x.real), float(x.imag)] for x in self.p],
            "v": [[float(x.real), float(x.imag)] for x in self.v],
            "witness_verdict": self.witness.verdict if self.witness else None,
            "witness_residual": self.witness.residual if self.witness else None,
            "failed_verdict": self.failure.verdict if self.failure else None,
            "solves": self.solves,
        }


@dataclass
class DistanceResult:
    value: float
    method: str
    optimizer: object
    level: int
    history: list = field(default_factory=list)
    verdict: str = "ok"

    def to_dict(self) -> dict:
        if self.method == "path_integral":
            opt = [[[float(x.real), float(x.imag)] for x in pt] for pt in np.asarray(self.optimizer)]
        else:
            opt = [{"from": [[float(x.real), float(x.imag)] for x in a],
                    "to": [[float(x.real), float(x.imag)] for x in b], "t": t}
                   for a, b, t in self.optimizer]
        return {"value": self.value, "method": self.method, "level": self.level,
                "history": self.history, "verdict": self.verdict, "optimizer": opt}


def _map_ordered(func, items, workers: int = 1) -> list:
    """map preserving input order; threads only when workers > 1."""
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --- pseudonorm ---------------------------------------------------------------------


def _canonical_direction(v: np.ndarray) -> tuple[np.ndarray, float]:
    """v = s * vhat with s = |v| > 0 and vhat fixed under v -> t v, t real."""
    s = float(np.linalg.norm(v))
    vhat = v / s
    lead = vhat[np.flatnonzero(vhat)[0]]
    if lead.real < 0 or (lead.real == 0 and lead.imag < 0):
        vhat = -vhat
    return vhat, s


def _seed_radius(p, u, radii) -> float:
    """Largest r for which the per-coordinate automorphism seed stays in the polydisk."""
    out = math.inf
    for pi, ui, Ri in zip(p, u, radii):
        if ui != 0:
            out = min(out, Ri * (1.0 - abs(pi / Ri) ** 2) / abs(ui))
    return out


def _seed_scale(res: SolveResult, p, radii) -> float | None:
    """Largest |lambda_i| of automorphism seeds with the witness' coordinate image radii."""
    ratios = res.diagnostics.get("domain_ratios")
    if not ratios:
        return None
    a = np.abs(np.asarray(p) / radii)
    rho = np.asarray(ratios)
    den = 1.0 - a * rho
    if np.any(den <= 0):
        return None
    out = float(((rho - a) / den).max())
    return out if out > 0 else None


def _seed_degree(p, radii) -> int:
    a = float(np.max(np.abs(np.asarray(p) / radii)))
    if a < 1e-3:
        return 8
    return int(min(200, max(8, math.ceil(math.log(1e-15) / math.log(a)) + 2)))


def _try_disk(J, jet: JetCondition, r: float, cfg: KobayashiConfig) -> tuple[SolveResult | None, SolveResult | None]:
    """A converged disk of radius r with the given jet, trying seeds then the layered scheme."""
    last = None
    radii = J.domain.radii
    for seed in cfg.seeds:
        if seed == "affine" and "mobius" in cfg.seeds and not np.any(jet.p):
            continue  # identical to the automorphism seed at the origin
        h = (mobius_seed(jet, radii, r, _seed_degree(jet.p, radii)) if seed == "mobius"
             else affine_seed(jet))
        res = solve_direct(J, jet, cfg.solve_config(r), holomorphic=h)
        if res.converged:
            return res, None
        last = res
    if cfg.use_layered and J.n > 1 and not np.any(jet.p) and not J.is_zero():
        res = solve_layered(J, jet, cfg.solve_config(r, "layered"))
        if res.converged:
            return res, None
        last = res
    return None, last


def pseudonorm(J: AlmostComplexStructure, p, v, config: KobayashiConfig = KobayashiConfig(),
               hint: float | None = None) -> PseudonormEstimate:
    """Bisection estimate F = 1/r_lo of the Kobayashi-Royden pseudonorm at (p, v).

    ``hint`` is an expected extremal radius for the unit direction (for example
    from a nearby point); without it the polydisk-seed radius is used.
    """
    p = np.asarray(p, complex).reshape(-1)
    v = np.asarray(v, complex).reshape(-1)
    if p.size != J.n or v.size != J.n:
        raise ValueError(f"point and vector must have {J.n} components")
    if J.domain.violation(p[:, None]) >= 1.0:
        raise ValueError("base point outside the model domain")
    if not np.any(v):
        jet = JetCondition(p, np.zeros_like(p))
        w = solve_direct(J, jet, config.solve_config(1.0), holomorphic=affine_seed(jet))
        return PseudonormEstimate(0.0, math.inf, math.inf, w, p, v)
    vhat, s = _canonical_direction(v)
    u = jet_from_tangent(J, p, vhat)
    jet = JetCondition(p, u)
    tol = config.tol
    guess = hint if hint is not None and hint > 0 else _seed_radius(p, u, J.domain.radii)
    solves = 0
    lo = hi = None
    wit = fail = None

    def probe(r):
        nonlocal solves
        solves += 1
        return _try_disk(J, jet, r, config)

    # lam(r) = largest seed scale reproducing the disk's coordinate image radii;
    # the extremal radius solves lam(r) = 1 (lam is linear in r for polydisk seeds).
    lam_lo = lam_hi = None
    down = streak = 0
    last_ok = None
    r = guess * (1.0 - tol / 3.0)
    for _ in range(config.max_bisections):
        ok, bad = probe(r)
        streak = streak + 1 if (ok is not None) == last_ok else 1
        last_ok = ok is not None
        if ok is not None:
            lo, wit, lam_lo = r, ok, _seed_scale(ok, p, J.domain.radii)
        else:
            hi, fail = r, bad
            lam_hi = _seed_scale(bad, p, J.domain.radii) if bad is not None else None
        if lo is not None and hi is not None and hi / lo - 1.0 <= tol:
            break
        if lo is None:
            down += 1
            r = hi / lam_hi * (1.0 - tol / 3.0) if lam_hi and lam_hi > 1.0 else hi * (1.0 - tol / 1.5) ** (2 ** down)
            if r < 1e-9 * guess:
                raise ValueError("no disk found at any probed radius")
            continue
        if hi is None:
            est = lo / lam_lo if lam_lo else 2.0 * lo
            r = min(max(est * (1.0 + tol / 3.0), lo * (1.0 + tol / 3.0)), 4.0 * lo)
            continue
        if streak >= 2:
            # the interpolant keeps landing on one side; bisect instead
            r = math.sqrt(lo * hi)
            continue
        if lam_lo and lam_hi and lam_hi > lam_lo:
            est = lo + (1.0 - lam_lo) * (hi - lo) / (lam_hi - lam_lo)
        else:
            est = math.sqrt(lo * hi)
        below, above = est * (1.0 - tol / 3.0), est * (1.0 + tol / 3.0)
        margin = 1.0 + tol / 10.0
        if lo * margin < below < hi / margin:
            r = below
        elif lo * margin < above < hi / margin:
            r = above
        else:
            r = math.sqrt(lo * hi)
    else:
        if lo is None:
            raise ValueError("no disk found at any probed radius")
        if hi is None:
            raise ValueError("no failing radius found; the chart does not bound the disks")
    return PseudonormEstimate(s / lo, lo / s, hi / s, wit, p, v, fail, solves)


def semicontinuity_probe(J, p, v0, radius: float, n_samples: int = 12, seed: int = 0,
                         config: KobayashiConfig = KobayashiConfig()) -> dict:
    """max F(v) - F(v0) over vectors on the sphere |v - v0| = radius."""
    p = np.asarray(p, complex).reshape(-1)
    v0 = np.asarray(v0, complex).reshape(-1)
    F0 = pseudonorm(J, p, v0, config).value
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_samples):
        d = rng.standard_normal(v0.size) + 1j * rng.standard_normal(v0.size)
        v = v0 + radius * d / np.linalg.norm(d)
        rows.append({"v": v, "F": pseudonorm(J, p, v, config).value})
    excess = max([r["F"] - F0 for r in rows], default=0.0)
    excess = max(excess, 0.0)
    return {"F0": F0, "radius": radius, "samples": rows, "max_excess": excess,
            "relative_excess": excess / F0 if F0 > 0 else math.inf}


# --- path integral -------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _path_functional(J, verts, config, cache, hints):
    total = 0.0
    for i, (a, b) in enumerate(zip(verts[:-1], verts[1:])):
        d = b - a
        if not np.any(d):
            continue
        for j, (x, w) in enumerate(zip(_GL_X, _GL_W)):
            pt = a + x * d
            if J.domain.violation(pt[:, None]) >= 1.0 - 1e-9:
                return math.inf
            key = (pt.tobytes(), d.tobytes())
            if key not in cache:
                slot = (len(verts), i, j)
                try:
                    est = pseudonorm(J, pt, d, config, hint=hints.get(slot))
                except ValueError:
                    return math.inf
                hints[slot] = est.r_lo * float(np.linalg.norm(d))
                cache[key] = est.value
            total += w * cache[key]
    return total


def _resample(verts: np.ndarray, k: int) -> np.ndarray:
    """k-segment polyline through equally spaced parameter values of ``verts``."""
    m = len(verts) - 1
    out = []
    for t in np.linspace(0.0, m, k + 1):
        i = min(int(t), m - 1)
        out.append(verts[i] + (t - i) * (verts[i + 1] - verts[i]))
    return np.array(out)


def path_distance(J: AlmostComplexStructure, p, q, levels=(1, 2, 4, 8),
                  config: KobayashiConfig = KobayashiConfig(), method: str = "Nelder-Mead",
                  maxfev_per_dim: int = 15, rel_stop: float | None = 5e-3) -> DistanceResult:
    """Minimize sum_i w_i F(gamma(t_i), gamma'(t_i)) over polylines with k segments.

    Interior vertices are optimized at each level starting from the previous
    best path; the reported value never increases with the level.
    ``rel_stop`` ends refinement once a level improves by less than that fraction.
    """
    p = np.asarray(p, complex).reshape(-1)
    q = np.asarray(q, complex).reshape(-1)
    if np.array_equal(p, q):
        return DistanceResult(0.0, "path_integral", np.array([p, q]), 0, [0.0])
    for x in (p, q):
        if J.domain.violation(x[:, None]) >= 1.0:
            raise ValueError("endpoints must lie in the model domain")
    cache: dict = {}
    hints: dict = {}
    best = np.array([p, q])
    best_val = _path_functional(J, best, config, cache, hints)
    history = [best_val]
    level = 1
    n = J.n
    for k in levels:
        if k <= 1:
            continue
        start = _resample(best, k)
        x0 = np.concatenate([start[1:-1].real.ravel(), start[1:-1].imag.ravel()])

        def unpack(x):
            inner = (x[: (k - 1) * n] + 1j * x[(k - 1) * n:]).reshape(k - 1, n)
            return np.vstack([p[None], inner, q[None]])

        f = lambda x: _path_functional(J, unpack(x), config, cache, hints)  # noqa: E731
        opts = {"maxfev": maxfev_per_dim * x0.size}
        if method == "Nelder-Mead":
            opts.update(xatol=1e-4, fatol=1e-6)
        res = minimize(f, x0, method=method, options=opts)
        prev = best_val
        if res.fun < best_val:
            best_val, best = float(res.fun), unpack(res.x)
        history.append(best_val)
        level = k
        if rel_stop is not None and prev - best_val <= rel_stop * prev:
            break
    return DistanceResult(best_val, "path_integral", best, level, history)


# --- chains of disks ------------------------------------------------------------------


def _mobius_inv(a: complex, w: complex) -> complex:
    return (w - a) / (1.0 - np.conj(a) * w)


def _disk_through(J, a, b, t, config, iters: int = 30):
    """Converged disk f on D_1 with f(0) = a and f(t) = b, or None."""
    radii = J.domain.radii
    target = b.copy()
    deg = _seed_degree(a, radii)
    for _ in range(iters):
        beta = np.array([_mobius_inv(ai / Ri, wi / Ri) for ai, wi, Ri in zip(a, target, radii)])
        lam = beta / t
        if np.any(np.abs(lam) > 1.0):
            return None
        u = lam * radii * (1.0 - np.abs(a / radii) ** 2)
        jet = JetCondition(a, u)
        h = mobius_seed(jet, radii, 1.0, deg)
        res = solve_direct(J, jet, config.solve_config(1.0), holomorphic=h)
        if not res.converged:
            return None
        err = b - res.disk(np.array([t]))[:, 0]
        if np.max(np.abs(err)) <= 1e-10 * max(1.0, float(np.max(radii))):
            return res
        if J.is_zero():
            return None
        target = target + err
    return None


def link_distance(J: AlmostComplexStructure, a, b, config: KobayashiConfig = KobayashiConfig()):
    """One-disk cost arctanh(t*) with t* the least t such that some disk maps 0 -> a, t -> b."""
    a = np.asarray(a, complex).reshape(-1)
    b = np.asarray(b, complex).reshape(-1)
    if np.array_equal(a, b):
        return 0.0, 0.0
    radii = J.domain.radii
    if J.domain.violation(a[:, None]) >= 1.0 or J.domain.violation(b[:, None]) >= 1.0:
        raise ValueError("endpoints must lie in the model domain")
    t0 = max(abs(_mobius_inv(ai / Ri, bi / Ri)) for ai, bi, Ri in zip(a, b, radii))
    tol = config.tol

    def feasible(t):
        return t < 1.0 and _disk_through(J, a, b, t, config) is not None

    cost = lambda t: float(np.arctanh(t))  # noqa: E731
    lo = hi = None
    t = min(t0 * (1.0 + tol / 3.0), 0.5 * (1.0 + t0))
    if feasible(t):
        hi = t
        t2 = t0 * (1.0 - tol / 3.0)
        step = tol / 1.5
        while True:
            if not feasible(t2):
                lo = t2
                break
            hi = t2
            t2 = hi * (1.0 - step)
            step = min(0.5, 2 * step)
            if hi < 1e-12:
                return 0.0, hi
    else:
        lo = t
        step = tol / 1.5
        while True:
            t2 = lo + (1.0 - lo) * min(0.5, step)
            if feasible(t2):
                hi = t2
                break
            lo = t2
            step *= 2
            if 1.0 - lo < 1e-12:
                return math.inf, 1.0
    for _ in range(config.max_bisections):
        if cost(hi) - cost(lo) <= tol * cost(hi):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return cost(hi), hi


def chain_distance(J: AlmostComplexStructure, p, q, max_chain_length: int = 1,
                   config: KobayashiConfig = KobayashiConfig(), optimize_up_to: int = 2,
                   maxfev_per_dim: int = 10) -> DistanceResult:
    """Least sum of Poincare distances over chains of at most ``max_chain_length`` disks.

    A chain of m disks joins points spaced along the segment [p, q]; for
    m <= ``optimize_up_to`` the intermediate points are then optimized.
    """
    p = np.asarray(p, complex).reshape(-1)
    q = np.asarray(q, complex).reshape(-1)
    if max_chain_length < 1:
        raise ValueError("max_chain_length must be >= 1")
    if np.array_equal(p, q):
        return DistanceResult(0.0, "chain", [], 0, [0.0])
    n = J.n
    history = []
    best_val, best_chain, best_m = math.inf, None, 0
    cache: dict = {}

    def link(u, w):
        key = (u.tobytes(), w.tobytes())
        if key not in cache:
            try:
                cache[key] = link_distance(J, u, w, config)
            except ValueError:
                cache[key] = (math.inf, 1.0)
        return cache[key]

    for m in range(1, max_chain_length + 1):

        def pts(x):
            inner = (x[: (m - 1) * n] + 1j * x[(m - 1) * n:]).reshape(m - 1, n)
            return [p] + list(inner) + [q]

        def total(x):
            ps = pts(x)
            if any(J.domain.violation(z[:, None]) >= 1.0 for z in ps):
                return math.inf
            return sum(link(u, w)[0] for u, w in zip(ps[:-1], ps[1:]))

        inner0 = np.array([p + (q - p) * j / m for j in range(1, m)]).reshape(m - 1, n)
        x = np.concatenate([inner0.real.ravel(), inner0.imag.ravel()])
        if 1 < m <= optimize_up_to and maxfev_per_dim > 0:
            res = minimize(total, x, method="Nelder-Mead",
                           options={"maxfev": maxfev_per_dim * x.size, "xatol": 1e-4, "fatol": 1e-6})
            if res.fun < total(x):
                x = res.x
        ps = pts(x)
        links = [link(u, w) for u, w in zip(ps[:-1], ps[1:])]
        val = float(sum(c for c, _ in links))
        history.append(val)
        if val < best_val:
            best_val, best_m = val, m
            best_chain = [(u, w, t) for (u, w), (_, t) in zip(zip(ps[:-1], ps[1:]), links)]
    verdict = "ok" if math.isfinite(best_val) else "no chain found"
    return DistanceResult(best_val, "chain", best_chain or [], best_m, history, verdict)


# --- hyperbolicity -------------------------------------------------------------------


def hyperbolicity_scan(J: AlmostComplexStructure, points, n_directions: int = 8, seed: int = 0,
                       threshold: float = 1e-3, config: KobayashiConfig = KobayashiConfig(),
                       workers: int = 1) -> dict:
    """Sample F on unit vectors (max-norm |v|_inf = 1) at the given points.

    Directions are drawn up front, so the table does not depend on ``workers``.
    """
    rng = np.random.default_rng(seed)
    pts = np.atleast_2d(np.asarray(points, complex))
    n = J.n
    tasks = []
    for i, p in enumerate(pts):
        dirs = [np.eye(n, dtype=complex)[j] for j in range(n)]
        while len(dirs) < n_directions:
            d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            dirs.append(d / np.max(np.abs(d)))
        tasks += [(i, p, d) for d in dirs[:max(n_directions, 1)]]
    values = _map_ordered(lambda t: pseudonorm(J, t[1], t[2], config).value, tasks, workers)
    rows = [{"point": i, "v": d, "F": F} for (i, _, d), F in zip(tasks, values)]
    vals = np.array([r["F"] for r in rows])
    lo_i, hi_i = int(np.argmin(vals)), int(np.argmax(vals))
    return {
        "min": float(vals[lo_i]),
        "max": float(vals[hi_i]),
        "argmin": lo_i,
        "argmax": hi_i,
        "C_K": float(vals[hi_i]),
        "threshold": threshold,
        "verdict": "hyperbolic evidence" if vals[lo_i] > threshold else "no hyperbolic evidence",
        "samples": rows,
    }
