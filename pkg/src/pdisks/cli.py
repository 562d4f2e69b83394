"""Command-line driver: ``pdisks <command> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 non-convergence,
3 no disk found.  Results go to ``--output`` (written atomically) or stdout.
Wall time is kept out of the result file so reruns compare bit-for-bit; it is
written next to it as ``<output>.meta.json``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .acs import catalog, load_structure, CATALOG_NAMES
from .cauchy_ops import (
    apply_Tk_coeffs,
    estimate_bounds,
    op_S,
    random_polynomial,
)
from .disk_field import DiskField, PolarGrid, dbar, evaluate_coeffs, monomial, truncate
from .kobayashi import (
    KobayashiConfig,
    chain_distance,
    hyperbolicity_scan,
    path_distance,
    pseudonorm,
)
from .solver import JetCondition, SolveConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_NO_DISK = 0, 1, 2, 3
THREADS_ENV = "PDISKS_THREADS"


class UsageError(Exception):
    pass


# --- parsing helpers ---------------------------------------------------------------


def parse_vector(text: str) -> np.ndarray:
    """'1,0.5+0.2j,-1j' -> complex array."""
    try:
        return np.array([complex(s.strip().replace(" ", "")) for s in text.split(",")], dtype=complex)
    except ValueError as exc:
        raise UsageError(f"cannot parse complex vector {text!r}") from exc


def parse_monomial(text: str) -> tuple[int, int, int | None]:
    """'l=3,m=0,k=1' -> (3, 0, 1); k may be 'inf' or -1 for the full T."""
    fields = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    try:
        l, m = int(fields["l"]), int(fields["m"])
        k = fields.get("k", "-1")
        k = None if k in ("inf", "oo") else int(k)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad --monomial {text!r}; expected l=INT,m=INT,k=INT|inf") from exc
    if l < 0 or m < 0:
        raise UsageError("--monomial exponents must be nonnegative")
    return l, m, k


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer")
    return max(val, 1)


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, complex):
        return [_sanitize(obj.real), _sanitize(obj.imag)]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _cplx_pairs(v) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, complex).ravel()]


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".pdisks-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- structure / config ------------------------------------------------------------


def build_structure(args):
    if args.structure:
        if not os.path.exists(args.structure):
            raise UsageError(f"structure file not found: {args.structure}")
        return load_structure(args.structure)
    params = {}
    if args.catalog == "perturbed":
        params["amplitude"] = args.amplitude
        if args.sigma is not None:
            params["sigma"] = args.sigma
    if args.catalog == "linear-transverse":
        try:
            params["p"] = complex(args.lt_p) if args.lt_p else 0.0
            params["pbar"] = complex(args.lt_pbar) if args.lt_pbar else 0.3
        except ValueError as exc:
            raise UsageError(f"--lt-p/--lt-pbar must be complex scalars: {exc}") from exc
    return catalog(args.catalog, n=args.n, R=args.R, R1=args.R1, **params)


def _point(text, n, name):
    if text is None:
        return np.zeros(n, complex)
    v = parse_vector(text)
    if v.size != n:
        raise UsageError(f"--{name} needs {n} components, got {v.size}")
    return v


def _kob_config(args) -> KobayashiConfig:
    return KobayashiConfig(tol=args.tol)


def config_echo(args) -> dict:
    skip = {"func", "threads", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# --- commands ----------------------------------------------------------------------


def cmd_solve(args, J):
    u = _point(args.u, J.n, "u")
    p = _point(args.p, J.n, "p")
    R_solve = args.R_solve if args.R_solve is not None else J.domain.R - args.epsilon
    cfg = SolveConfig(R_solve=R_solve, epsilon=args.epsilon, delta=args.delta,
                      max_iterations=args.max_iterations, residual_tol=args.residual_tol,
                      scheme=args.scheme, n_radial=args.n_radial, n_angular=args.n_angular,
                      d_max=args.d_max)
    res = solve(J, JetCondition(p, u), cfg)
    body = res.to_dict()
    rows = [[c["i"], c["l"], c["m"], c["re"], c["im"]] for c in body["coefficients"]]
    table = (["i", "l", "m", "re", "im"], rows)
    return body, table, EXIT_OK if res.converged else EXIT_DIVERGED


def _pad_diff(a, b) -> float:
    D = max(a.shape[1], b.shape[1])
    return float(np.abs(truncate(a, D - 1) - truncate(b, D - 1)).max(initial=0.0))


def _tk_property_error(l: int, m: int, k: int | None, R: float) -> float:
    """Check T_k against its defining properties rather than the closed form:
    dbar T_k f = f, T_k f - T f holomorphic, and (finite k) no holomorphic terms of
    degree <= k; T_inf f has no holomorphic part at all."""
    f = monomial(l, m)
    out = apply_Tk_coeffs(f, R, k)
    grid = PolarGrid(R, 2, 1)
    err = _pad_diff(dbar(DiskField.from_coeffs(grid, out)).coeffs, f)
    full = apply_Tk_coeffs(f, R, -1)
    diff = out - full
    err = max(err, np.abs(diff[:, :, 1:]).max(initial=0.0))
    if k is None:
        err = max(err, np.abs(out[:, :, 0]).max(initial=0.0))
    elif k >= 0:
        err = max(err, np.abs(out[:, : k + 1, 0]).max(initial=0.0))
        err = max(err, np.abs(diff[:, k + 1 :, 0]).max(initial=0.0))
    else:
        err = max(err, np.abs(diff).max(initial=0.0))
    return float(err)


def cmd_operator_check(args, J=None):
    R = args.R
    rng = np.random.default_rng(args.seed)
    grid = PolarGrid(R, 24, 48)
    res = {"dbar_T_minus_id": 0.0, "dbar_S": 0.0, "S_T": 0.0, "pompeiu": 0.0}
    for _ in range(args.count):
        cf = random_polynomial(rng, args.degree, R=R)
        Tf = apply_Tk_coeffs(cf, R, -1)
        dT = dbar(DiskField.from_coeffs(grid, Tf)).coeffs
        res["dbar_T_minus_id"] = max(res["dbar_T_minus_id"], _pad_diff(dT, cf))
        f = DiskField.from_coeffs(grid, cf)
        Sf = op_S(f.boundary_values(), grid)
        res["dbar_S"] = max(res["dbar_S"], float(np.abs(dbar(Sf).coeffs).max()))
        TfF = DiskField.from_coeffs(grid, Tf)
        STf = op_S(TfF.boundary_values(), grid)
        res["S_T"] = max(res["S_T"], float(np.abs(STf.samples).max()))
        Tdbar = DiskField.from_coeffs(grid, apply_Tk_coeffs(dbar(f).coeffs, R, -1))
        pomp = Sf.samples + Tdbar.samples[:, :] - f.samples
        res["pompeiu"] = max(res["pompeiu"], float(np.abs(pomp).max()))
    mono_err = 0.0
    for l in range(13):
        for m in range(13 - l):
            for k in (-1, 0, 1, 2, None):
                mono_err = max(mono_err, _tk_property_error(l, m, k, R))
    res["Tk_monomials"] = mono_err
    body = {"R": R, "count": args.count, "degree": args.degree,
            "identity_residuals": res, "max_residual": max(res.values())}
    monos = []
    for text in args.monomial or []:
        l, m, k = parse_monomial(text)
        out = apply_Tk_coeffs(monomial(l, m), R, k)
        terms = [{"l": int(a), "m": int(b), "re": float(out[0, a, b].real), "im": float(out[0, a, b].imag)}
                 for a, b in zip(*np.nonzero(out[0]))]
        # closed form: w^l wbar^(m+1)/(m+1) minus the removed holomorphic term
        expected = np.zeros_like(out)
        expected[0, l, m + 1] = 1.0 / (m + 1)
        if k is not None and l >= k + m + 2:
            expected[0, l - m - 1, 0] -= R ** (2 * (m + 1)) / (m + 1)
        w = R * 0.7 * np.exp(1j * np.linspace(0, 2 * np.pi, 7))
        monos.append({"l": l, "m": m, "k": "inf" if k is None else k, "terms": terms,
                      "coefficient_error": _pad_diff(out, expected),
                      "pointwise_error": float(np.abs(evaluate_coeffs(out, w) - evaluate_coeffs(expected, w)).max())})
    body["monomials"] = monos
    est = estimate_bounds(args.seed, args.samples)
    body["bounds"] = ({} if args.samples == 0 else
                      {"c1_hat": est.c1_hat, "c2_hat": est.c2_hat, "C_hat": est.C_hat,
                       "mu_hat": est.mu_hat, "sample_count": est.sample_count})
    table = (["check", "residual"], [[k, v] for k, v in res.items()])
    return body, table, EXIT_OK


def cmd_pseudonorm(args, J):
    p = _point(args.p, J.n, "p")
    v = _point(args.v, J.n, "v")
    est = pseudonorm(J, p, v, _kob_config(args))
    body = est.to_dict()
    if est.witness is not None:
        body["witness"] = est.witness.to_dict()
    row = [est.value, est.r_lo, est.r_hi]
    for x in np.concatenate([p, v]):
        row += [float(x.real), float(x.imag)]
    head = ["value", "r_lo", "r_hi"] + [f"{s}{i + 1}_{c}" for s in ("p", "v") for i in range(J.n)
                                        for c in ("re", "im")]
    return body, (head, [row]), EXIT_OK


def cmd_distance(args, J):
    p = _point(args.p, J.n, "p")
    q = _point(args.q, J.n, "q")
    cfg = _kob_config(args)
    body = {"p": _cplx_pairs(p), "q": _cplx_pairs(q)}
    rows = []
    if args.method in ("path", "both"):
        levels = tuple(int(s) for s in args.levels.split(","))
        r = path_distance(J, p, q, levels=levels, config=cfg)
        body["path"] = r.to_dict()
        rows.append(["path_integral", r.value, r.level])
    if args.method in ("chain", "both"):
        r = chain_distance(J, p, q, max_chain_length=args.max_chain_length, config=cfg)
        body["chain"] = r.to_dict()
        rows.append(["chain", r.value, r.level])
    if args.method == "both":
        a, b = body["path"]["value"], body["chain"]["value"]
        body["relative_gap"] = abs(a - b) / max(abs(a), abs(b)) if math.isfinite(a + b) and max(a, b) > 0 else math.nan
    values = [r[1] for r in rows]
    code = EXIT_OK if all(math.isfinite(x) for x in values) else EXIT_NO_DISK
    return body, (["method", "value", "level"], rows), code


def _region_points(J, region: str) -> np.ndarray:
    n = J.n
    radii = J.domain.radii
    pts = [np.zeros(n, complex)]
    if region == "full":
        for i in range(n):
            for s in (0.5, -0.5j):
                e = np.zeros(n, complex)
                e[i] = s * radii[i]
                pts.append(e)
    elif region != "center":
        raise UsageError(f"unknown region {region!r}; use full or center")
    return np.array(pts)


def cmd_hyperbolicity(args, J):
    pts = _region_points(J, args.region)
    out = hyperbolicity_scan(J, pts, n_directions=args.directions, seed=args.seed,
                             threshold=args.threshold, config=_kob_config(args), workers=args.workers)
    head = ["point"] + [f"p{i + 1}_{c}" for i in range(J.n) for c in ("re", "im")] \
        + [f"v{i + 1}_{c}" for i in range(J.n) for c in ("re", "im")] + ["F"]
    rows = []
    for s in out["samples"]:
        row = [s["point"]]
        for x in np.concatenate([pts[s["point"]], s["v"]]):
            row += [float(x.real), float(x.imag)]
        rows.append(row + [s["F"]])
    out["points"] = [_cplx_pairs(p) for p in pts]
    out["samples"] = [{"point": s["point"], "v": _cplx_pairs(s["v"]), "F": s["F"]} for s in out["samples"]]
    return out, (head, rows), EXIT_OK


# --- argparse -------------------------------------------------------------------------


def _structure_args(sp):
    g = sp.add_argument_group("structure")
    g.add_argument("--catalog", default="integrable", choices=list(CATALOG_NAMES))
    g.add_argument("--structure", help="JSON structure file (overrides --catalog)")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--R", type=float, default=1.0)
    g.add_argument("--R1", type=float, default=None)
    g.add_argument("--amplitude", type=float, default=0.05)
    g.add_argument("--sigma", type=float, default=None)
    g.add_argument("--lt-p", default=None, help="linear-transverse P (complex scalar)")
    g.add_argument("--lt-pbar", default=None, help="linear-transverse Pbar (complex scalar, default 0.3)")


def _common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--threads", type=int, default=None, help=f"worker threads for sweeps (default ${THREADS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdisks", description="J-holomorphic disks and Kobayashi estimates")
    ap.add_argument("--version", action="version", version=f"pdisks {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve for a disk with a prescribed 1-jet")
    _structure_args(sp)
    _common(sp)
    sp.add_argument("--u", default=None, help="derivative at the center, e.g. 1,0")
    sp.add_argument("--p", default=None, help="center point (default origin)")
    sp.add_argument("--R-solve", dest="R_solve", type=float, default=None)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--scheme", choices=("direct", "layered"), default="direct")
    sp.add_argument("--max-iterations", type=int, default=100)
    sp.add_argument("--residual-tol", type=float, default=1e-6)
    sp.add_argument("--n-radial", type=int, default=32)
    sp.add_argument("--n-angular", type=int, default=64)
    sp.add_argument("--d-max", type=int, default=16)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("operator-check", help="Cauchy-Green identity residuals and bound estimates")
    _common(sp)
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--count", type=int, default=100, help="random polynomials for the identities")
    sp.add_argument("--degree", type=int, default=10)
    sp.add_argument("--samples", type=int, default=20, help="samples for bound estimates")
    sp.add_argument("--monomial", action="append", help="l=INT,m=INT,k=INT|inf (repeatable)")
    sp.set_defaults(func=cmd_operator_check, no_structure=True)

    for name, func, help_ in (("pseudonorm", cmd_pseudonorm, "estimate F(p, v)"),
                              ("distance", cmd_distance, "path and chain distance estimates"),
                              ("hyperbolicity", cmd_hyperbolicity, "scan F over a region")):
        sp = sub.add_parser(name, help=help_)
        _structure_args(sp)
        _common(sp)
        sp.add_argument("--tol", type=float, default=1e-2)
        sp.set_defaults(func=func)
        if name == "pseudonorm":
            sp.add_argument("--p", default=None)
            sp.add_argument("--v", required=True)
        elif name == "distance":
            sp.add_argument("--p", required=True)
            sp.add_argument("--q", required=True)
            sp.add_argument("--method", choices=("path", "chain", "both"), default="both")
            sp.add_argument("--levels", default="1,2,4,8")
            sp.add_argument("--max-chain-length", type=int, default=1)
        else:
            sp.add_argument("--region", default="full")
            sp.add_argument("--directions", type=int, default=4)
            sp.add_argument("--threshold", type=float, default=1e-3)
    return ap


def _validate(args):
    for key in ("tol", "residual_tol", "epsilon", "R", "threshold"):
        val = getattr(args, key, None)
        if val is not None and not val > 0:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    if getattr(args, "samples", 0) < 0 or getattr(args, "count", 0) < 0:
        raise UsageError("--samples and --count must be nonnegative")


def render(body: dict, table, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_sanitize(body), indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    # provenance as comment lines; the column header below is fixed per command
    for key in ("tool", "version", "command", "seed"):
        buf.write(f"# {key}: {body[key]}\n")
    buf.write("# config: " + json.dumps(_sanitize(body["config"]), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table[0])
    for row in table[1]:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        _validate(args)
        threads = args.threads if args.threads is not None else _default_threads()
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        args.workers = threads
        J = None if getattr(args, "no_structure", False) else build_structure(args)
        # BLAS reductions change order with the thread count; keep BLAS serial
        # and spend threads on independent sweep tasks instead
        with threadpool_limits(limits=1):
            body, table, code = args.func(args, J)
    except UsageError as exc:
        print(f"pdisks: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        msg = str(exc)
        if msg.startswith("no disk found") or msg.startswith("no failing radius"):
            print(f"pdisks: no disk: {msg}", file=sys.stderr)
            return EXIT_NO_DISK
        print(f"pdisks: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    doc = {"tool": "pdisks", "version": __version__, "command": args.command,
           "seed": args.seed, "config": config_echo(args), "result": body}
    text = render(doc, table, args.format)
    wall = time.perf_counter() - t0
    if args.output:
        write_atomic(args.output, text)
        meta = {"version": __version__, "command": args.command, "seed": args.seed,
                "wall_time_s": wall, "exit_code": code, "threads": threads}
        write_atomic(args.output + ".meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
