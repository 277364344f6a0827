"""Config-driven batch runner.

Usage::

    liouvillelab <verb> --config run.toml [--out DIR] [--seed N] [--threads N]

Verbs are ``classify``, ``continue``, ``solve``, ``audit``, ``integrals``,
``scaling`` and ``fit``. Each run writes CSV/text outputs plus a
``manifest.json`` holding the config hash, package versions and the
thresholds that were applied. No timestamps are written, so identical
inputs give byte-identical outputs.

Exit codes: 0 pass, 1 audit failure, 2 solver failure, 3 config error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .asymptotics import (InsufficientSpanError, MaximumOnBoundaryError, bubble_fit, error_norm_scaling,
                          error_remainder_norms, non_simple_suspected, simple_blowup_indicator,
                          weight_norm_scaling)
from .disk_spectral import DiskGrid, default_stretch, read_field_csv, write_field_csv
from .nonlinear_solver import ContinuationError, SolverConfig, SolverError, continuation_run, solve_on_branch
from .pohozaev import pohozaev_report
from .potential import Potential, diagonalize_hessian
from .reduction import DegenerateHessianError, NoBlowUpFamilyError, classify
from .special_integrals import (QuadratureSpec, field_F, integral_I, integral_J, integrate_radial_decay,
                                jacobian_F_on_axis, monte_carlo_estimates)

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

log = logging.getLogger("liouvillelab")

EXIT_OK, EXIT_AUDIT, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3

DEFAULT_XI = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0, 50.0, -50.0]


class ConfigError(ValueError):
    """Missing section, unknown key or invalid value in the run config."""


# --- config ------------------------------------------------------------------

_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"n_r", "n_theta", "stretch"}

SCHEMA = {
    "seed": None,
    "potential": {"gamma1", "gamma2", "hessian", "higher"},
    "grid": {"n_r", "n_theta", "stretch"},
    "solver": _SOLVER_KEYS,
    "quadrature": {"R", "tol", "limit"},
    "output": {"dir", "write_fields"},
    "audit": {"field", "lambda", "threshold", "applicability"},
    "solve": {"lambda"},
    "fit": {"field", "lambda"},
    "integrals": {"xi", "monte_carlo_samples", "monte_carlo_xi"},
    "scaling": {"lambdas", "weight", "error_p", "n_r", "n_theta"},
    "thresholds": {"pohozaev", "mass_rel", "normal_derivative_rel", "gradient", "indicator_variation",
                   "moment", "weight_slope", "error_slope"},
}

REQUIRED = {
    "classify": ("potential",),
    "continue": ("potential",),
    "solve": ("potential", "solve"),
    "audit": ("potential", "audit"),
    "integrals": (),
    "scaling": ("scaling",),
    "fit": ("fit",),
}

DEFAULT_THRESHOLDS = {
    "pohozaev": 1e-6,
    "mass_rel": 0.03,
    "normal_derivative_rel": 0.05,
    "gradient": 0.05,
    "indicator_variation": 2.0,
    "moment": 0.05,
    "weight_slope": 0.05,
    "error_slope": 0.05,
}


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict, command: str | None = None) -> None:
    for key, val in cfg.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown section or key '{key}'")
        allowed = SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(val, dict):
            raise ConfigError(f"'{key}' must be a table")
        extra = sorted(set(val) - allowed)
        if extra:
            raise ConfigError(f"unknown key(s) in [{key}]: {', '.join(extra)}")
    if command is not None:
        missing = [s for s in REQUIRED[command] if s not in cfg]
        if missing:
            raise ConfigError(f"command '{command}' needs section(s): {', '.join(missing)}")


def build_potential(sec: dict) -> tuple[Potential, float]:
    """Potential in the Hessian eigenframe and the rotation angle used."""
    higher = {}
    for item in sec.get("higher", []):
        if len(item) != 3:
            raise ConfigError("higher terms are [i, j, coefficient] triples")
        higher[(int(item[0]), int(item[1]))] = float(item[2])
    if "hessian" in sec:
        if "gamma1" in sec or "gamma2" in sec:
            raise ConfigError("give either gamma1/gamma2 or hessian, not both")
        try:
            g1, g2, angle = diagonalize_hessian(sec["hessian"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        if "gamma1" not in sec or "gamma2" not in sec:
            raise ConfigError("[potential] needs gamma1 and gamma2, or hessian")
        g1, g2, angle = float(sec["gamma1"]), float(sec["gamma2"]), 0.0
    try:
        return Potential(g1, g2, higher), angle
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_solver_config(cfg: dict) -> SolverConfig:
    kw = dict(cfg.get("solver", {}))
    kw.update(cfg.get("grid", {}))
    try:
        return SolverConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver/grid settings: {exc}") from exc


def build_quadrature(cfg: dict) -> QuadratureSpec:
    try:
        return QuadratureSpec(**cfg.get("quadrature", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid quadrature settings: {exc}") from exc


def thresholds(cfg: dict) -> dict:
    out = dict(DEFAULT_THRESHOLDS)
    out.update({k: float(v) for k, v in cfg.get("thresholds", {}).items()})
    return out


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# --- output helpers ------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_keyvalue(path: Path, items: dict) -> Path:
    path.write_text("".join(f"{k} = {_fmt(v)}\n" for k, v in items.items()))
    return path


def write_manifest(out: Path, command: str, cfg: dict, seed: int, thr: dict, outputs: list[Path],
                   status: str) -> Path:
    files = {}
    for p in sorted(set(outputs)):
        files[str(p.relative_to(out))] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "command": command,
        "status": status,
        "seed": seed,
        "config_hash": config_hash(cfg),
        "config": cfg,
        "thresholds": thr,
        "versions": {"liouvillelab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "outputs": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _lam_tag(lam: float) -> str:
    return f"{lam:.6e}".replace("+", "")


def warn_resolution(grid: DiskGrid, lam: float) -> bool:
    """Warn when the bubble scale ``lam^(1/4)`` is under four radial spacings."""
    if lam ** 0.25 < 4.0 * grid.min_radial_spacing:
        warnings.warn(f"lam={lam:g}: bubble scale {lam ** 0.25:.3e} is below 4x the minimum radial spacing "
                      f"{grid.min_radial_spacing:.3e}; refine the grid", RuntimeWarning, stacklevel=2)
        return True
    return False


# --- commands ----------------------------------------------------------------

def cmd_classify(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    V, angle = build_potential(cfg["potential"])
    try:
        c = classify(V)
    except DegenerateHessianError as exc:
        raise ConfigError(str(exc)) from exc
    items = {"gamma1": V.gamma1, "gamma2": V.gamma2, "rotation_angle": angle, "exists": c.exists,
             "ratio": c.ratio if c.ratio is not None else "undefined",
             "b1_sign": c.b1_sign if c.b1_sign is not None else "none",
             "b_tilde_star": c.b_tilde_star if c.b_tilde_star is not None else "none",
             "summary": c.summary()}
    print(c.summary())
    print(f"eigenframe gammas ({V.gamma1:.12g}, {V.gamma2:.12g}), rotation angle {angle:.12g}")
    return EXIT_OK, [write_keyvalue(out / "classification.txt", items)]


def _audit_row(res, V: Potential, thr: dict, pred_b: complex | None):
    rep = pohozaev_report(res.field, res.lam, V, threshold=thr["pohozaev"])
    ind = simple_blowup_indicator(res.field, res.lam)
    b_fit = res.b_fit if res.b_fit is not None else complex("nan")
    gap = abs(b_fit - pred_b) / np.sqrt(res.lam) if pred_b is not None else float("nan")
    dmin, dmax = rep.boundary_normal_derivative_range
    r = rep.residuals
    row = [res.lam, float(res.field.max()), rep.mass, b_fit.real, b_fit.imag, res.b_reduction.real,
           res.b_reduction.imag, gap, ind, res.tau, res.fit_sup_err, res.newton_iterations,
           res.final_residual_norm, rep.gradient_at_origin[0], rep.gradient_at_origin[1], dmin, dmax,
           rep.moments[0], rep.moments[1], rep.vanishing[0], rep.vanishing[1],
           r["gradient_x1"], r["gradient_x2"], r["pair_diff"], r["pair_mixed"], rep.passes()]
    return row, rep


BRANCH_HEADER = ["lambda", "max_v", "mass", "b_fit_re", "b_fit_im", "b_red_re", "b_red_im", "normalized_gap",
                 "indicator", "tau", "fit_sup_err", "newton_iterations", "residual", "grad0_x1", "grad0_x2",
                 "dnu_min", "dnu_max", "moment_diff", "moment_mixed", "m1", "m2",
                 "pohozaev_gradient_x1", "pohozaev_gradient_x2", "pohozaev_pair_diff", "pohozaev_pair_mixed",
                 "audit_pass"]


def branch_checks(rows: list[list], thr: dict) -> dict:
    """End-of-branch diagnostics, each a (value, passed) pair."""
    col = {h: np.array([r[i] for r in rows], dtype=float) for i, h in enumerate(BRANCH_HEADER)}
    lam = col["lambda"]
    mass_err = abs(col["mass"][-1] - 16 * np.pi) / (16 * np.pi)
    dn_err = max(abs(col["dnu_min"][-1] + 8), abs(col["dnu_max"][-1] + 8)) / 8
    grad = max(abs(col["grad0_x1"][-1]), abs(col["grad0_x2"][-1]))
    window = lam <= lam.min() * 100.0
    variation = float(np.ptp(col["indicator"][window]))
    moment = max(abs(col["moment_diff"][-1]), abs(col["moment_mixed"][-1]))
    poh = float(np.abs(np.stack([col[h] for h in BRANCH_HEADER if h.startswith("pohozaev")])).max())
    return {
        "mass_rel_error": (mass_err, mass_err <= thr["mass_rel"]),
        "normal_derivative_rel_error": (dn_err, dn_err <= thr["normal_derivative_rel"]),
        "gradient_at_origin": (grad, grad <= thr["gradient"]),
        "indicator_variation": (variation, variation <= thr["indicator_variation"]),
        "final_moment": (moment, moment <= thr["moment"]),
        "max_pohozaev_residual": (poh, poh <= thr["pohozaev"]),
        "non_simple_suspected": (float(non_simple_suspected(lam, col["indicator"],
                                                            thr["indicator_variation"])), True),
    }


def cmd_continue(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    V, angle = build_potential(cfg["potential"])
    scfg = build_solver_config(cfg)
    thr = thresholds(cfg)
    write_fields = bool(cfg.get("output", {}).get("write_fields", True))
    c = classify(V)
    if not c.exists:
        print(c.summary())
        raise SolverError(f"no concentrating family for gammas {V.gammas}")
    pred = c.b_tilde_star
    grid = scfg.grid()
    warn_resolution(grid, scfg.lambda_end)
    fdir = out / "fields"
    outputs: list[Path] = []
    rows, reports = [], []

    def on_step(res):
        row, rep = _audit_row(res, V, thr, np.sqrt(res.lam / 32.0) * pred)
        rows.append(row)
        reports.append(rep)
        if write_fields:
            fdir.mkdir(exist_ok=True)
            outputs.append(write_field_csv(res.field, fdir / f"v_lambda_{_lam_tag(res.lam)}.csv",
                                           {"lambda": res.lam, "potential": V.to_dict()}))

    status = EXIT_OK
    failure = None
    try:
        continuation_run(V, scfg, on_step=on_step)
    except ContinuationError as exc:
        failure, status = str(exc), EXIT_SOLVER
        print(f"FAILED: {exc}", file=sys.stderr)
    outputs.append(write_csv(out / "branch.csv", BRANCH_HEADER, rows))
    summary = {"gamma1": V.gamma1, "gamma2": V.gamma2, "rotation_angle": angle, "classification": c.summary(),
               "steps": len(rows)}
    if failure is not None:
        summary["failure"] = failure
    if rows:
        checks = branch_checks(rows, thr)
        for k, (val, ok) in checks.items():
            summary[k] = val
            summary[f"{k}_pass"] = ok
        if status == EXIT_OK and not (all(ok for _, ok in checks.values()) and all(r.passes() for r in reports)):
            status = EXIT_AUDIT
    outputs.append(write_keyvalue(out / "summary.txt", summary))
    for k, v in summary.items():
        print(f"{k} = {_fmt(v)}")
    return status, outputs


def cmd_solve(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    V, _ = build_potential(cfg["potential"])
    lam = float(cfg["solve"]["lambda"])
    scfg = build_solver_config(cfg)
    thr = thresholds(cfg)
    if not classify(V).exists:
        raise SolverError(f"no concentrating family for gammas {V.gammas}")
    stretch = scfg.stretch if scfg.stretch is not None else default_stretch(lam)
    grid = DiskGrid(scfg.n_r, scfg.n_theta, stretch)
    warn_resolution(grid, lam)
    res, outer = solve_on_branch(lam, V, scfg, grid)
    if not res.converged:
        raise SolverError(f"Newton polish did not converge at lam={lam:g} (residual {res.final_residual_norm:.2e})")
    row, rep = _audit_row(res, V, thr, np.sqrt(lam / 32.0) * classify(V).b_tilde_star)
    outputs = [write_field_csv(res.field, out / f"v_lambda_{_lam_tag(lam)}.csv",
                               {"lambda": lam, "potential": V.to_dict()}),
               write_csv(out / "solution.csv", BRANCH_HEADER, [row])]
    outputs += list(rep.write(out / "audit"))
    print(f"lambda = {lam:.6e}  max v = {res.field.max():.10f}  b = {outer.b.real:.10e}{outer.b.imag:+.3e}j  "
          f"residual = {res.final_residual_norm:.2e}  audit = {'PASS' if rep.passes() else 'FAIL'}")
    return (EXIT_OK if rep.passes() else EXIT_AUDIT), outputs


def cmd_audit(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    V, _ = build_potential(cfg["potential"])
    sec = cfg["audit"]
    if "field" not in sec:
        raise ConfigError("[audit] needs 'field'")
    try:
        v, meta = read_field_csv(sec["field"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read field file: {exc}") from exc
    lam = float(sec.get("lambda", meta.get("lambda", float("nan"))))
    if not lam > 0:
        raise ConfigError("lambda missing from [audit] and from the field metadata")
    thr = thresholds(cfg)
    rep = pohozaev_report(v, lam, V, threshold=float(sec.get("threshold", thr["pohozaev"])),
                          applicability=float(sec.get("applicability", 1e-6)))
    outputs = list(rep.write(out / "audit"))
    for name, r in rep.residuals.items():
        print(f"{name}: residual {r:.3e}")
    for flag in rep.flags:
        print(f"FLAG: {flag}")
    return (EXIT_OK if rep.passes() else EXIT_AUDIT), outputs


def cmd_integrals(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    q = build_quadrature(cfg)
    sec = cfg.get("integrals", {})
    xis = [float(x) for x in sec.get("xi", DEFAULT_XI)]
    rows = []
    for xi in xis:
        F = field_F(xi, q)
        D = jacobian_F_on_axis(xi, q)
        rows.append([xi, integral_I(xi, q), integral_J(xi, q), F[0], F[1], float(np.linalg.det(D)),
                     D[0, 0], D[0, 1], D[1, 0], D[1, 1]])
    outputs = [write_csv(out / "integrals.csv", ["xi1", "I", "J", "F1", "F2", "det_DF", "DF11", "DF12", "DF21",
                                                 "DF22"], rows)]

    b1 = integrate_radial_decay(lambda x1, x2: (1 + x1**2 + x2**2) ** -2.0, 0.0, q, decay=4.0).value
    b2 = integrate_radial_decay(lambda x1, x2: x1**2 * (1 + x1**2 + x2**2) ** -3.0, 0.0, q, decay=4.0).value
    checks = {}
    checks["benchmark_pi"] = (b1 - np.pi, abs(b1 - np.pi) <= 1e-8)
    checks["benchmark_pi_over_4"] = (b2 - np.pi / 4, abs(b2 - np.pi / 4) <= 1e-8)
    checks["I_at_zero"] = (integral_I(0.0, q), integral_I(0.0, q) == 0.0)
    odd = max(abs(integral_I(x, q) + integral_I(-x, q)) + abs(integral_J(x, q) + integral_J(-x, q))
              for x in (0.5, 1.0, 2.0))
    checks["oddness"] = (odd, odd <= 1e-9)
    lim = integral_I(50.0, q) / np.pi - 1
    checks["I_limit_pi"] = (lim, abs(lim) <= 0.02)
    quarter = max(abs(integral_J(x, q) - integral_I(x, q) / 4) for x in (0.3, 1.0, 3.0))
    checks["J_equals_I_over_4"] = (quarter, quarter <= 1e-7)
    grid = np.linspace(-5, 5, 20)
    jv = np.array([integral_J(x, q) for x in grid])
    checks["J_increasing"] = (float(np.diff(jv).min()), bool(np.all(np.diff(jv) > 0)))
    dets = [float(np.linalg.det(jacobian_F_on_axis(x, q))) for x in (0.0, 0.5, 1.0, 2.0)]
    checks["det_DF_positive"] = (min(dets), min(dets) > 0)

    print(f"benchmark int (1+|z|^2)^-2        = {b1:.15f}  error {b1 - np.pi:+.2e}")
    print(f"benchmark int z1^2 (1+|z|^2)^-3   = {b2:.15f}  error {b2 - np.pi / 4:+.2e}")
    for k, (val, ok) in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {k}: {val:.3e}")
    summary = {k: v for k, (v, _) in checks.items()}
    summary.update({f"{k}_pass": ok for k, (_, ok) in checks.items()})

    n_mc = int(sec.get("monte_carlo_samples", 0))
    if n_mc > 0:
        mc = monte_carlo_estimates(n_mc, seed=seed, xi=float(sec.get("monte_carlo_xi", 1.0)))
        mrows = [[name, mean, se] for name, (mean, se) in mc.items()]
        outputs.append(write_csv(out / "monte_carlo.csv", ["quantity", "mean", "standard_error"], mrows))
    outputs.append(write_keyvalue(out / "checks.txt", summary))
    return (EXIT_OK if all(ok for _, ok in checks.values()) else EXIT_AUDIT), outputs


def cmd_scaling(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    sec = cfg["scaling"]
    thr = thresholds(cfg)
    lams = [float(x) for x in sec.get("lambdas", np.logspace(-1, -4, 7))]
    n_r, n_theta = int(sec.get("n_r", 128)), int(sec.get("n_theta", 128))
    outputs, ok_all = [], True
    rows = []
    try:
        for s, p in sec.get("weight", []):
            fit = weight_norm_scaling(float(s), float(p), lams, n_r=n_r, n_theta=n_theta)
            ok = fit.matches(thr["weight_slope"])
            outputs.append(fit.to_csv(out / f"weight_s{float(s):g}_p{float(p):g}.csv"))
            rows.append([fit.label, fit.slope, fit.theory, fit.r2, fit.max_deviation, ok])
            ok_all &= ok
        if "error_p" in sec:
            if "potential" not in cfg:
                raise ConfigError("error_p needs a [potential] section")
            V, _ = build_potential(cfg["potential"])
            for p in sec["error_p"]:
                fit = error_norm_scaling(float(p), V, lams, n_r=n_r, n_theta=n_theta)
                ok = fit.at_least(thr["error_slope"])
                outputs.append(fit.to_csv(out / f"error_p{float(p):g}.csv"))
                rows.append([fit.label, fit.slope, fit.theory, fit.r2, fit.max_deviation, ok])
                ok_all &= ok
            full, rem = error_remainder_norms(V, lams, n_r=n_r, n_theta=n_theta)
            outputs.append(write_csv(out / "error_leading_term.csv", ["lambda", "R_l1", "remainder_l1"],
                                     [[a, b, c] for a, b, c in zip(lams, full, rem)]))
    except InsufficientSpanError as exc:
        raise ConfigError(str(exc)) from exc
    outputs.append(write_csv(out / "scaling_summary.csv", ["study", "slope", "theory", "r2", "max_deviation",
                                                           "pass"], rows))
    for r in rows:
        print(f"{'PASS' if r[-1] else 'FAIL'} {r[0]}: slope {r[1]:.4f} (theory {r[2]:.4f}, r2 {r[3]:.5f})")
    return (EXIT_OK if ok_all else EXIT_AUDIT), outputs


def cmd_fit(cfg: dict, out: Path, seed: int) -> tuple[int, list[Path]]:
    sec = cfg["fit"]
    if "field" not in sec:
        raise ConfigError("[fit] needs 'field'")
    try:
        v, meta = read_field_csv(sec["field"])
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read field file: {exc}") from exc
    lam = float(sec.get("lambda", meta.get("lambda", float("nan"))))
    if not lam > 0:
        raise ConfigError("lambda missing from [fit] and from the field metadata")
    V = build_potential(cfg["potential"])[0] if "potential" in cfg else None
    try:
        tau, b, err = bubble_fit(v, lam, V)
    except MaximumOnBoundaryError as exc:
        print(f"FAIL: {exc}")
        return EXIT_AUDIT, []
    items = {"lambda": lam, "tau": tau, "b_re": b.real, "b_im": b.imag, "sup_err": err,
             "indicator": simple_blowup_indicator(v, lam)}
    for k, val in items.items():
        print(f"{k} = {_fmt(val)}")
    return EXIT_OK, [write_keyvalue(out / "fit.txt", items)]


COMMANDS = {
    "classify": cmd_classify,
    "continue": cmd_continue,
    "solve": cmd_solve,
    "audit": cmd_audit,
    "integrals": cmd_integrals,
    "scaling": cmd_scaling,
    "fit": cmd_fit,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liouvillelab", description="Concentrating solutions of a singular "
                                 "Liouville problem on the unit disk: solvers, audits and scaling studies.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: [output] dir or ./out)")
    ap.add_argument("--seed", type=int, default=None, help="seed for Monte-Carlo oracles (u64)")
    ap.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        validate_config(cfg, args.command)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        out = args.out or Path(cfg.get("output", {}).get("dir", "out"))
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def run():
        return COMMANDS[args.command](cfg, out, seed)

    try:
        if args.threads is not None:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=args.threads):
                status, outputs = run()
        else:
            status, outputs = run()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NoBlowUpFamilyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        write_manifest(out, args.command, cfg, seed, thresholds(cfg), [], "solver_failure")
        return EXIT_SOLVER
    labels = {EXIT_OK: "pass", EXIT_AUDIT: "audit_failure", EXIT_SOLVER: "solver_failure"}
    write_manifest(out, args.command, cfg, seed, thresholds(cfg), outputs, labels[status])
    return status


if __name__ == "__main__":
    sys.exit(main())
