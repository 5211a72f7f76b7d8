"""Command-line entry point: ``gibbs-burnin {certify,bound,optimize,validate,simulate}``.

Every command writes its artifacts under ``--out`` and prints a short summary.
Exit status is 0 on success, 1 if a validation property failed and 2 on a
configuration or certification error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .bounds import (
    RosenthalInputs,
    certificate_from_curve,
    dksc_applicable,
    dksc_curve,
    grid_search,
    rosenthal_curve,
    solve_n_star,
)
from .config import RunConfig, load_config, parse_model_flag
from .drift import build_drift, verify_drift_identity
from .errors import CertificationError, InfeasibleSearchError, UselessBoundWarning
from .minorization import Ar1Law, build_minorization, check_domination
from .models import moment_constants
from .oracle import exact_tv_to_stationarity, simulate_chain

log = logging.getLogger("gibbs_burnin")

DRIFT_X_GRID = (-3.0, -1.0, 0.0, 1.0, 3.0)


def fmt_num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return "" if v is None else str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(f"{float(v):.9g}")
        return v if math.isfinite(v) else str(v)
    return v


def write_table(path: Path, header, rows, fmt: str) -> Path:
    path = path.with_suffix(".csv" if fmt == "csv" else ".jsonl")
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt_num(v) for v in row])
        else:
            for row in rows:
                fh.write(json.dumps({k: _json_value(v) for k, v in zip(header, row)}) + "\n")
    return path


def write_record(path: Path, record: dict) -> Path:
    clean = {k: (_json_value(v) if not isinstance(v, dict) else {kk: _json_value(vv) for kk, vv in v.items()})
             for k, v in record.items()}
    path.write_text(json.dumps(clean, indent=2) + "\n")
    return path


def _epsilon_for(cfg: RunConfig, w: float) -> float:
    if cfg.epsilon is not None:
        return cfg.epsilon
    law = Ar1Law.from_model(cfg.model)
    return build_minorization(law, build_drift(moment_constants(cfg.model)).u, w).eps


def _rosenthal_parameters(cfg: RunConfig):
    """``(r, gamma, w)`` from the config, or from a default grid search."""
    if cfg.pinned:
        return cfg.r, cfg.gamma, cfg.w, "config"
    res = grid_search(cfg.model, cfg.x0, cfg.omega, epsilon=cfg.epsilon)
    return res.inputs.r, res.inputs.gamma, res.inputs.w, "grid search"


def _rosenthal(cfg: RunConfig):
    r, gamma, w, source = _rosenthal_parameters(cfg)
    drift = build_drift(moment_constants(cfg.model), gamma)
    inputs = RosenthalInputs(r, gamma, drift.L, w, _epsilon_for(cfg, w), float(drift.V(cfg.x0)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UselessBoundWarning)
        curve = rosenthal_curve(inputs)
    for wrn in caught:
        log.warning("%s", wrn.message)
    return curve, source


# ---------------------------------------------------------------- commands

def cmd_certify(cfg: RunConfig) -> int:
    mc = moment_constants(cfg.model)
    drift = build_drift(mc, cfg.gamma)
    record = {"model": cfg.model.describe(), "moments": mc.as_dict(), "drift": drift.as_dict()}
    lines = [
        f"model      {cfg.model.describe()}",
        f"u          {fmt_num(drift.u)}",
        f"ch         {fmt_num(drift.ch)}",
        f"gamma      {fmt_num(drift.gamma)}",
        f"L          {fmt_num(drift.L)}",
        f"threshold  2L/(1-gamma) = {fmt_num(drift.threshold)}",
    ]
    if drift.negative_constant:
        lines.append("warning    L < 0")
    w = cfg.w
    if cfg.model.family == "gaussian":
        if w is None:
            res = grid_search(cfg.model, cfg.x0, cfg.omega)
            w, drift = res.inputs.w, drift.with_gamma(res.inputs.gamma)
            record["drift"] = drift.as_dict()
            lines[3] = f"gamma      {fmt_num(drift.gamma)} (grid search)"
            lines[5] = f"threshold  2L/(1-gamma) = {fmt_num(drift.threshold)}"
        minor = build_minorization(Ar1Law.from_model(cfg.model), drift.u, w)
        record["minorization"] = minor.as_dict()
        lines += [f"w          {fmt_num(w)}", f"eps        {fmt_num(minor.eps)}"]
    elif cfg.epsilon is not None:
        record["minorization"] = {"w": w, "eps": cfg.epsilon, "source": "user"}
        lines.append(f"eps        {fmt_num(cfg.epsilon)} (user supplied)")
    else:
        lines.append("eps        none (no built-in minorization for this family)")
    if w is not None:
        feasible = w > drift.threshold
        record["feasible"] = feasible
        lines.append(f"feasible   w > 2L/(1-gamma): {fmt_num(feasible)}")
    summary = "\n".join(lines) + "\n"
    write_record(cfg.out / "certificate.json", record)
    (cfg.out / "summary.txt").write_text(summary)
    sys.stdout.write(summary)
    if w is not None and not record["feasible"]:
        log.error("w = %s does not exceed 2L/(1-gamma) = %s", w, drift.threshold)
        return 2
    return 0


def cmd_bound(cfg: RunConfig) -> int:
    curve, source = _rosenthal(cfg)
    dksc = dksc_curve(cfg.x0, cfg.model) if dksc_applicable(cfg.model) else None
    exact = cfg.model.family == "gaussian"
    header = ["l", "rosenthal"] + (["dksc"] if dksc else []) + (["exact_tv"] if exact else [])
    rows = []
    exact_vals = []
    for l in range(1, cfg.lmax + 1):
        row = [l, curve(l)]
        if dksc:
            row.append(dksc(l))
        if exact:
            tv = exact_tv_to_stationarity(cfg.model, cfg.x0, l)
            exact_vals.append(tv)
            row.append(tv)
        rows.append(row)
    path = write_table(cfg.out / "curve", header, rows, cfg.fmt)

    report = {"omega": cfg.omega, "x0": cfg.x0, "parameters": source, **curve.as_dict()}
    report["rosenthal_n_star"] = solve_n_star(curve, cfg.omega)
    if dksc:
        report["dksc_n_star"] = solve_n_star(dksc, cfg.omega)
    else:
        report["dksc"] = "not applicable (needs gaussian, nu = 0, sigma2 + tau2 = 1/2)"
    if exact:
        hits = [l for l, tv in enumerate(exact_vals, 1) if tv <= cfg.omega]
        report["exact_n_star"] = hits[0] if hits else None
    cert = certificate_from_curve(curve) if curve.decays else None
    if cert is not None:
        report["M0"], report["t"] = cert.m0, cert.t
    write_record(cfg.out / "report.json", report)
    print(f"rosenthal n* = {report['rosenthal_n_star']}  "
          f"(base1={fmt_num(curve.base1)}, base2={fmt_num(curve.base2)}, coeff={fmt_num(curve.coeff)})")
    print(f"dksc n* = {report['dksc_n_star']}" if dksc else f"dksc: {report['dksc']}")
    if exact:
        print(f"exact n* = {report['exact_n_star']}")
    print(f"wrote {path}")
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    for key in ("grid_r", "grid_gamma", "grid_w"):
        grid = getattr(cfg, key)
        if grid is not None and len(grid) == 0:
            raise InfeasibleSearchError(f"{key} is empty")
    res = grid_search(
        cfg.model, cfg.x0, cfg.omega, cfg.grid_r, cfg.grid_gamma, cfg.grid_w, epsilon=cfg.epsilon
    )
    write_record(cfg.out / "optimum.json", res.as_dict())
    fields = [f.name for f in dataclasses.fields(type(res.trace[0]))]
    path = write_table(
        cfg.out / "trace", fields, [[getattr(e, f) for f in fields] for e in res.trace], cfg.fmt
    )
    i = res.inputs
    print(f"n* = {res.n_star}  bound = {fmt_num(res.bound)}")
    print(f"r = {fmt_num(i.r)}  gamma = {fmt_num(i.gamma)}  w = {fmt_num(i.w)}  eps = {fmt_num(i.eps)}")
    print(f"wrote {path}")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    model = cfg.model
    drift = build_drift(moment_constants(model), cfg.gamma)
    rng = np.random.default_rng(cfg.seed)
    rows = []

    if model.family == "beta_binomial":
        x_grid = range(model["n"] + 1)
    elif model.family == "poisson_gamma":
        x_grid = (0.0, 1.0, 3.0, 10.0)
    else:
        x_grid = tuple(drift.u + x for x in DRIFT_X_GRID)
    for chk in verify_drift_identity(model, drift, x_grid, cfg.samples, rng):
        margin = abs(chk.estimate - chk.predicted) if chk.exact else abs(chk.zscore)
        rows.append(["drift_identity", chk.x, chk.passed(), margin,
                     "exact" if chk.exact else "zscore"])

    if model.family == "gaussian":
        law = Ar1Law.from_model(model)
        r, gamma, w, _ = _rosenthal_parameters(cfg)
        cert = build_minorization(law, drift.u, w)
        cert = dataclasses.replace(cert, eps=cert.eps * cfg.eps_scale)
        xs = drift.u + np.linspace(-cert.radius, cert.radius, 201)
        ys = law.rho * drift.u + law.offset + np.linspace(-6.0, 6.0, 401) * math.sqrt(law.stationary_variance / 0.5)
        rep = check_domination(cert, law, xs, ys)
        rows.append(["domination", rep.x, rep.passed, rep.margin, f"y={fmt_num(rep.y)}"])

        curve, _ = _rosenthal(dataclasses.replace(cfg, r=r, gamma=gamma, w=w))
        dksc = dksc_curve(cfg.x0, model) if dksc_applicable(model) else None
        for l in range(1, min(cfg.lmax, 50) + 1):
            tv = exact_tv_to_stationarity(model, cfg.x0, l)
            ok = True
            upper = curve(l)
            if dksc is not None:
                ok = tv <= dksc(l)
                if upper < 1:
                    ok = ok and dksc(l) <= upper
                upper = dksc(l)
            elif upper < 1:
                ok = tv <= upper
            rows.append(["sandwich", l, ok, upper - tv, "dksc" if dksc is not None else "rosenthal"])

    path = write_table(cfg.out / "validate", ["property", "at", "passed", "margin", "detail"],
                       rows, cfg.fmt)
    failed = [row for row in rows if not row[2]]
    for name in dict.fromkeys(row[0] for row in rows):
        group = [row for row in rows if row[0] == name]
        n_bad = sum(not row[2] for row in group)
        print(f"{name:15s} {'FAIL' if n_bad else 'pass'}  ({len(group) - n_bad}/{len(group)})")
    print(f"wrote {path}")
    return 1 if failed else 0


def cmd_simulate(cfg: RunConfig) -> int:
    path = simulate_chain(cfg.model, cfg.x0, cfg.length, cfg.seed)
    out = cfg.out / "path.csv"
    with open(out, "w", newline="") as fh:
        path.write_csv(fh)
    print(f"mean = {fmt_num(float(path.samples.mean()))}  var = {fmt_num(float(path.samples.var()))}")
    print(f"wrote {out}")
    return 0


COMMANDS = {
    "certify": cmd_certify,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "validate": cmd_validate,
    "simulate": cmd_simulate,
}

_FLAGS = {
    "x0": "start point", "omega": "target total-variation distance", "seed": "RNG seed",
    "out": "output directory", "lmax": "largest l in curve tables",
    "grid-r": "r grid", "grid-gamma": "gamma grid", "grid-w": "w grid",
    "format": "table format: csv or jsonl", "r": "Rosenthal r", "gamma": "drift rate",
    "w": "small-set parameter", "epsilon": "minorization mass (non-gaussian families)",
    "eps-scale": "multiply eps before the domination check",
    "samples": "Monte Carlo draws per drift grid point", "length": "chain length for simulate",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbs-burnin", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--model", help="e.g. gaussian:nu=0,sigma2=0.25,tau2=0.25")
        for flag, helptext in _FLAGS.items():
            p.add_argument(f"--{flag}", help=helptext)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {}
    if args.model:
        overrides.update(parse_model_flag(args.model))
    for flag in _FLAGS:
        value = getattr(args, flag.replace("-", "_"))
        if value is not None:
            overrides[flag.replace("-", "_")] = value
    try:
        cfg = load_config(args.config, overrides)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except (CertificationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
