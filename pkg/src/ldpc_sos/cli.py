"""Command-line front end.

    ldpc-sos design-lambda --epsilon 0.3 --rho 6:1.0 --max-vdeg 10
    ldpc-sos threshold --lambda 3:1.0 --rho 6:1.0
    ldpc-sos joint-mac --config example1.json --format csv
    ldpc-sos validate --result r.json --grid 100000

Degree distributions use ``degree:coeff[,degree:coeff...]`` on the command
line; a JSON config file may give them either that way or as
``{"degree": coeff}`` maps.  Flags override config values.

Exit codes: 0 success, 1 infeasible, 2 bad input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from decimal import ROUND_HALF_EVEN, Decimal

from . import __version__
from .density_evolution import bec_margin, check_feasibility_grid, de_recursion_bec, threshold_bec
from .design import (
    VALIDATION_GRID,
    VALIDATION_TOL,
    DesignResult,
    optimize_lambda_bec,
    optimize_lambda_bsc,
    optimize_rho_bec,
    validate_design,
)
from .errors import DesignError, Infeasible, InputError, ParamOutOfRange
from .joint import FIXED, OPTIMIZE, JointDesignResult, JointDesignSpec, design_joint_mac, sweep_joint_mac
from .polynomials import CHECK, VARIABLE, DegreeDistribution, from_degree_map, parse_degree_spec

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

COMMANDS = ("design-lambda", "design-rho", "design-lambda-bsc", "threshold", "joint-mac", "validate")
DIST_KINDS = {"rho": CHECK, "lambda": VARIABLE, "rho1": CHECK, "rho2": CHECK,
              "lambda1": VARIABLE, "lambda2": VARIABLE}

COMMON = {"tol", "max_iter", "grid_size", "output"}
REQUIRED = {
    "design-lambda": {"epsilon", "rho", "max_vdeg"},
    "design-rho": {"epsilon", "lambda", "max_cdeg"},
    "design-lambda-bsc": {"p_crossover", "rho", "max_vdeg"},
    "threshold": {"lambda", "rho"},
    "joint-mac": {"epsilon1", "epsilon2", "correlation_p", "rho1", "rho2", "lambda2"},
    "validate": {"result"},
}
OPTIONAL = {
    "design-lambda": COMMON,
    "design-rho": COMMON,
    "design-lambda-bsc": COMMON,
    "threshold": {"bisect_tol", "max_iter", "output"},
    "joint-mac": COMMON | {"lambda1", "lambda1_mode", "dv1_list", "format"},
    "validate": {"grid_size", "tol", "output"},
}


class ConfigError(InputError):
    """Unknown, missing or out-of-range configuration entry."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    epsilon: float | None = None
    epsilon1: float | None = None
    epsilon2: float | None = None
    p_crossover: float | None = None
    correlation_p: float | None = None
    rho: str | None = None
    lambda_: str | None = None
    rho1: str | None = None
    rho2: str | None = None
    lambda1: str | None = None
    lambda2: str | None = None
    lambda1_mode: str | None = None
    max_vdeg: int | None = None
    max_cdeg: int | None = None
    dv1_list: tuple | None = None
    tol: float | None = None
    max_iter: int | None = None
    grid_size: int | None = None
    bisect_tol: float | None = None
    result: str | None = None
    output: str | None = None
    format: str | None = None

    def present(self) -> dict:
        """Set fields keyed by their external names (``lambda``, not ``lambda_``)."""
        return {_external(f.name): getattr(self, f.name) for f in fields(self)
                if f.name != "command" and getattr(self, f.name) is not None}

    def echo(self) -> dict:
        out = {"command": self.command}
        for k, v in sorted(self.present().items()):
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def dist(self, key: str) -> DegreeDistribution:
        return parse_degree_spec(self.present()[key], DIST_KINDS[key])


def _external(name: str) -> str:
    return "lambda" if name == "lambda_" else name


def _internal(name: str) -> str:
    return "lambda_" if name == "lambda" else name


KNOWN = {_external(f.name) for f in fields(RunConfig)} - {"command"}


# -- parsing --------------------------------------------------------------------


def _canonical_dist(key: str, value) -> str:
    if isinstance(value, dict):
        d = from_degree_map(DIST_KINDS[key], {int(k): float(v) for k, v in value.items()})
    elif isinstance(value, str):
        d = parse_degree_spec(value, DIST_KINDS[key])
    else:
        raise ConfigError(f"{key}: expected a degree map or 'degree:coeff' string")
    return ",".join(f"{deg}:{d.weights[deg]!r}" for deg in d.degrees)


def _coerce(key: str, value):
    try:
        if key in DIST_KINDS:
            return _canonical_dist(key, value)
        if key in ("max_vdeg", "max_cdeg", "max_iter", "grid_size"):
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError
            return int(value)
        if key == "dv1_list":
            if isinstance(value, str):
                value = _parse_int_list(value)
            return tuple(sorted({int(v) for v in value}))
        if key in ("result", "output", "format", "lambda1_mode"):
            return str(value)
        return float(value)
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r}") from exc


def _parse_int_list(text: str) -> list[int]:
    """``"5,6,7"`` or ``"5..11"`` or a mix."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _check_ranges(cfg: RunConfig) -> None:
    v = cfg.present()

    def need(cond, msg):
        if not cond:
            raise ParamOutOfRange(msg)

    for k in ("epsilon", "epsilon1", "epsilon2"):
        if k in v:
            need(0.0 < v[k] < 1.0, f"{k}={v[k]} not in (0, 1)")
    if "p_crossover" in v:
        need(0.0 < v["p_crossover"] < 0.5, f"p_crossover={v['p_crossover']} not in (0, 0.5)")
    if "correlation_p" in v:
        need(0.5 < v["correlation_p"] <= 1.0, f"correlation_p={v['correlation_p']} not in (0.5, 1]")
    for k in ("max_vdeg", "max_cdeg"):
        if k in v:
            need(v[k] >= 2, f"{k} must be >= 2")
    if "dv1_list" in v:
        need(len(v["dv1_list"]) > 0 and min(v["dv1_list"]) >= 2, "dv1_list needs degrees >= 2")
    if "grid_size" in v:
        need(v["grid_size"] >= 100, "grid_size must be >= 100")
    if "tol" in v:
        need(0.0 < v["tol"] < 1e-2, "tol must be in (0, 1e-2)")
    if "max_iter" in v:
        need(v["max_iter"] >= 1, "max_iter must be >= 1")
    if "bisect_tol" in v:
        need(1e-8 <= v["bisect_tol"] < 0.5, "bisect_tol must be in [1e-8, 0.5)")
    if "lambda1_mode" in v:
        need(v["lambda1_mode"] in (FIXED, OPTIMIZE), f"lambda1_mode must be {FIXED} or {OPTIMIZE}")
    if "format" in v:
        need(v["format"] in ("json", "csv"), "format must be json or csv")
    if cfg.command == "joint-mac":
        mode = v.get("lambda1_mode", FIXED)
        if mode == FIXED and "lambda1" not in v and "dv1_list" not in v:
            raise ConfigError("joint-mac in fixed mode needs lambda1 or dv1_list")
        if mode == FIXED and "lambda1" in v and "dv1_list" in v:
            raise ConfigError("give either lambda1 or dv1_list, not both")
        if mode == OPTIMIZE and "dv1_list" not in v:
            raise ConfigError("joint-mac in optimize mode needs dv1_list")
        if mode == OPTIMIZE and "lambda1" in v:
            raise ConfigError("lambda1 is not used in optimize mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpc-sos", description="SOS-certified LDPC degree-distribution design")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with option values (flags take precedence)")
        allowed = REQUIRED[name] | OPTIONAL[name]
        for key in sorted(allowed):
            flag = "--" + key.replace("_", "-")
            extra = ["--grid"] if key == "grid_size" else []
            p.add_argument(flag, *extra, dest=_internal(key), default=None, metavar=key.upper())
    return parser


def parse_args_and_config(argv=None) -> RunConfig:
    """Merge a JSON config file with command-line flags into a validated ``RunConfig``."""
    ns = build_parser().parse_args(argv)
    command = ns.command
    merged: dict = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        if "command" in raw and raw.pop("command") != command:
            raise ConfigError("config file command does not match the subcommand")
        unknown = sorted(set(raw) - KNOWN)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(raw)
    for key in KNOWN:
        v = getattr(ns, _internal(key), None)
        if v is not None:
            merged[key] = v

    allowed = REQUIRED[command] | OPTIONAL[command]
    extra = sorted(set(merged) - allowed)
    if extra:
        raise ConfigError(f"{command} does not take: {', '.join(extra)}")
    missing = sorted(REQUIRED[command] - set(merged))
    if missing:
        raise ConfigError(f"{command} is missing: {', '.join(missing)}")
    cfg = RunConfig(command, **{_internal(k): _coerce(k, v) for k, v in merged.items()})
    _check_ranges(cfg)
    return cfg


def config_to_argv(cfg: RunConfig) -> list[str]:
    """Flags that parse back to ``cfg``."""
    argv = [cfg.command]
    for key, value in sorted(cfg.present().items()):
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        argv += ["--" + key.replace("_", "-"), value if isinstance(value, str) else repr(value)]
    return argv


# -- output ----------------------------------------------------------------------


def format_sig(x: float, digits: int = 6) -> str:
    """Round to ``digits`` significant digits (half-even), printed like ``'#.6g'``."""
    if x != x or x in (float("inf"), float("-inf")):
        return str(x)
    d = Decimal(repr(float(x)))
    if d.is_zero():
        return "0." + "0" * (digits - 1)
    q = d.quantize(Decimal(1).scaleb(d.adjusted() - digits + 1), rounding=ROUND_HALF_EVEN)
    e = q.adjusted()  # may have moved up by one after rounding
    if -4 <= e < digits:
        return format(q, f".{digits - 1 - e}f")
    mant = q.scaleb(-e)
    return f"{format(mant, f'.{digits - 1}f')}e{e:+03d}"


CSV_COLUMNS = ("d_v1", "R_s1", "R_c1", "R_c2", "objective", "flags")


def emit_table(results: list[JointDesignResult], fmt: str = "csv") -> str:
    if not results:
        raise ValueError("emit_table needs at least one result")
    rows = sorted(results, key=lambda r: r.d_v1)
    if fmt == "json":
        return json.dumps([r.to_json() for r in rows], indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.d_v1, format_sig(r.Rs1), format_sig(r.Rc1), format_sig(r.Rc2),
                    format_sig(r.objective_R1_plus_R2), ";".join(r.flags)])
    return buf.getvalue()


def _document(cfg: RunConfig, results: list, validation: dict) -> dict:
    return {
        "tool_version": __version__,
        "config_echo": cfg.echo(),
        "results": results,
        "validation": validation,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- commands --------------------------------------------------------------------


def _solver_kw(cfg: RunConfig) -> dict:
    kw = {}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    if cfg.max_iter is not None:
        kw["max_iter"] = cfg.max_iter
    return kw


def _run_design(cfg: RunConfig) -> tuple[int, dict]:
    kw = _solver_kw(cfg)
    kw["grid_size"] = cfg.grid_size or VALIDATION_GRID
    if cfg.command == "design-lambda":
        res = optimize_lambda_bec(cfg.dist("rho"), cfg.epsilon, cfg.max_vdeg, **kw)
    elif cfg.command == "design-rho":
        res = optimize_rho_bec(cfg.dist("lambda"), cfg.epsilon, cfg.max_cdeg, **kw)
    else:
        res = optimize_lambda_bsc(cfg.dist("rho"), cfg.p_crossover, cfg.max_vdeg, **kw)
    report = validate_design(res, kw["grid_size"], VALIDATION_TOL)
    validation = {"feasible": report.feasible, "reports": [report.to_json()]}
    code = EXIT_OK if report.feasible else EXIT_SOLVER
    return code, _document(cfg, [res.to_json()], validation)


def _run_threshold(cfg: RunConfig) -> tuple[int, dict]:
    lam, rho = cfg.dist("lambda"), cfg.dist("rho")
    max_iter = cfg.max_iter or 10_000
    t = threshold_bec(lam, rho, cfg.bisect_tol or 1e-4, max_iter=max_iter)
    check = de_recursion_bec(lam, rho, t, max_iter) if t > 0 else None
    feasible = check is None or check.converged
    validation = {"feasible": feasible,
                  "recursion_at_threshold": None if check is None else asdict(check)}
    results = [{"lambda": lam.to_json(), "rho": rho.to_json(), "threshold": t}]
    return (EXIT_OK if feasible else EXIT_SOLVER), _document(cfg, results, validation)


def _joint_spec(cfg: RunConfig) -> JointDesignSpec:
    mode = cfg.lambda1_mode or FIXED
    return JointDesignSpec(
        epsilon1=cfg.epsilon1, epsilon2=cfg.epsilon2, correlation_p=cfg.correlation_p,
        rho1=cfg.dist("rho1"), rho2=cfg.dist("rho2"), lambda2=cfg.dist("lambda2"),
        lambda1=cfg.dist("lambda1") if cfg.lambda1 else (
            parse_degree_spec(f"{cfg.dv1_list[0]}:1", VARIABLE) if mode == FIXED else None),
        max_vdeg1=cfg.dv1_list[0] if mode == OPTIMIZE else None,
        lambda1_mode=mode,
    )


def _run_joint(cfg: RunConfig) -> tuple[int, list[JointDesignResult], dict]:
    spec = _joint_spec(cfg)
    kw = _solver_kw(cfg)
    if cfg.dv1_list:
        results = sweep_joint_mac(spec, cfg.dv1_list, **kw)
    else:
        results = [design_joint_mac(spec, **kw)]
    grid = cfg.grid_size or VALIDATION_GRID
    reports = []
    for r in results:
        rep = check_feasibility_grid(bec_margin(r.lambda1, spec.rho1, spec.epsilon1), 1.0, grid, VALIDATION_TOL)
        reports.append({"d_v1": r.d_v1, **rep.to_json()})
    feasible = all(rep["feasible"] for rep in reports)
    validation = {"feasible": feasible, "reports": reports}
    doc = _document(cfg, [r.to_json() for r in results], validation)
    return (EXIT_OK if feasible else EXIT_SOLVER), results, doc


def _load_designs(path: str) -> list[DesignResult]:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read result {path}: {exc}") from exc
    items = obj.get("results", [obj]) if isinstance(obj, dict) else obj
    try:
        return [DesignResult.from_json(it) for it in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path} does not hold design results: {exc}") from exc


def _run_validate(cfg: RunConfig) -> tuple[int, dict]:
    designs = _load_designs(cfg.result)
    grid = cfg.grid_size or VALIDATION_GRID
    tol = cfg.tol or VALIDATION_TOL
    reports = [validate_design(d, grid, tol).to_json() for d in designs]
    feasible = all(r["feasible"] for r in reports)
    for d, r in zip(designs, reports):
        if not r["feasible"]:
            log.error("%s at %g violates its constraint by %.3g at x=%.6g",
                      d.problem, d.channel_param, r["max_violation"], r["argmax_x"])
    doc = _document(cfg, [], {"feasible": feasible, "reports": reports})
    return (EXIT_OK if feasible else EXIT_INFEASIBLE), doc


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``, write the artifact, and return the exit code."""
    try:
        if cfg.command in ("design-lambda", "design-rho", "design-lambda-bsc"):
            code, doc = _run_design(cfg)
            text = _dumps(doc)
        elif cfg.command == "threshold":
            code, doc = _run_threshold(cfg)
            text = _dumps(doc)
        elif cfg.command == "joint-mac":
            code, results, doc = _run_joint(cfg)
            text = emit_table(results, "csv") if cfg.format == "csv" else _dumps(doc)
        else:
            code, doc = _run_validate(cfg)
            text = _dumps(doc)
    except InputError as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except Infeasible as exc:
        log.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except DesignError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    if code == EXIT_SOLVER:
        log.error("re-validation failed; see the validation block")
    _write(cfg, text)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = parse_args_and_config(argv)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
