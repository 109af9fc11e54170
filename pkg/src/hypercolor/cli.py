"""Command-line front door.

Seven subcommands cover the closed-form bounds, rate evaluation, the
multistart maximizer, planted-model simulations, exact-oracle checks, and
the condensation scan.  Every run emits one self-describing JSON document
(``schema: 1``) with the effective inputs (seed included), the outputs, a
``warnings`` array, and a volatile ``timestamp`` object that determinism
comparisons must strip.  CSV output is a lossy ``series,x,y`` flattening
for plotting.

Seed precedence: ``--seed`` flag, then the config file, then the
``HYPERCOLOR_SEED`` environment variable, then 0.  A JSON or TOML config
file (``--config``) supplies defaults for any long flag (underscore
spelling); explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .diagnostics import BudgetError, ProjectionError
from .maximizer import SearchConfig, condensation_witness, maximize
from .moments import ModelParams, first_moment_zero, rate, threshold_bounds
from .oracle import (
    empirical_first_moment,
    enumerate_cluster,
    enumerate_colorings,
    exact_expected_colorings,
    log_partition_function,
    partition_function,
)
from .polytope import (
    DomainTag,
    flat_overlap,
    s_stable_overlap,
    scaled_identity,
    stable_overlap,
)
from .serialize import canonical_json, matrix_from_json_dict, matrix_to_json_dict
from .simulator import (
    CoreThresholds,
    balanced_coloring,
    cluster_size_log_bound,
    extract_core,
    sample_hypergraph,
    sample_planted,
)

__all__ = ["RunConfig", "run", "main"]

COMMANDS = (
    "bounds",
    "rate",
    "maximize",
    "simulate-core",
    "simulate-cluster",
    "oracle-verify",
    "condensation-scan",
)


class _UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation: command, parameters, seed, output target."""

    command: str
    q: int | None = None
    k: int | None = None
    c: float | None = None
    n: int | None = None
    s: int | None = None
    m: int | None = None
    beta: float | None = None
    seed: int = 0
    trials: int | None = None
    starts: int | None = None
    max_steps: int | None = None
    grad_tol: float | None = None
    domain: str | None = None
    matrix: str | None = None
    tol: float | None = None
    threshold_scale: float | None = None
    budget: int | None = None
    q_grid: tuple[int, ...] | None = None
    gamma_lo: float | None = None
    gamma_hi: float | None = None
    gamma_steps: int | None = None
    output: str | None = None
    format: str = "json"
    threads: int | None = None


_DEFAULTS: dict[str, dict] = {
    "bounds": {},
    "rate": {"matrix": "flat", "c": None},
    "maximize": {
        "domain": "D",
        "starts": 200,
        "max_steps": 10_000,
        "grad_tol": 1e-10,
    },
    "simulate-core": {"trials": 1, "threshold_scale": 1.0},
    "simulate-cluster": {"threshold_scale": 1.0, "budget": 10**8},
    "oracle-verify": {"trials": 10_000, "budget": 10**8},
    "condensation-scan": {
        "q_grid": (10, 100, 1000),
        "gamma_lo": math.log(2),
        "gamma_hi": 2.0,
        "gamma_steps": 16,
    },
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "bounds": ("q", "k"),
    "rate": ("q", "k", "c"),
    "maximize": ("q", "k", "c"),
    "simulate-core": ("q", "k", "c", "n"),
    "simulate-cluster": ("q", "k", "c", "n"),
    "oracle-verify": ("n", "k", "m", "q"),
    "condensation-scan": ("k",),
}


# ---------------------------------------------------------------------------
# parsing and config merging
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage to 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hypercolor", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--config", type=str, help="JSON or TOML defaults file")
        p.add_argument("--output", type=str, help="write here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--threads", type=int)

    p = sub.add_parser("bounds", help="closed-form density thresholds")
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    common(p)

    p = sub.add_parser("rate", help="entropy/energy/rate of a named matrix")
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int)
    p.add_argument(
        "--matrix",
        type=str,
        help='one of flat, identity, stable, s-stable (with --s), or a JSON file path',
    )
    p.add_argument("--s", type=int)
    p.add_argument("--tol", type=float, help="stochasticity tolerance for file matrices")
    common(p)

    p = sub.add_parser("maximize", help="multistart search over a domain")
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--domain", choices=("D", "S", "D_s", "D_tame"))
    p.add_argument("--s", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--grad-tol", type=float)
    common(p)

    p = sub.add_parser("simulate-core", help="planted instances and their cores")
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--threshold-scale", type=float)
    common(p)

    p = sub.add_parser(
        "simulate-cluster", help="exact cluster of a tiny planted instance"
    )
    p.add_argument("--q", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--threshold-scale", type=float)
    p.add_argument("--budget", type=int)
    common(p)

    p = sub.add_parser("oracle-verify", help="exact first moment vs Monte-Carlo")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--budget", type=int)
    common(p)

    p = sub.add_parser(
        "condensation-scan", help="F(stable) - F(flat) near the upper bound"
    )
    p.add_argument("--k", type=int)
    p.add_argument("--q-grid", type=str, help="comma-separated q values")
    p.add_argument("--gamma-lo", type=float)
    p.add_argument("--gamma-hi", type=float)
    p.add_argument("--gamma-steps", type=int)
    common(p)

    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path!r}: {exc}") from exc
    try:
        if path.endswith(".toml"):
            try:
                import tomllib  # Python 3.11+
            except ModuleNotFoundError:  # pragma: no cover - version-dependent
                import tomli as tomllib
            doc = tomllib.loads(blob.decode("utf-8"))
        else:
            doc = json.loads(blob.decode("utf-8"))
    except ValueError as exc:  # JSONDecodeError and TOMLDecodeError both qualify
        raise _UsageError(f"config file {path!r} is not valid: {exc}") from exc
    if not isinstance(doc, dict):
        raise _UsageError(f"config file {path!r} must hold a table/object at top level")
    return doc


def _resolve(args: argparse.Namespace) -> RunConfig:
    command = args.command
    if command is None:
        raise _UsageError("a command is required")
    explicit = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config") and value is not None
    }
    from_file: dict = {}
    if getattr(args, "config", None):
        from_file = dict(_load_config_file(args.config))
    merged = {**_DEFAULTS.get(command, {}), **from_file, **explicit}
    if "q_grid" in merged and isinstance(merged["q_grid"], str):
        merged["q_grid"] = tuple(
            int(x) for x in merged["q_grid"].split(",") if x.strip()
        )
    elif "q_grid" in merged and merged["q_grid"] is not None:
        merged["q_grid"] = tuple(int(x) for x in merged["q_grid"])
    if "seed" not in merged:
        env = os.environ.get("HYPERCOLOR_SEED")
        merged["seed"] = int(env) if env else 0
    if "threads" not in merged or merged["threads"] is None:
        merged["threads"] = os.cpu_count() or 1
    allowed = {f.name for f in fields(RunConfig)}
    unknown = set(merged) - allowed
    if unknown:
        raise _UsageError(f"unknown config keys: {sorted(unknown)}")
    config = RunConfig(command=command, **{k: v for k, v in merged.items() if k != "command"})
    missing = [name for name in _REQUIRED[command] if getattr(config, name) is None]
    if missing:
        raise _UsageError(
            f"{command} needs --" + ", --".join(m.replace("_", "-") for m in missing)
        )
    return config


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------

def _cmd_bounds(cfg: RunConfig, rng) -> dict:
    tb = threshold_bounds(cfg.q, cfg.k)
    return {
        "classical_lower": tb.classical_lower,
        "upper": tb.upper,
        "new_lower": tb.new_lower,
        "c_range": {"lo": tb.c_range_lo, "hi": tb.c_range_hi},
        "epsilon_omitted": tb.epsilon_omitted,
        "first_moment_zero": first_moment_zero(cfg.q, cfg.k),
    }


def _named_matrix(cfg: RunConfig):
    name = cfg.matrix
    if name == "flat":
        return flat_overlap(cfg.q)
    if name == "identity":
        return scaled_identity(cfg.q)
    if name == "stable":
        return stable_overlap(cfg.q, cfg.k)
    if name == "s-stable":
        if cfg.s is None:
            raise _UsageError("--matrix s-stable needs --s")
        return s_stable_overlap(cfg.q, cfg.s)
    if name and os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            return matrix_from_json_dict(
                json.load(fh), tol=cfg.tol if cfg.tol is not None else 1e-9
            )
    raise ValueError(f"unknown matrix {name!r} (not a name, not a file)")


def _cmd_rate(cfg: RunConfig, rng) -> dict:
    p = ModelParams(q=cfg.q, k=cfg.k, c=cfg.c, n=cfg.n)
    a = _named_matrix(cfg)
    value = rate(a, p)
    return {
        "entropy": value.entropy,
        "energy": value.energy,
        "rate": value.rate,
        "log_domain": value.log_domain,
        "matrix": matrix_to_json_dict(a),
    }


def _domain_tag(cfg: RunConfig) -> DomainTag:
    if cfg.domain == "D":
        return DomainTag.doubly_stochastic()
    if cfg.domain == "S":
        return DomainTag.row_stochastic()
    if cfg.domain == "D_s":
        if cfg.s is None:
            raise _UsageError("--domain D_s needs --s")
        return DomainTag.stable(cfg.s)
    if cfg.domain == "D_tame":
        return DomainTag.tame()
    raise _UsageError(f"unknown domain {cfg.domain!r}")


def _cmd_maximize(cfg: RunConfig, rng) -> dict:
    p = ModelParams(q=cfg.q, k=cfg.k, c=cfg.c)
    search = SearchConfig(
        starts=cfg.starts,
        max_steps=cfg.max_steps,
        grad_tol=cfg.grad_tol,
        seed=cfg.seed,
    )
    report = maximize(_domain_tag(cfg), p, search)
    return {
        "domain": cfg.domain,
        "s": cfg.s,
        "best_value": report.best_value,
        "flat_value": report.flat_value,
        "gap": report.gap,
        "starts": report.starts,
        "converged_starts": report.converged_starts,
        "membership_restarts": report.membership_restarts,
        "per_s_results": [
            {"s": s, "best_value": v, "comparator": comp}
            for s, v, comp in report.per_s_results
        ],
        "best_point": matrix_to_json_dict(report.best_point),
    }


def _decomposition_row(decomp) -> dict:
    return {
        "w_size": len(decomp.w),
        "u_size": len(decomp.u),
        "z_size": len(decomp.z),
        "core_size": len(decomp.core),
        "a0_size": len(decomp.a0),
        "a00_size": len(decomp.a00),
        "az_size": len(decomp.az),
        "aw_size": len(decomp.aw),
        "f1_size": len(decomp.f1),
        "f2_size": len(decomp.f2),
    }


def _thresholds(cfg: RunConfig) -> CoreThresholds:
    scale = cfg.threshold_scale if cfg.threshold_scale else 1.0
    if scale == 1.0:
        return CoreThresholds.defaults(cfg.k)
    return CoreThresholds.scaled(cfg.k, scale)


def _cmd_simulate_core(cfg: RunConfig, rng) -> dict:
    p = ModelParams(q=cfg.q, k=cfg.k, c=cfg.c, n=cfg.n)
    sigma = balanced_coloring(cfg.n, cfg.q)
    thresholds = _thresholds(cfg)
    rows = []
    for trial in range(cfg.trials):
        h = sample_planted(p, sigma, rng)
        decomp = extract_core(h, sigma, thresholds)
        row = {"trial": trial, "edges": h.m}
        row.update(_decomposition_row(decomp))
        row["cluster_log_bound"] = cluster_size_log_bound(decomp, cfg.q, cfg.n)
        rows.append(row)
    return {
        "rows": rows,
        "thresholds": {
            "t_w": thresholds.t_w,
            "t_u": thresholds.t_u,
            "t_z": thresholds.t_z,
            "t_core": thresholds.t_core,
            "blocked_min": thresholds.blocked_min,
        },
        "sigma_class_sizes": list(sigma.class_sizes()),
        "mean_edges": float(np.mean([r["edges"] for r in rows])),
    }


def _cmd_simulate_cluster(cfg: RunConfig, rng) -> dict:
    p = ModelParams(q=cfg.q, k=cfg.k, c=cfg.c, n=cfg.n)
    sigma = balanced_coloring(cfg.n, cfg.q)
    h = sample_planted(p, sigma, rng)
    decomp = extract_core(h, sigma, _thresholds(cfg))
    cluster = enumerate_cluster(h, sigma, decomp, budget=cfg.budget)
    counts = enumerate_colorings(h, cfg.q, budget=cfg.budget)
    return {
        "edges": h.m,
        "z_q": counts.z_q,
        "z_bal": counts.z_bal,
        "cluster_size": len(cluster.colorings),
        "log_size": cluster.log_size,
        "log_bound_per_vertex": cluster.log_bound,
        "within_bound": cluster.within_bound,
        "core": _decomposition_row(decomp),
    }


def _cmd_oracle_verify(cfg: RunConfig, rng) -> dict:
    exact = exact_expected_colorings(cfg.n, cfg.k, cfg.m, cfg.q)
    p = ModelParams(q=cfg.q, k=cfg.k, c=cfg.m / cfg.n, n=cfg.n)
    mean, std_error = empirical_first_moment(p, cfg.trials, rng)
    if std_error > 0:
        z_score = (mean - float(exact)) / std_error
    else:
        z_score = 0.0 if mean == float(exact) else math.inf
    out = {
        "exact": {
            "numerator": str(exact.numerator),
            "denominator": str(exact.denominator),
            "value": float(exact),
        },
        "monte_carlo": {"mean": mean, "std_error": std_error, "trials": cfg.trials},
        "z_score": z_score,
        "within_three_se": bool(abs(z_score) <= 3.0),
    }
    if cfg.beta is not None:
        h = sample_hypergraph(cfg.n, cfg.k, cfg.m, rng)
        out["partition"] = {
            "beta": cfg.beta,
            "value": partition_function(h, cfg.q, cfg.beta, budget=cfg.budget),
            "log_value": log_partition_function(
                h, cfg.q, cfg.beta, budget=cfg.budget
            ),
        }
    return out


def _cmd_condensation_scan(cfg: RunConfig, rng) -> dict:
    grid = np.linspace(cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_steps)
    per_q = []
    first_positive = None
    for q in cfg.q_grid:
        report = condensation_witness(q, cfg.k, grid)
        per_q.append(
            {
                "q": q,
                "rows": [
                    {"gamma": g, "c": c, "difference": d}
                    for g, c, d in report.rows
                ],
                "positive_gammas": list(report.positive_gammas),
            }
        )
        if report.positive_gammas and first_positive is None:
            first_positive = {"q": q, "gamma": report.positive_gammas[0]}
    return {
        "per_q": per_q,
        "first_positive": first_positive,
        "note": "internal consistency scan; an empty result is a report of "
        "'none found', not a refutation",
    }


_HANDLERS = {
    "bounds": _cmd_bounds,
    "rate": _cmd_rate,
    "maximize": _cmd_maximize,
    "simulate-core": _cmd_simulate_core,
    "simulate-cluster": _cmd_simulate_cluster,
    "oracle-verify": _cmd_oracle_verify,
    "condensation-scan": _cmd_condensation_scan,
}


# ---------------------------------------------------------------------------
# document assembly
# ---------------------------------------------------------------------------

def _pyify(obj):
    """Recursively convert numpy scalars/arrays so json can serialize."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_pyify(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(x) for x in obj]
    return obj


def _csv_rows(value, name: str) -> list[tuple[str, object, object]]:
    rows: list[tuple[str, object, object]] = []
    if isinstance(value, bool):
        rows.append((name, 0, int(value)))
    elif isinstance(value, (int, float)):
        rows.append((name, 0, value))
    elif isinstance(value, dict):
        for key in sorted(value):
            rows.extend(_csv_rows(value[key], f"{name}.{key}" if name else key))
    elif isinstance(value, list):
        for i, item in enumerate(value):
            if isinstance(item, dict):
                x = item.get(
                    "s",
                    item.get("gamma", item.get("q", item.get("trial", i))),
                )
                for key in sorted(item):
                    cell = item[key]
                    if isinstance(cell, bool):
                        rows.append((f"{name}.{key}", x, int(cell)))
                    elif isinstance(cell, (int, float)):
                        rows.append((f"{name}.{key}", x, cell))
                    elif isinstance(cell, (dict, list)):
                        rows.extend(_csv_rows(cell, f"{name}[{x}].{key}"))
            elif isinstance(item, (int, float)):
                rows.append((name, i, item))
    return rows


def _to_csv(outputs: dict) -> str:
    lines = ["series,x,y"]
    for series, x, y in _csv_rows(outputs, ""):
        y_text = repr(float(y)) if isinstance(y, float) else str(y)
        lines.append(f"{series},{x},{y_text}")
    return "\n".join(lines) + "\n"


def _inputs_dict(cfg: RunConfig) -> dict:
    skip = {"output", "command"}
    out = {}
    for f in fields(RunConfig):
        if f.name in skip:
            continue
        value = getattr(cfg, f.name)
        if value is None:
            continue
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def run(config: RunConfig) -> int:
    """Dispatch one resolved invocation; returns the process exit code."""
    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    captured: list[warnings.WarningMessage] = []
    try:
        with warnings.catch_warnings(record=True) as captured:
            warnings.simplefilter("always")
            outputs = _HANDLERS[config.command](config, rng)
    except _UsageError:
        raise
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ProjectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    warn_entries = []
    seen = set()
    for w in captured:
        code = getattr(w.message, "code", w.category.__name__)
        entry = (code, str(w.message))
        if entry not in seen:
            seen.add(entry)
            warn_entries.append({"code": code, "message": str(w.message)})
            print(f"warning [{code}]: {w.message}", file=sys.stderr)
    doc = {
        "schema": 1,
        "tool": {"name": "hypercolor", "version": __version__},
        "command": config.command,
        "inputs": _inputs_dict(config),
        "outputs": _pyify(outputs),
        "warnings": warn_entries,
        "timestamp": {
            "generated_utc": datetime.now(timezone.utc).isoformat(),
            "elapsed_seconds": time.perf_counter() - started,
        },
    }
    if config.format == "csv":
        text = _to_csv(doc["outputs"])
    else:
        text = canonical_json(doc)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve(args)
        return run(config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
