"""Command-line interface: config ingestion, dispatch, deterministic emission.

Every subcommand writes ``<cmd>.csv`` (fixed column order, see
docs/csv-schemas.md) plus a ``<cmd>.meta.json`` sidecar carrying the fully
resolved config, the master seed, the derived-seed scheme version, a
version string, and the wall-clock runtime.  Reruns with identical config
and master seed produce byte-identical CSV files.

Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .attraction import AttractionSpec, spec_from_dict, spec_to_dict
from .experiments import (
    SEED_SCHEME,
    derived_rng,
    dominance_check,
    hoeffding_probe,
    max_degree_scan,
    race,
    root_coverage,
    track_centroid,
)
from .growth import grow_cmj, grow_discrete, population_trajectory
from .malthus import SeriesNotConverged, solve_malthusian
from .tree import GrowingTree, centroids, psi_all

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "config_to_dict",
    "main",
    "parse_config",
    "run",
]

OUT_DIR_ENV = "PATREES_OUT_DIR"

_SUBCOMMANDS = (
    "grow",
    "analyze",
    "malthus",
    "trajectory",
    "coverage",
    "track",
    "maxdeg",
    "race",
    "dominance",
    "hoeffding",
)


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    cmd: str
    spec: AttractionSpec | None = None
    n: int | None = None
    n_max: int | None = None
    t_end: float | None = None
    sample_dt: float | None = None
    K_list: tuple[int, ...] | None = None
    n_list: tuple[int, ...] | None = None
    checkpoints: tuple[int, ...] | None = None
    K_top: int | None = None
    shape1: str | None = None
    shape2: str | None = None
    d: int | None = None
    alpha: float | None = None
    trials: int | None = None
    tree: str | None = None
    tol: float | None = None
    population_cap: int | None = None
    allow_any_spec: bool = False
    master_seed: int = 0
    out_dir: str = "."


# ------------------------------------------------------------------- parsing

# minimum value per positive-integer key
_COUNT_KEYS = {"n": 1, "n_max": 1, "trials": 1, "K_top": 1, "population_cap": 1}
_FLOAT_KEYS = ("t_end", "sample_dt", "tol", "alpha")
_LIST_KEYS = ("K_list", "n_list", "checkpoints")
_STR_KEYS = ("shape1", "shape2", "tree", "out_dir")
_KNOWN_KEYS = (
    {"cmd", "spec", "d", "master_seed", "allow_any_spec"}
    | set(_COUNT_KEYS)
    | set(_FLOAT_KEYS)
    | set(_LIST_KEYS)
    | set(_STR_KEYS)
)

_REQUIRED = {
    "grow": ("spec",),
    "analyze": ("tree",),
    "malthus": ("spec",),
    "trajectory": ("spec", "t_end", "sample_dt", "trials"),
    "coverage": ("spec", "n", "K_list", "trials"),
    "track": ("spec", "n_max"),
    "maxdeg": ("alpha", "n_list", "trials"),
    "race": ("spec", "shape1", "shape2", "trials"),
    "dominance": ("d", "alpha", "t_end", "trials"),
    "hoeffding": ("n_list", "trials"),
}


def _want_int(key: str, v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"key '{key}' must be an integer, got {v!r}")
    return v


def _want_float(key: str, v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key '{key}' must be a number, got {v!r}")
    return float(v)


def _want_str(key: str, v) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"key '{key}' must be a string, got {v!r}")
    return v


def _want_int_list(key: str, v) -> tuple[int, ...]:
    ok = isinstance(v, (list, tuple)) and len(v) > 0
    if ok:
        ok = all(not isinstance(x, bool) and isinstance(x, int) and x >= 1 for x in v)
    if not ok:
        raise ConfigError(f"key '{key}' must be a nonempty list of positive integers, got {v!r}")
    return tuple(v)


def _config_from_document(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cmd = doc.get("cmd")
    if cmd is None:
        raise ConfigError("missing required key 'cmd'")
    if cmd not in _SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {cmd!r}; expected one of {', '.join(_SUBCOMMANDS)}")

    vals: dict = {"cmd": cmd}
    for key, lo in _COUNT_KEYS.items():
        if key in doc:
            v = _want_int(key, doc[key])
            if v < lo:
                raise ConfigError(f"key '{key}' must be positive, got {v}")
            vals[key] = v
    if "d" in doc:
        v = _want_int("d", doc["d"])
        if v < 0:
            raise ConfigError(f"key 'd' must be a nonnegative integer, got {v}")
        vals["d"] = v
    if "master_seed" in doc:
        v = _want_int("master_seed", doc["master_seed"])
        if not 0 <= v < 2**64:
            raise ConfigError(f"key 'master_seed' must be a 64-bit unsigned integer, got {v}")
        vals["master_seed"] = v
    for key in _FLOAT_KEYS:
        if key in doc:
            vals[key] = _want_float(key, doc[key])
    if "tol" in vals and vals["tol"] <= 0.0:
        raise ConfigError("tol must be positive")
    if "sample_dt" in vals and vals["sample_dt"] <= 0.0:
        raise ConfigError(f"key 'sample_dt' must be positive, got {vals['sample_dt']}")
    if "t_end" in vals and vals["t_end"] < 0.0:
        raise ConfigError(f"key 't_end' must be nonnegative, got {vals['t_end']}")
    if "alpha" in vals and not 0.0 < vals["alpha"] < 1.0:
        raise ConfigError(f"key 'alpha' must lie in (0, 1), got {vals['alpha']}")
    for key in _LIST_KEYS:
        if key in doc:
            vals[key] = _want_int_list(key, doc[key])
    for key in _STR_KEYS:
        if key in doc:
            vals[key] = _want_str(key, doc[key])
    if "allow_any_spec" in doc:
        if not isinstance(doc["allow_any_spec"], bool):
            raise ConfigError(f"key 'allow_any_spec' must be a boolean, got {doc['allow_any_spec']!r}")
        vals["allow_any_spec"] = doc["allow_any_spec"]
    if "spec" in doc:
        raw = doc["spec"]
        if isinstance(raw, AttractionSpec):
            vals["spec"] = raw
        else:
            try:
                vals["spec"] = spec_from_dict(raw)
            except ValueError as exc:
                raise ConfigError(f"bad attraction spec: {exc}") from None

    for key in _REQUIRED[cmd]:
        if key not in vals:
            raise ConfigError(f"missing required key '{key}' for subcommand '{cmd}'")
    if cmd == "grow":
        stops = sum(k in vals for k in ("n", "n_max", "t_end"))
        if stops != 1:
            raise ConfigError("subcommand 'grow' needs exactly one of: n, n_max, t_end")

    if cmd == "track":
        vals.setdefault("checkpoints", (vals["n_max"],))
        vals.setdefault("K_top", 5)
    if cmd in ("malthus", "trajectory", "race"):
        vals.setdefault("tol", 1e-9)
    vals.setdefault("out_dir", os.environ.get(OUT_DIR_ENV) or ".")
    return ExperimentConfig(**vals)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-ready resolved config; ``parse_config`` of the result round-trips."""
    doc: dict = {"cmd": cfg.cmd, "master_seed": cfg.master_seed, "out_dir": cfg.out_dir}
    if cfg.spec is not None:
        doc["spec"] = spec_to_dict(cfg.spec)
    for key in (
        "n",
        "n_max",
        "t_end",
        "sample_dt",
        "K_list",
        "n_list",
        "checkpoints",
        "K_top",
        "shape1",
        "shape2",
        "d",
        "alpha",
        "trials",
        "tree",
        "tol",
        "population_cap",
    ):
        v = getattr(cfg, key)
        if v is not None:
            doc[key] = list(v) if isinstance(v, tuple) else v
    if cfg.allow_any_spec:
        doc["allow_any_spec"] = True
    return doc


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep flag errors inside ConfigError
        raise ConfigError(message)


def _int_list_flag(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _build_parser() -> _Parser:
    p = _Parser(
        prog="patrees",
        description=(
            "Deterministic experiment runner. The positional subcommand picks the "
            "operation; flags override values loaded from --config. Results go to "
            f"--out-dir (default from ${OUT_DIR_ENV}, else the current directory) "
            "as <subcommand>.csv plus a <subcommand>.meta.json sidecar."
        ),
    )
    p.add_argument("cmd", nargs="?", choices=_SUBCOMMANDS, metavar="subcommand",
                   help=f"one of: {', '.join(_SUBCOMMANDS)}")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--spec", type=json.loads, help='attraction spec as JSON, e.g. {"kind":"linear"}')
    p.add_argument("--n", type=int, help="tree size (grow, coverage)")
    p.add_argument("--n-max", type=int, help="population stop (grow, track)")
    p.add_argument("--t-end", type=float, help="time horizon (grow, trajectory, race, dominance)")
    p.add_argument("--sample-dt", type=float, help="trajectory sampling step")
    p.add_argument("--k-list", type=_int_list_flag, help="comma-separated K values (coverage)")
    p.add_argument("--n-list", type=_int_list_flag, help="comma-separated sizes (maxdeg, hoeffding)")
    p.add_argument("--checkpoints", type=_int_list_flag, help="comma-separated sizes (track)")
    p.add_argument("--k-top", type=int, help="candidate-set size at checkpoints (track)")
    p.add_argument("--shape1", help="race seed: single, line:R, star:R, or tree:PATH")
    p.add_argument("--shape2", help="race seed: single, line:R, star:R, or tree:PATH")
    p.add_argument("--d", type=int, help="root out-degree shift (dominance)")
    p.add_argument("--alpha", type=float, help="sublinear exponent (maxdeg, dominance)")
    p.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    p.add_argument("--master-seed", type=int, help="64-bit unsigned master seed (default 0)")
    p.add_argument("--tree", help="input tree file (analyze)")
    p.add_argument("--tol", type=float, help="solver tolerance (malthus, trajectory, race)")
    p.add_argument("--population-cap", type=int, help="override the growth population cap")
    p.add_argument("--allow-any-spec", action="store_const", const=True, default=None,
                   help="run coverage outside the sublinear weight class")
    p.add_argument("--out-dir", help="output directory")
    return p


_FLAG_TO_KEY = {"k_list": "K_list", "n_list": "n_list", "k_top": "K_top"}


def _document_from_flags(argv: list[str]) -> dict:
    ns = _build_parser().parse_args(argv)
    doc: dict = {}
    if ns.config is not None:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {ns.config!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {ns.config!r} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {ns.config!r} must hold a JSON object")
        doc.update(loaded)
    for dest, value in vars(ns).items():
        if dest == "config" or value is None:
            continue
        doc[_FLAG_TO_KEY.get(dest, dest)] = value
    return doc


def parse_config(source) -> ExperimentConfig:
    """Build a validated config from a JSON-style dict or a flag list."""
    if isinstance(source, dict):
        return _config_from_document(dict(source))
    return _config_from_document(_document_from_flags(list(source)))


# ------------------------------------------------------------------ emission


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(float(x))  # shortest round-trip form, numpy scalars included
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return x


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(x) for x in row])


def _version() -> str:
    here = Path(__file__).resolve()
    for parent in here.parents:
        if (parent / ".git").exists():
            try:
                proc = subprocess.run(
                    ["git", "describe", "--tags", "--always", "--dirty"],
                    cwd=parent,
                    capture_output=True,
                    text=True,
                    timeout=10,
                    check=False,
                )
                if proc.returncode == 0 and proc.stdout.strip():
                    return proc.stdout.strip()
            except OSError:
                pass
            break
    return f"v{__version__}"


def _cap_kwargs(cfg: ExperimentConfig) -> dict:
    return {} if cfg.population_cap is None else {"population_cap": cfg.population_cap}


def _run_grow(cfg: ExperimentConfig, out: Path):
    rng = derived_rng(cfg.master_seed, 0)
    if cfg.n is not None:
        tree = grow_discrete(cfg.spec, cfg.n, rng)
    else:
        tree = grow_cmj(cfg.spec, n_max=cfg.n_max, t_end=cfg.t_end, rng=rng, **_cap_kwargs(cfg))
    (out / "grow.csv").write_text(tree.to_text(), encoding="ascii")
    summary = {"n": tree.n, "timed": tree.timed}
    if tree.timed:
        summary["final_time"] = float(tree.birth_time[-1])
    return ["grow.csv"], summary, None


def _run_analyze(cfg: ExperimentConfig, out: Path):
    tree = GrowingTree.load(cfg.tree)
    psi = psi_all(tree)
    rows = [
        (
            v,
            tree.parent[v],
            tree.out_degree(v),
            float(tree.birth_time[v]) if tree.timed else None,
            psi[v],
        )
        for v in range(tree.n)
    ]
    _write_csv(out / "analyze.csv", ["vertex", "parent", "out_degree", "birth_time", "psi"], rows)
    rep = centroids(tree)
    summary = {
        "n": tree.n,
        "centroid_ids": [int(c) for c in rep.centroid_ids],
        "selected_centroid": int(rep.selected),
        "psi_selected": int(rep.psi_value),
    }
    return ["analyze.csv"], summary, None


def _run_malthus(cfg: ExperimentConfig, out: Path):
    est = solve_malthusian(cfg.spec, cfg.tol)
    _write_csv(
        out / "malthus.csv",
        ["kind", "theta", "residual", "iterations", "bracket_lo", "bracket_hi", "truncation_bound"],
        [
            (
                cfg.spec.kind,
                est.theta,
                est.residual,
                est.iterations,
                est.bracket[0],
                est.bracket[1],
                est.truncation_bound,
            )
        ],
    )
    payload = json.dumps(
        {"theta": est.theta, "residual": est.residual, "iterations": est.iterations}
    )
    summary = {"theta": est.theta}
    return ["malthus.csv"], summary, payload


def _run_trajectory(cfg: ExperimentConfig, out: Path):
    theta: float | None
    try:
        theta = solve_malthusian(cfg.spec, cfg.tol).theta
    except (ValueError, SeriesNotConverged):
        theta = None
    rows = []
    for i in range(cfg.trials):
        traj = population_trajectory(
            cfg.spec, cfg.t_end, cfg.sample_dt, derived_rng(cfg.master_seed, i),
            theta=theta, **_cap_kwargs(cfg),
        )
        for j in range(len(traj.times)):
            rows.append(
                (
                    i,
                    float(traj.times[j]),
                    int(traj.populations[j]),
                    float(traj.normalized[j]) if theta is not None else None,
                )
            )
    _write_csv(out / "trajectory.csv", ["trial", "t", "Z", "normalized_Z"], rows)
    return ["trajectory.csv"], {"theta": theta}, None


def _run_coverage(cfg: ExperimentConfig, out: Path):
    table = root_coverage(
        cfg.spec, cfg.n, list(cfg.K_list), cfg.trials, cfg.master_seed,
        allow_any_spec=cfg.allow_any_spec,
    )
    rows = [
        (r.alpha, r.n, r.K, r.trials, r.successes, r.coverage, r.std_error) for r in table.rows
    ]
    _write_csv(
        out / "coverage.csv",
        ["alpha", "n", "K", "trials", "successes", "coverage", "std_error"],
        rows,
    )
    return ["coverage.csv"], {}, None


def _run_track(cfg: ExperimentConfig, out: Path):
    log = track_centroid(cfg.spec, cfg.n_max, list(cfg.checkpoints), cfg.K_top, cfg.master_seed)
    rows = []
    ei, ci = 0, 0
    # chronological merge; at equal n the change event precedes the checkpoint
    while ei < len(log.events) or ci < len(log.checkpoints):
        take_event = ci >= len(log.checkpoints) or (
            ei < len(log.events) and log.events[ei][0] <= log.checkpoints[ci][0]
        )
        if take_event:
            n, old, new = log.events[ei]
            rows.append(("event", n, old, new, None))
            ei += 1
        else:
            n, members = log.checkpoints[ci]
            rows.append(("checkpoint", n, None, None, ";".join(str(m) for m in members)))
            ci += 1
    rows.append(("final", cfg.n_max, None, log.final_selected, None))
    _write_csv(
        out / "track.csv", ["record", "n", "old_selected", "new_selected", "members"], rows
    )
    summary = {"final_selected": log.final_selected, "change_events": len(log.events)}
    return ["track.csv"], summary, None


def _run_maxdeg(cfg: ExperimentConfig, out: Path):
    rows = [
        (r.alpha, r.n, r.trials, r.median_max_degree, r.log_scale_ratio)
        for r in max_degree_scan(cfg.alpha, list(cfg.n_list), cfg.trials, cfg.master_seed)
    ]
    _write_csv(
        out / "maxdeg.csv",
        ["alpha", "n", "trials", "median_max_degree", "log_scale_ratio"],
        rows,
    )
    return ["maxdeg.csv"], {}, None


def _run_race(cfg: ExperimentConfig, out: Path):
    r = race(cfg.shape1, cfg.shape2, cfg.spec, cfg.t_end, cfg.trials, cfg.master_seed)
    _write_csv(
        out / "race.csv",
        ["shape1", "shape2", "t_end", "trials", "wins", "win_prob", "std_error"],
        [(r.shape1, r.shape2, r.t_end, r.trials, r.wins, r.win_prob, r.std_error)],
    )
    return ["race.csv"], {"win_prob": r.win_prob, "t_end": r.t_end}, None


def _run_dominance(cfg: ExperimentConfig, out: Path):
    rep = dominance_check(cfg.d, cfg.alpha, cfg.t_end, cfg.trials, cfg.master_seed)
    rows = [
        ("mean", rep.mean_shifted_root, rep.mean_independent_sum),
        ("sd", rep.sd_shifted_root, rep.sd_independent_sum),
    ]
    for k in range(1, 10):
        rows.append(
            (
                f"decile_{10 * k}",
                rep.deciles_shifted_root[k - 1],
                rep.deciles_independent_sum[k - 1],
            )
        )
    _write_csv(out / "dominance.csv", ["statistic", "shifted_root", "independent_sum"], rows)
    return ["dominance.csv"], {}, None


def _run_hoeffding(cfg: ExperimentConfig, out: Path):
    rows = [
        (r.n, r.trials, r.empirical, r.analytic, r.bound)
        for r in hoeffding_probe(list(cfg.n_list), cfg.trials, cfg.master_seed)
    ]
    _write_csv(out / "hoeffding.csv", ["n", "trials", "empirical", "analytic", "bound"], rows)
    return ["hoeffding.csv"], {}, None


_HANDLERS = {
    "grow": _run_grow,
    "analyze": _run_analyze,
    "malthus": _run_malthus,
    "trajectory": _run_trajectory,
    "coverage": _run_coverage,
    "track": _run_track,
    "maxdeg": _run_maxdeg,
    "race": _run_race,
    "dominance": _run_dominance,
    "hoeffding": _run_hoeffding,
}


def run(cfg: ExperimentConfig) -> dict:
    """Dispatch one subcommand; returns the sidecar document it wrote."""
    t0 = time.monotonic()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs, summary, payload = _HANDLERS[cfg.cmd](cfg, out)
    meta = {
        "config": config_to_dict(cfg),
        "master_seed": cfg.master_seed,
        "seed_scheme": SEED_SCHEME,
        "version": _version(),
        "runtime_seconds": time.monotonic() - t0,
        "outputs": outputs,
    }
    if summary:
        meta["summary"] = summary
    (out / f"{cfg.cmd}.meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
    if payload is not None:
        print(payload)
    return meta


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 2
    try:
        run(cfg)
    except Exception as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
