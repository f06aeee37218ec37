"""Command-line runner: JSON config in, CSV/JSON reports and optional SVG plots out."""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from identlab import __version__
from identlab.errors import CheckFailed, ConfigInvalid, IdentLabError, NotPositiveDefinite, NumericalFailure
from identlab.experiments import CSV_SCHEMAS, EXPERIMENTS, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
PRESET_SEED = 2026

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["experiment", "seed"],
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": sorted(EXPERIMENTS)},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
        "threads": {"type": "integer", "minimum": 1},
        "plots": {"type": "boolean"},
        "output_dir": {"type": "string"},
    },
}

PRESETS = {name: {"experiment": name, "seed": PRESET_SEED} for name in EXPERIMENTS}

# table -> (x column, y column, lower column, upper column, grouping column)
PLOTS = {
    "mean_variance": ("n", "var_hat", None, None, None),
    "power_curve": ("mu", "diff", None, None, None),
    "rho_hat": ("size", "iqr", None, None, "design"),
    "m5_marginals": ("position", "empirical", None, None, "p"),
    "pvalue_levels": ("level", "frac_p_le_level", None, None, "p"),
    "mixture_consistency": ("n", "frac_correct", "ci_lo", "ci_hi", None),
    "gaussian_consistency": ("n", "frac_correct", "ci_lo", "ci_hi", None),
}


def validate_config(config) -> dict:
    """Check a parsed config against the schema and the experiment's parameters."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(exc.message) from None
    defaults = EXPERIMENTS[config["experiment"]][1]
    for key, value in config.get("params", {}).items():
        if key not in defaults:
            raise ConfigInvalid(f"unknown parameter {key!r} for {config['experiment']}")
        ref = defaults[key]
        numeric = (int, float)
        if isinstance(ref, bool) or isinstance(value, bool):
            ok = isinstance(value, bool) == isinstance(ref, bool)
        elif isinstance(ref, numeric):
            ok = isinstance(value, numeric)
        else:
            ok = isinstance(value, type(ref))
        if not ok:
            raise ConfigInvalid(f"parameter {key!r} should look like {ref!r}")
    return config


def load_config(path) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from None
    return validate_config(config)


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def plot_csv(csv_path: Path, spec, svg_path: Path) -> None:
    """Line plot (with CI band when available) read back from a result CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x, y, lo, hi, group = spec
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    groups = {}
    for row in rows:
        groups.setdefault(row[group] if group else "", []).append(row)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rs in groups.items():
        xs = [float(r[x]) for r in rs]
        ys = [float(r[y]) for r in rs]
        ax.plot(xs, ys, marker="o", label=label or None)
        if lo and hi:
            ax.fill_between(xs, [float(r[lo]) for r in rs], [float(r[hi]) for r in rs], alpha=0.25)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if x == "n":
        ax.set_xscale("log")
    if group:
        ax.legend(title=group)
    ax.set_title(csv_path.stem)
    fig.tight_layout()
    plt.rcParams["svg.hashsalt"] = "identlab"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_experiment(config: dict, out_dir=None, threads=None, plots=None) -> tuple[dict, object]:
    """Run a validated config, write artifacts, and return (manifest, result)."""
    config = validate_config(config)
    out = Path(out_dir or config.get("output_dir") or f"identlab-out/{config['experiment']}")
    threads = threads or config.get("threads", 1)
    plots = config.get("plots", False) if plots is None else plots
    out.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    result = run(config["experiment"], config.get("params"), config["seed"], threads)
    files = []
    for name, text in sorted(result.csvs().items()):
        (out / f"{name}.csv").write_text(text)
        files.append(f"{name}.csv")
    summary = {k: v for k, v in result.summary.items() if k != "elapsed_seconds"}
    payload = {
        "experiment": config["experiment"],
        "seed": config["seed"],
        "passed": result.passed,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
        "summary": summary,
    }
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    files.append("summary.json")
    if plots:
        for name in sorted(result.csvs()):
            if name in PLOTS:
                plot_csv(out / f"{name}.csv", PLOTS[name], out / f"{name}.svg")
                files.append(f"{name}.svg")
    manifest = {
        "config_hash": config_hash(config),
        "version": __version__,
        "files": {f: _sha256(out / f) for f in files},
        "wall_time_seconds": time.perf_counter() - start,
        "threads": threads,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest, result


def _schema_help() -> str:
    lines = ["CSV outputs per experiment:"]
    for exp, tables in CSV_SCHEMAS.items():
        lines.append(f"  {exp}")
        for table, cols in tables.items():
            lines.append(f"    {table}.csv: {', '.join(cols)}")
    lines.append("Every run also writes summary.json (checks) and manifest.json (hashes, wall time).")
    lines.append("Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 check failed.")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="identlab", description="Identifiability experiments.")
    parser.add_argument("--version", action="version", version=f"identlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter
    p_run = sub.add_parser("run", help="run an experiment config", epilog=_schema_help(), formatter_class=fmt)
    p_run.add_argument("config")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--plots", action="store_true", default=None)
    p_run.add_argument("--out", default=None)
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_pre = sub.add_parser("presets", help="list built-in configs", epilog=_schema_help(), formatter_class=fmt)
    p_pre.add_argument("--write", metavar="DIR", help="write each preset as DIR/<name>.json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name, cfg in PRESETS.items():
                print(f"{name}: {json.dumps(cfg)}")
                if args.write:
                    Path(args.write).mkdir(parents=True, exist_ok=True)
                    Path(args.write, f"{name}.json").write_text(json.dumps(cfg, indent=2) + "\n")
            return EXIT_OK
        config = load_config(args.config)
        if args.command == "validate":
            print(f"{args.config}: ok ({config['experiment']})")
            return EXIT_OK
        if args.threads is not None and args.threads < 1:
            raise ConfigInvalid("--threads must be >= 1")
        manifest, result = run_experiment(config, args.out, args.threads, args.plots)
        for c in result.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
        print(f"wall time {manifest['wall_time_seconds']:.1f} s")
        if not result.passed:
            raise CheckFailed(f"{sum(not c.passed for c in result.checks)} check(s) failed")
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, NotPositiveDefinite, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except IdentLabError as exc:
        # remaining library errors come from invalid model parameters
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
