"""Command line: ``tklab run --config <json> [--suite NAME] [--out DIR] [--seed INT]``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import SUITES, ConfigError, ExperimentConfig, load_config
from .runner import COLUMNS, SuiteResult, quadrature_spec, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def format_value(v) -> str:
    """Cell text: 17 significant digits for reals, lowercase booleans, empty for missing."""
    if v is None or v == "":
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def render_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def emit_csv(path: Path, columns: list[str], rows: list[dict]) -> str:
    """Write the table and return its sha256."""
    data = render_csv(columns, rows).encode()
    try:
        path.write_bytes(data)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e
    return hashlib.sha256(data).hexdigest()


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if math.isfinite(o) else str(o)
    if hasattr(o, "l") and hasattr(o, "N"):
        return [o.l, o.N]
    return o


def write_json(path: Path, obj) -> str:
    data = (json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n").encode()
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def run(cfg: ExperimentConfig, log=print) -> tuple[dict, list[SuiteResult]]:
    """Execute the selected suites, write ``<suite>.csv``/``<suite>.json`` and ``manifest.json``."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    q = quadrature_spec(cfg)
    results, files, suites = [], {}, {}
    for name in cfg.suites:
        res = run_suite(name, cfg, q)
        results.append(res)
        files[f"{name}.csv"] = emit_csv(out / f"{name}.csv", COLUMNS[name], res.rows)
        files[f"{name}.json"] = write_json(out / f"{name}.json", {"criteria": res.criteria, "records": res.records})
        suites[name] = {"passed": res.passed, "seconds": round(res.seconds, 3), "failing": res.failing}
        status = "pass" if res.passed else "FAIL"
        log(f"{name:<14} {status}  {res.seconds:8.1f} s")
        for c in res.failing:
            log(f"    failing: {c}")
    manifest = {
        "tool": "tklab",
        "version": __version__,
        "schema": 1,
        "config_sha256": cfg.digest(),
        "config": cfg.to_dict(),
        "quadrature_rel_tol": q.rel_tol,
        "suites": suites,
        "passed": all(r.passed for r in results),
        "files": dict(sorted(files.items())),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    write_json(out / "manifest.json", manifest)
    return manifest, results


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tklab", description="Refinement studies for the discretized heat semigroup.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run experiment suites and write CSV/JSON reports")
    r.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    r.add_argument("--suite", help=f"one of: all, {', '.join(SUITES)}")
    r.add_argument("--out", help="output directory")
    r.add_argument("--seed", type=int, help="random seed")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, suite=args.suite, out=args.out, seed=args.seed)
    except ConfigError as e:
        print(f"tklab: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    manifest, _ = run(cfg)
    if not manifest["passed"]:
        failing = {k: v["failing"] for k, v in manifest["suites"].items() if v["failing"]}
        print(f"tklab: failing criteria: {json.dumps(failing)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
