"""Command line driver: ``rwadic run <config>``, ``list-suites``, ``describe <suite>``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, (float,)) or type(v).__name__.startswith("float"):
        return format(float(v), ".17g")
    if type(v).__name__.startswith("int"):
        return int(v)
    return v


def write_table(path: Path, digest: str, columns: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_hash"] + list(columns))
        for row in rows:
            w.writerow([digest] + [_fmt(v) for v in row])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, float) and not (v == v and abs(v) != float("inf")):
        return str(v)
    return v


def run(config_path, output_dir=None, threads=None, seed_override=None, suites=None, out=sys.stdout) -> int:
    from .config import load_config
    from .errors import AdicError
    from .suites import SUITES, Context, run_suite

    unknown = [s for s in suites or () if s not in SUITES]
    if unknown:
        print(f"error: unknown suite(s) {', '.join(unknown)}; known suites: {', '.join(SUITES)}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(config_path)
    except AdicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if seed_override is not None:
        cfg.simulation.seed = int(seed_override)
    if suites:
        cfg.suites = [s for s in cfg.suites if s in suites]
    outdir = Path(output_dir or os.environ.get("RWADIC_OUTPUT_DIR") or cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = Context(cfg)
    summary = {"config": str(config_path), "config_hash": cfg.digest, "seed": cfg.simulation.seed, "threads": threads, "suites": {}}
    all_ok = True
    for name in cfg.suites:
        res = run_suite(name, ctx)
        all_ok &= res.passed
        for tname, (cols, rows) in res.tables.items():
            write_table(outdir / f"{name}_{tname}.csv", cfg.digest, cols, rows)
        summary["suites"][name] = {
            "passed": res.passed,
            "predicates": res.predicates,
            "error": res.error,
            "seconds": res.seconds,
            **_jsonable(res.summary),
        }
        verdict = "PASS" if res.passed else "FAIL"
        detail = res.error or ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in res.predicates.items())
        print(f"[{verdict}] {name} ({res.seconds:.1f}s): {detail}", file=out, flush=True)
    summary["passed"] = all_ok
    (outdir / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return 0 if all_ok else 1


def _set_threads(threads: int | None) -> None:
    if threads is None:
        return
    if "numba" not in sys.modules:
        os.environ["NUMBA_NUM_THREADS"] = str(threads)
    import numba

    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwadic", description="Random walk adic transformation experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the suites listed in a configuration file")
    r.add_argument("config")
    r.add_argument("--output-dir")
    r.add_argument("--threads", type=int)
    r.add_argument("--seed-override", type=int)
    r.add_argument("--suite", action="append", dest="suites", help="restrict to these suites (repeatable)")
    sub.add_parser("list-suites", help="print the suite names in execution order")
    d = sub.add_parser("describe", help="describe one suite")
    d.add_argument("suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        _set_threads(args.threads)
        return run(args.config, args.output_dir, args.threads, args.seed_override, args.suites)
    from .errors import UnknownSuite
    from .suites import describe, list_suites

    if args.command == "list-suites":
        print("\n".join(list_suites()))
        return 0
    try:
        print(describe(args.suite))
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
