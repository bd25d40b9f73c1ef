"""Command-line harness: evolve populations, compute features, solve
instances, summarize feature ranges, and run the classifier sweep.

Exit codes: 0 success, 1 validation or config error, 2 runtime or oracle
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .ea import EaConfig, evolve, load_population, load_run_config, save_run
from .errors import ConfigError, InstanceForgeError, InstanceFormatError, OracleError
from .features import FEATURE_IDS, compute_all
from .instances import RandomSource, read_instance
from .solvers import make_oracle, ratio_of, two_opt_mean_quality
from .svm import KernelSpec, combination_sweep, sweep_rows

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the convention here reserves 2 for
    # runtime failures, so argument errors are remapped to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _stdout_csv():
    return csv.writer(sys.stdout, lineterminator="\n")


def _run_spec_name(idx: int, cfg: EaConfig) -> str:
    feat = cfg.measure.features[0]
    return f"run{idx:02d}_{cfg.mode}_{feat}_n{cfg.n}_seed{cfg.seed}"


def _execute_run(cfg_dict: dict, outdir: str) -> str:
    cfg = EaConfig.from_dict(cfg_dict)
    log = evolve(cfg)
    save_run(log, outdir)
    return outdir


def cmd_evolve(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        print(f"evolve: config file {args.config!r} not found", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(
            f"evolve: {args.config}: invalid JSON at line {exc.lineno}, column "
            f"{exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_CONFIG

    for field in ("output_dir", "seeds", "runs"):
        if field not in doc:
            print(f"evolve: config missing field {field!r}", file=sys.stderr)
            return EXIT_CONFIG
    seeds = doc["seeds"]
    specs = doc["runs"]
    parallelism = int(doc.get("parallelism", 1))
    if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
        print("evolve: 'seeds' must be a list of integers", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(specs, list) or not specs:
        print("evolve: 'runs' must be a non-empty list", file=sys.stderr)
        return EXIT_CONFIG
    if parallelism < 1:
        print("evolve: 'parallelism' must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    # Materialize every (spec, seed) combination up front so config errors
    # surface before any run starts.
    jobs = []
    for i, spec in enumerate(specs):
        if not isinstance(spec, dict):
            print(f"evolve: runs[{i}] must be an object", file=sys.stderr)
            return EXIT_CONFIG
        if "seed" in spec:
            print(
                f"evolve: runs[{i}] sets 'seed'; seeds come from the top-level list",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        for seed in seeds:
            try:
                cfg = EaConfig.from_dict({**spec, "seed": seed})
            except (ConfigError, ValueError) as exc:
                print(f"evolve: runs[{i}]: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            outdir = os.path.join(doc["output_dir"], _run_spec_name(i, cfg))
            jobs.append((cfg, outdir))

    try:
        for cfg, _ in jobs:
            make_oracle(cfg.oracle, cfg.n).check(cfg.n)
    except (OracleError, InstanceForgeError) as exc:
        print(f"evolve: oracle: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failures = 0
    if parallelism == 1:
        for cfg, outdir in jobs:
            try:
                _execute_run(cfg.to_dict(), outdir)
                print(outdir)
            except InstanceForgeError as exc:
                failures += 1
                print(f"evolve: {outdir}: {exc}", file=sys.stderr)
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [
                (outdir, pool.submit(_execute_run, cfg.to_dict(), outdir))
                for cfg, outdir in jobs
            ]
            for outdir, fut in futures:
                try:
                    fut.result()
                    print(outdir)
                except InstanceForgeError as exc:
                    failures += 1
                    print(f"evolve: {outdir}: {exc}", file=sys.stderr)
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_features(args) -> int:
    writer = _stdout_csv()
    writer.writerow(["id", "n", *FEATURE_IDS])
    failures = 0
    for path in args.instances:
        try:
            inst = read_instance(path)
        except (InstanceFormatError, OSError) as exc:
            failures += 1
            print(f"features: {exc}", file=sys.stderr)
            continue
        fv = compute_all(inst)
        label = inst.id if inst.id is not None else os.path.basename(path)
        writer.writerow([label, inst.n, *[repr(fv[f]) for f in FEATURE_IDS]])
    return EXIT_CONFIG if failures else EXIT_OK


def cmd_solve(args) -> int:
    try:
        inst = read_instance(args.instance)
    except (InstanceFormatError, OSError) as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    oracle = make_oracle(args.oracle, inst.n)
    oracle.check(inst.n)
    report = two_opt_mean_quality(inst, args.restarts, RandomSource(args.seed))
    opt = oracle.opt(inst)
    out = {
        "A": report.mean_length,
        "OPT": opt,
        "alpha": ratio_of(report.mean_length, opt),
        "best_length": report.length,
        "best_tour": report.best_tour.tolist(),
        "restarts": report.restarts,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_report_ranges(args) -> int:
    writer = _stdout_csv()
    writer.writerow(["run", "feature", "n", "mode", "min", "max", "range", "median"])
    raw_rows = []
    for run_dir in args.runs:
        cfg = load_run_config(run_dir)
        members = load_population(run_dir)
        features = FEATURE_IDS if args.all_features else (cfg.measure.features[0],)
        for fid in features:
            values = np.array([m.features[fid] for m in members])
            writer.writerow(
                [
                    run_dir,
                    fid,
                    cfg.n,
                    cfg.mode,
                    repr(float(values.min())),
                    repr(float(values.max())),
                    repr(float(values.max() - values.min())),
                    repr(float(np.median(values))),
                ]
            )
        if args.raw:
            for m in members:
                for fid in FEATURE_IDS:
                    raw_rows.append(
                        [run_dir, m.inst.id, fid, cfg.n, cfg.mode, repr(m.features[fid])]
                    )
    if args.raw:
        with open(args.raw, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["run", "id", "feature", "n", "mode", "value"])
            w.writerows(raw_rows)
    return EXIT_OK


def cmd_classify(args) -> int:
    easy = []
    hard = []
    for run_dir in args.populations:
        cfg = load_run_config(run_dir)
        members = load_population(run_dir)
        (easy if cfg.mode == "easy" else hard).extend(members)
    if not easy or not hard:
        print(
            "classify: need at least one easy-mode and one hard-mode population "
            f"(got {len(easy)} easy, {len(hard)} hard instances)",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    if args.kernel == "rbf":
        kernel = KernelSpec("rbf", args.gamma)
    else:
        kernel = KernelSpec("linear")
    cells = combination_sweep(
        easy, hard, sizes=tuple(args.combo_size), kernel=kernel, C=args.C,
        pool=args.pool,
    )
    rows = sweep_rows(cells)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        writer = _stdout_csv()
        writer.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="instance-forge",
        description="Evolve diverse easy/hard TSP instances for 2-OPT and "
        "quantify their separability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run EA configurations from a JSON config")
    p.add_argument("config", help="experiment config (JSON)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("features", help="print feature CSV for instance files")
    p.add_argument("instances", nargs="*", help="instance files (JSON or TSPLIB)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("solve", help="2-OPT quality and approximation ratio")
    p.add_argument("instance")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--oracle", default=None, help="exact[:N] | command:TPL | cached:FILE")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("report-ranges", help="feature range stats per run directory")
    p.add_argument("runs", nargs="+", help="run directories from evolve")
    p.add_argument(
        "--all-features",
        action="store_true",
        help="report all features, not only each run's measured one",
    )
    p.add_argument("--raw", default=None, help="also write per-instance values to FILE")
    p.set_defaults(func=cmd_report_ranges)

    p = sub.add_parser("classify", help="feature-combination SVM sweep")
    p.add_argument("populations", nargs="+", help="run directories from evolve")
    p.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
    p.add_argument("--C", type=float, default=100.0)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument(
        "--combo-size",
        type=int,
        nargs="+",
        choices=(2, 3),
        default=[2, 3],
        help="feature subset sizes to sweep",
    )
    p.add_argument("--pool", action="store_true", help="pool all sizes into one dataset")
    p.add_argument("--out", default=None, help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InstanceFormatError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstanceForgeError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
