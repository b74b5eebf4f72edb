"""Command-line interface.

Subcommands: validate, enumerate, optimize, run, report. Runs are driven
by a JSON config file; every run writes a manifest (config hash, master
seed, package version) so it can be replayed exactly. The CTXCLF_WORKERS
environment variable is parsed for forward compatibility; execution is
currently sequential regardless of its value.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import ctxclf
from ctxclf.classifiers import ALGORITHMS, ClassifierSpec
from ctxclf.context import (
    ConstraintTable,
    derive_constraints,
    enumerate_feasible,
    load_structure,
    validate_structure,
)
from ctxclf.errors import CtxclfError, InfeasibleStructure, StructureError
from ctxclf.evaluation import METHODS, MetricsRow, MetricsTable, RunConfig, run_experiment
from ctxclf.optimize import EAParams, ea_search, exhaustive_search, feasible_set, trace_to_csv
from ctxclf.rng import derive_seed
from ctxclf.signals import load_signalset
from ctxclf.stats import average_ranks, wilcoxon_holm

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class ConfigError(CtxclfError):
    """Config schema violation; message carries the offending field path."""


def workers_from_env() -> int:
    raw = os.environ.get("CTXCLF_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"CTXCLF_WORKERS: expected a positive integer, got {raw!r}")
    if n < 1:
        raise ConfigError(f"CTXCLF_WORKERS: expected a positive integer, got {raw!r}")
    return n


def _expect(d: dict, key: str, kind, path: str, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"{path}{key}: required field missing")
        return default
    value = d[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(
            f"{path}{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}"
        )
    return value


def _parse_ea(d: dict, path: str) -> EAParams:
    defaults = EAParams()
    kwargs = {}
    for name in (
        "population_size",
        "tournament_size",
        "crossover_prob",
        "mutation_prob",
        "stagnation_horizon",
        "max_generations",
        "seed",
    ):
        kind = float if name in ("crossover_prob", "mutation_prob") else int
        kwargs[name] = _expect(d, name, kind, path, default=getattr(defaults, name))
    kwargs["crossover_op"] = _expect(d, "crossover_op", str, path, default=defaults.crossover_op)
    unknown = set(d) - set(kwargs)
    if unknown:
        raise ConfigError(f"{path}{sorted(unknown)[0]}: unknown field")
    try:
        return EAParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path[:-1]}: {exc}")


def load_run_config(path) -> tuple[RunConfig, dict, Path]:
    """Parse a run config file; returns (config, raw dict, output dir)."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}")
    if not isinstance(raw, dict):
        raise ConfigError("config root: expected an object")

    sset = load_signalset(_expect(raw, "signalset", str, "", required=True))
    structure = load_structure(_expect(raw, "structure", str, "", required=True))

    methods = tuple(_expect(raw, "methods", list, "", default=list(METHODS)))
    for i, m in enumerate(methods):
        if m not in METHODS:
            raise ConfigError(f"methods[{i}]: unknown method {m!r}")

    clf_raw = _expect(raw, "classifiers", list, "", default=[{"algorithm": "GaussianNB"}])
    specs = []
    for i, entry in enumerate(clf_raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"classifiers[{i}]: expected an object")
        alg = _expect(entry, "algorithm", str, f"classifiers[{i}].", required=True)
        if alg not in ALGORITHMS:
            raise ConfigError(f"classifiers[{i}].algorithm: unknown algorithm {alg!r}")
        specs.append(
            ClassifierSpec(
                algorithm=alg,
                num_trees=_expect(entry, "num_trees", int, f"classifiers[{i}].", default=20),
                seed=_expect(entry, "seed", int, f"classifiers[{i}].", default=0),
            )
        )

    ea = _parse_ea(_expect(raw, "ea", dict, "", default={}), "ea.")
    config = RunConfig(
        signalset=sset,
        structure=structure,
        classifier_specs=tuple(specs),
        methods=methods,
        cv_folds=_expect(raw, "cv_folds", int, "", default=10),
        inner_folds=_expect(raw, "inner_folds", int, "", default=3),
        repetitions=_expect(raw, "repetitions", int, "", default=20),
        inner_repetitions=_expect(raw, "inner_repetitions", int, "", default=5),
        feature_fraction=_expect(raw, "feature_fraction", float, "", default=0.5),
        ea_params=ea,
        exhaustive_limit=_expect(raw, "exhaustive_limit", int, "", default=500),
        master_seed=_expect(raw, "master_seed", int, "", default=0),
    )
    out_dir = Path(_expect(raw, "output_dir", str, "", default="out"))
    return config, raw, out_dir


def _config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_manifest(out_dir: Path, raw: dict, seed: int) -> None:
    manifest = {
        "config_hash": _config_hash(raw),
        "master_seed": seed,
        "version": ctxclf.__version__,
        "config": raw,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def cmd_validate(args) -> int:
    try:
        structure = load_structure(args.structure)
    except (OSError, StructureError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    violations = validate_structure(structure)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_ERROR
    c = structure.num_classes
    print(f"OK, C={c}, M={2 * c}, L={structure.num_boxes}")
    return EXIT_OK


def _table_from_file(path) -> ConstraintTable:
    with open(path) as fh:
        raw = json.load(fh)
    num_classes = _expect(raw, "num_classes", int, "", required=True)
    permitted_raw = _expect(raw, "permitted", dict, "", required=True)
    permitted = {}
    for key, classes in permitted_raw.items():
        if not isinstance(classes, list):
            raise ConfigError(f"permitted.{key}: expected a list of classes")
        permitted[int(key)] = tuple(int(c) for c in classes)
    return ConstraintTable(num_classes=num_classes, permitted=permitted)


def cmd_enumerate(args) -> int:
    try:
        if args.table:
            table = _table_from_file(args.table)
            structure = None
        else:
            structure = load_structure(args.structure)
            violations = validate_structure(structure)
            if violations:
                for v in violations:
                    print(f"violation: {v}", file=sys.stderr)
                return EXIT_ERROR
            table = derive_constraints(structure)
        feasible = enumerate_feasible(table, structure)
    except InfeasibleStructure as exc:
        print(0)
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, CtxclfError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(len(feasible))
    if args.out:
        payload = {
            "num_classes": table.num_classes,
            "count": len(feasible),
            "bindings": [list(b.secondary) for b in feasible],
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if feasible else EXIT_INFEASIBLE


def cmd_optimize(args) -> int:
    """Search the best binding on the full dataset and write it with its trace."""
    from ctxclf.evaluation import _binding_fitness  # shared inner-CV objective

    try:
        workers_from_env()
        config, raw, out_dir = load_run_config(args.config)
    except (OSError, CtxclfError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out_dir.mkdir(parents=True, exist_ok=True)

    from ctxclf.features import feature_matrix

    X, y = feature_matrix(config.signalset)
    feasible = feasible_set(config.structure)
    results = {}
    for spec in config.classifier_specs:
        fitness = _binding_fitness(config, spec, X, y, list(range(len(y))), fold=0)
        if len(feasible) <= config.exhaustive_limit:
            best, value, _ = exhaustive_search(feasible, fitness)
            mode = "exhaustive"
        else:
            params = replace(
                config.ea_params, seed=derive_seed(config.master_seed, "ea", 0, spec.algorithm)
            )
            best, value, trace = ea_search(feasible, fitness, params)
            (out_dir / f"trace_{spec.algorithm}.csv").write_text(trace_to_csv(trace))
            mode = "ea"
        results[spec.algorithm] = {
            "binding": list(best.secondary),
            "fitness": value,
            "mode": mode,
            "evaluations": fitness.evaluations,
        }
        print(f"{spec.algorithm}: binding={list(best.secondary)} fitness={value:.4f} ({mode})")
    (out_dir / "bindings.json").write_text(json.dumps(results, indent=2) + "\n")
    _write_manifest(out_dir, raw, config.master_seed)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        workers_from_env()
        config, raw, out_dir = load_run_config(args.config)
    except (OSError, CtxclfError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out_dir.mkdir(parents=True, exist_ok=True)
    table = run_experiment(config)
    (out_dir / "metrics.csv").write_text(table.to_csv())
    (out_dir / "summary.json").write_text(json.dumps(table.summary(), indent=2) + "\n")
    for (alg, fold), trace in table.optimizer_traces.items():
        (out_dir / f"trace_{alg}_fold{fold}.csv").write_text(trace_to_csv(trace))
    _write_manifest(out_dir, raw, config.master_seed)
    print(f"wrote {out_dir / 'metrics.csv'} ({len(table.rows)} rows)")
    return EXIT_OK


def _read_metrics_csv(path) -> MetricsTable:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "method,classifier,fold,zo,sqcov":
            raise ConfigError(f"{path}: unexpected header {header!r}")
        for line in fh:
            method, clf, fold, zo, sqcov = line.strip().split(",")
            rows.append(
                MetricsRow(
                    method=method, classifier=clf, fold=int(fold),
                    zo=float(zo), sqcov=float(sqcov),
                )
            )
    return MetricsTable(rows=tuple(rows), sequences_per_fold=0)


def report_from_table(table: MetricsTable, alpha: float = 0.05) -> dict:
    """Means, stds, average ranks, and Holm-corrected pairwise tests."""
    out: dict = {"summary": table.summary()["cells"], "ranks": {}, "tests": {}}
    classifiers = sorted({r.classifier for r in table.rows})
    methods = sorted({r.method for r in table.rows})
    for clf in classifiers:
        for criterion in ("zo", "sqcov"):
            per_fold = {m: table.values(m, clf, criterion) for m in methods}
            n = min(len(v) for v in per_fold.values())
            subjects = [{m: per_fold[m][i] for m in methods} for i in range(n)]
            out["ranks"].setdefault(clf, {})[criterion] = average_ranks(subjects)
            if len(methods) >= 2 and n >= 6:
                paired = {
                    f"{a} vs {b}": (per_fold[a], per_fold[b])
                    for i, a in enumerate(methods)
                    for b in methods[i + 1 :]
                }
                out["tests"].setdefault(clf, {})[criterion] = wilcoxon_holm(paired, alpha=alpha)
    return out


def cmd_report(args) -> int:
    try:
        table = _read_metrics_csv(args.metrics)
        report = report_from_table(table, alpha=args.alpha)
    except (OSError, CtxclfError, ValueError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    for clf, crits in sorted(report["summary"].items()):
        for method, metrics in sorted(crits.items()):
            zo, sq = metrics["zo"], metrics["sqcov"]
            print(
                f"{clf:<16} {method:<6} "
                f"ZO {zo['mean']:.3f}±{zo['std']:.3f}  "
                f"SqCov {sq['mean']:.3f}±{sq['std']:.3f}"
            )
    for clf, crits in sorted(report["ranks"].items()):
        for criterion, ranks in sorted(crits.items()):
            pretty = ", ".join(f"{m}={r:.2f}" for m, r in sorted(ranks.items()))
            print(f"{clf:<16} avg rank ({criterion}): {pretty}")
    for clf, crits in sorted(report["tests"].items()):
        for criterion, tests in sorted(crits.items()):
            for name, res in sorted(tests.items()):
                mark = "*" if res["significant"] else " "
                print(f"{clf:<16} {criterion} {name}: p={res['p_value']:.4f}{mark}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxclf",
        description="Context-dependent classification of multichannel biosignal records.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a structure file")
    p.add_argument("structure")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("enumerate", help="enumerate feasible secondary bindings")
    p.add_argument("structure", nargs="?", help="structure JSON file")
    p.add_argument("--table", help="raw permitted-class table JSON instead of a structure")
    p.add_argument("--out", help="write the feasible set to this JSON file")
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("optimize", help="search the best binding for a config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("run", help="run the cross-validated experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("report", help="aggregate a metrics CSV into ranks and tests")
    p.add_argument("--metrics", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="write the full report JSON here")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "enumerate" and not (args.structure or args.table):
        print("ERROR: provide a structure file or --table", file=sys.stderr)
        return EXIT_ERROR
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
