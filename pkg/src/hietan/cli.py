"""Command-line entry point: validate / cv / train / predict / features / synth.

Exit codes: 0 success, 1 operational error (bad paths, bad usage, parse
failures), 2 validation findings. Every emitted report echoes the full
configuration, and all randomness flows from the single --seed flag.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bayes import fit, load_model, predict, save_model
from .dataset import (
    Dataset,
    generate_synthetic_with_rule,
    load_dataset,
    repair_propagation,
    save_dataset,
    validate_propagation,
)
from .errors import HieTanError, MissingClassColumn, WrongMethod
from .evaluate import (
    ALL_METHODS,
    METHOD_HIE_TAN,
    METHOD_HIE_TAN_LITE,
    METHOD_TAN,
    FeatureUsageReport,
    derive_seed,
    fold_rank_summary,
    run_cv_experiment,
)
from .hie_mst import hie_mst
from .hierarchy import build_dag, dag_from_file, random_dag, write_dag_file
from .mutual_info import rank_edges
from .tan import learn_tan_structure

_METHOD_FLAGS = {
    "tan": METHOD_TAN,
    "hie-tan": METHOD_HIE_TAN,
    "hie-tan-lite": METHOD_HIE_TAN_LITE,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this tool reserves 2 for
    # validation findings, so route usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hietan", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        p.add_argument("--data", required=True, help="dataset CSV path")
        p.add_argument("--dag", required=True, help="hierarchy TSV path")
        if with_method:
            p.add_argument(
                "--method",
                default="all",
                choices=sorted(_METHOD_FLAGS) + ["all"],
            )
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--smoothing", type=float, default=1.0)
        p.add_argument("--jobs", type=int, default=1)

    p_val = sub.add_parser("validate", help="check the hierarchy propagation rule")
    p_val.add_argument("--data", required=True)
    p_val.add_argument("--dag", required=True)
    p_val.add_argument("--repair", action="store_true",
                       help="write a repaired copy instead of reporting")
    p_val.add_argument("--out", help="output CSV for --repair "
                       "(default: <data>.repaired.csv)")

    p_cv = sub.add_parser("cv", help="cross-validated experiment")
    add_common(p_cv)
    p_cv.add_argument("--out", default="results.json")
    p_cv.add_argument("--alpha", type=float, default=0.05)
    p_cv.add_argument("--trace", help="write a JSON-lines decision trace here")

    p_train = sub.add_parser("train", help="fit a model on the full dataset")
    add_common(p_train)
    p_train.add_argument("--model", required=True, help="output model JSON")

    p_pred = sub.add_parser("predict", help="classify instances with a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", help="output CSV (default: stdout)")

    p_feat = sub.add_parser("features", help="feature usage report (lazy method)")
    add_common(p_feat)
    p_feat.add_argument("--top", type=int, default=20)
    p_feat.add_argument("--out", help="also write the full report as JSON")

    p_synth = sub.add_parser("synth", help="generate a hierarchy-consistent dataset")
    p_synth.add_argument("--dag", help="existing hierarchy TSV to sample under")
    p_synth.add_argument("--random-features", type=int,
                         help="generate a random hierarchy with this many features")
    p_synth.add_argument("--random-edges", type=int, default=0)
    p_synth.add_argument("--dag-out", help="where to write a generated hierarchy")
    p_synth.add_argument("--instances", type=int, default=100)
    p_synth.add_argument("--leaf-density", type=float, default=0.3)
    p_synth.add_argument("--class-noise", type=float, default=0.05)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output dataset CSV")
    return parser


def _load_inputs(args) -> tuple[Dataset, "FeatureDag"]:
    ds = load_dataset(args.data)
    dag = dag_from_file(args.dag, ds.feature_names)
    return ds, dag


def _methods_from_flag(flag: str) -> list[str]:
    if flag == "all":
        return list(ALL_METHODS)
    return [_METHOD_FLAGS[flag]]


def _check_folds(args) -> None:
    if args.folds < 2:
        raise WrongUsage(f"--folds must be at least 2, got {args.folds}")


class WrongUsage(HieTanError):
    pass


def _json_dump(payload: dict, path) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_validate(args) -> int:
    ds = load_dataset(args.data)
    dag = dag_from_file(args.dag, ds.feature_names)
    violations = validate_propagation(ds, dag)
    if not violations:
        print(f"{args.data}: consistent ({ds.n_instances} instances, "
              f"{ds.n_features} features)")
        return 0
    if args.repair:
        repaired = repair_propagation(ds, dag)
        out = args.out or f"{args.data}.repaired.csv"
        save_dataset(repaired, out)
        print(f"repaired {len(violations)} violation(s) -> {out}")
        return 0
    for row, f, a in violations:
        print(
            f"instance={row} feature={ds.feature_names[f]} "
            f"ancestor={ds.feature_names[a]}"
        )
    print(f"{len(violations)} violation(s) found", file=sys.stderr)
    return 2


def _usage_payload(usage: FeatureUsageReport, names) -> dict:
    return {
        "freq_of_selection": {
            names[f]: int(c) for f, c in enumerate(usage.freq_of_selection)
        },
        "freq_in_edges": {
            names[f]: int(c) for f, c in enumerate(usage.freq_in_edges)
        },
    }


def cmd_cv(args) -> int:
    _check_folds(args)
    ds, dag = _load_inputs(args)
    methods = _methods_from_flag(args.method)

    trace_file = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        sink = None
        if trace_file is not None:
            def sink(entry):
                trace_file.write(json.dumps(entry, sort_keys=True) + "\n")
        result = run_cv_experiment(
            ds, dag, methods, args.folds, args.seed,
            smoothing=args.smoothing, jobs=args.jobs, trace_sink=sink,
        )
    finally:
        if trace_file is not None:
            trace_file.close()

    payload = {
        "config": {
            "dataset": str(args.data),
            "dag": str(args.dag),
            "methods": methods,
            "folds": args.folds,
            "seed": args.seed,
            "smoothing": args.smoothing,
            "jobs": args.jobs,
            "alpha": args.alpha,
        },
        "library_version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "n_instances": result.n_instances,
        "n_features": result.n_features,
        "methods": {},
    }
    for m, res in result.methods.items():
        payload["methods"][m] = {
            "folds": [
                {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "gmean": g}
                for c, g in zip(res.fold_counts, res.fold_gmeans)
            ],
            "mean_gmean": res.mean_gmean,
        }
        if res.usage is not None:
            payload["methods"][m]["feature_usage"] = _usage_payload(
                res.usage, ds.feature_names
            )

    table, holm = fold_rank_summary(result, args.alpha)
    if table is not None:
        payload["rank_table"] = {
            "blocks": "folds",
            "average_rank": table.average_rank,
            "wins": table.wins,
        }
    if holm is not None:
        payload["holm"] = {
            "control": holm.control,
            "friedman_statistic": holm.statistic,
            "friedman_p_value": holm.p_value,
            "comparisons": [
                {
                    "method": c.method,
                    "z": c.z,
                    "p_value": c.p_value,
                    "adjusted_alpha": c.adjusted_alpha,
                    "significant": c.significant,
                }
                for c in holm.comparisons
            ],
        }

    _json_dump(payload, args.out)
    print(f"{'method':<14} {'mean GMean':>10}   per-fold")
    for m, res in result.methods.items():
        folds = " ".join(f"{g:.3f}" for g in res.fold_gmeans)
        print(f"{m:<14} {res.mean_gmean:>10.4f}   {folds}")
    print(f"results written to {args.out}")
    return 0


def cmd_train(args) -> int:
    _check_folds(args)
    method = args.method
    if method == "all":
        raise WrongUsage("train needs a single --method (tan or hie-tan)")
    if _METHOD_FLAGS[method] == METHOD_HIE_TAN_LITE:
        raise WrongMethod(
            "hie-tan-lite is a lazy method: it learns one tree per test "
            "instance, so there is no single model to save (use cv/features)"
        )
    ds, dag = _load_inputs(args)
    edges = rank_edges(ds, dag, args.smoothing)
    seed = derive_seed(args.seed, 0)
    if _METHOD_FLAGS[method] == METHOD_TAN:
        tree = learn_tan_structure(edges, ds.n_features, seed)
    else:
        tree = hie_mst(edges, dag, ds.n_features, seed)
    clf = fit(ds, tree, None, args.smoothing)
    save_model(clf, args.model)
    print(
        f"trained {method} on {ds.n_instances} instances "
        f"({len(tree.edges())} tree edges) -> {args.model}"
    )
    return 0


def _load_instances_for_predict(path, expected_names):
    try:
        ds = load_dataset(path)
        return ds.values
    except MissingClassColumn:
        pass
    # Headers without the class column are accepted for unlabeled data.
    import numpy as np

    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    names = [t.strip() for t in lines[0].split(",")]
    if tuple(names) != tuple(expected_names):
        raise HieTanError(
            "prediction data features do not match the model's feature names"
        )
    rows = [[int(t) for t in ln.split(",")] for ln in lines[1:]]
    return np.array(rows, dtype=np.uint8).reshape(len(rows), len(names))


def cmd_predict(args) -> int:
    clf = load_model(args.model)
    values = _load_instances_for_predict(args.data, clf.feature_names)
    lines = ["instance,label,log_posterior_0,log_posterior_1"]
    for idx, row in enumerate(values):
        pred = predict(clf, row)
        lines.append(
            f"{idx},{pred.label},{pred.log_posterior[0]!r},{pred.log_posterior[1]!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"predictions written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_features(args) -> int:
    _check_folds(args)
    if args.method not in ("all", "hie-tan-lite"):
        raise WrongMethod(
            f"the features report is defined for hie-tan-lite, not {args.method}"
        )
    ds, dag = _load_inputs(args)
    if ds.n_instances == 0:
        print("empty dataset: empty report")
        return 0
    result = run_cv_experiment(
        ds, dag, [METHOD_HIE_TAN_LITE], args.folds, args.seed,
        smoothing=args.smoothing, jobs=args.jobs,
    )
    usage = result.methods[METHOD_HIE_TAN_LITE].usage
    names = ds.feature_names
    for criterion, title in (
        ("freq_of_selection", "Freq. of Selection"),
        ("freq_in_edges", "Freq. in Edges"),
    ):
        print(f"\n{title} (top {args.top})")
        for name, count in usage.top(criterion, args.top, names):
            print(f"  {name:<24} {count}")
    if args.out:
        payload = {
            "config": {
                "dataset": str(args.data),
                "dag": str(args.dag),
                "method": "hie-tan-lite",
                "folds": args.folds,
                "seed": args.seed,
                "smoothing": args.smoothing,
            },
            "library_version": __version__,
            "usage": _usage_payload(usage, names),
        }
        _json_dump(payload, args.out)
        print(f"\nreport written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    if (args.dag is None) == (args.random_features is None):
        raise WrongUsage("give exactly one of --dag or --random-features")
    if args.dag is not None:
        from .hierarchy import read_dag_file

        pairs = read_dag_file(args.dag)
        names = []
        seen = set()
        for p, c in pairs:
            for tok in (p, c):
                if tok not in seen:
                    seen.add(tok)
                    names.append(tok)
        index = {name: i for i, name in enumerate(names)}
        dag = build_dag(len(names), [(index[p], index[c]) for p, c in pairs])
    else:
        n = args.random_features
        names = [f"f{i}" for i in range(n)]
        edge_list = random_dag(n, args.random_edges, args.seed)
        dag = build_dag(n, edge_list)
        if args.dag_out:
            write_dag_file(args.dag_out, sorted(dag.edges), names)
            print(f"hierarchy written to {args.dag_out}")

    ds, rule = generate_synthetic_with_rule(
        dag, args.instances, args.leaf_density, args.class_noise, args.seed,
        feature_names=names,
    )
    save_dataset(ds, args.out)
    print(
        f"{ds.n_instances} instances x {ds.n_features} features -> {args.out}\n"
        f"planted rule: label = XOR({names[rule.feature_a]}, "
        f"{names[rule.feature_b]}), noise {args.class_noise}, seed {args.seed}"
    )
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "cv": cmd_cv,
    "train": cmd_train,
    "predict": cmd_predict,
    "features": cmd_features,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (HieTanError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
