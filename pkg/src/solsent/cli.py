"""solsent command-line interface.

Exit codes: 0 success, 1 input/config error, 2 stage failure,
3 backend protocol failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import classify, geolocate, policyindex, report
from . import stats as st


def _add_pipeline(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("pipeline", help="run the full corpus-to-tables pipeline")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--corpus")
    p.add_argument("--output-dir")
    p.add_argument("--keywords")
    p.add_argument("--stopphrases")
    p.add_argument("--gazetteer-dir")
    p.add_argument("--population")
    p.add_argument("--policy")
    p.add_argument("--annotations")
    p.add_argument("--model-path")
    p.add_argument("--backend-cmd")
    p.add_argument("--backend-addr")
    p.add_argument("--exclude-start")
    p.add_argument("--exclude-end")
    p.add_argument("--seed", type=int)


def _add_train(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("train-baseline", help="train and persist the baseline classifier")
    p.add_argument("--annotations", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--metrics-out")
    p.add_argument("--seed", type=int, default=0)


def _add_eval(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("eval-backend", help="evaluate a backend on the test split")
    p.add_argument("--annotations", required=True)
    p.add_argument("--model", help="baseline model file")
    p.add_argument("--backend-cmd", help="external backend command line")
    p.add_argument("--backend-addr", help="external backend host:port")
    p.add_argument("--seed", type=int, default=0)


def _add_index(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("index", help="compute RPS and net-metering scores from a policy CSV")
    p.add_argument("--policy", required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("--partial", action="store_true",
                   help="allow a policy CSV that does not cover all 51 states")


def _add_stats(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("stats", help="standalone robust-SE regression on a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--x", required=True, help="comma-separated predictor columns")
    p.add_argument("--robust", default="HC1", choices=["HC0", "HC1"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="solsent")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_pipeline(sub)
    _add_train(sub)
    _add_eval(sub)
    _add_index(sub)
    _add_stats(sub)
    return parser


def _cmd_pipeline(args: argparse.Namespace) -> int:
    overrides = {
        "corpus": args.corpus,
        "output_dir": args.output_dir,
        "keywords": args.keywords,
        "stopphrases": args.stopphrases,
        "gazetteer_dir": args.gazetteer_dir,
        "population": args.population,
        "policy": args.policy,
        "annotations": args.annotations,
        "model_path": args.model_path,
        "backend_cmd": args.backend_cmd,
        "backend_addr": args.backend_addr,
        "exclude_start": args.exclude_start,
        "exclude_end": args.exclude_end,
        "seed": args.seed,
    }
    config = report.RunConfig.from_json(args.config, overrides)
    manifest = report.run_pipeline(config)
    print(f"wrote {len(manifest.artifacts) + 1} artifacts to {config.output_dir}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    metrics = report.train_baseline_command(
        Path(args.annotations),
        Path(args.model_out),
        Path(args.metrics_out) if args.metrics_out else None,
        seed=args.seed,
    )
    print(f"test accuracy={metrics.accuracy:.4f} f1={metrics.f1:.4f} n={metrics.n}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    if args.backend_cmd:
        backend = classify.ExternalBackend.spawn(args.backend_cmd.split())
    elif args.backend_addr:
        backend = classify.ExternalBackend.connect(args.backend_addr)
    elif args.model:
        backend = classify.BaselineBackend.from_file(args.model)
    else:
        raise report.ConfigError("eval-backend needs --model, --backend-cmd, or --backend-addr")
    try:
        metrics = report.eval_backend_command(Path(args.annotations), backend, seed=args.seed)
    finally:
        backend.close()
    print(
        f"backend={backend.backend_id} accuracy={metrics.accuracy:.4f} "
        f"precision={metrics.precision:.4f} recall={metrics.recall:.4f} f1={metrics.f1:.4f}"
    )
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    expected = None if args.partial else frozenset(geolocate.ALL_STATE_CODES)
    profiles = policyindex.load_profiles(args.policy, expected_states=expected)
    rows = [["state", "rps_score", "nem_score"]] + [
        [p.state, f"{p.rps_score:.6f}", str(p.nem_score)] for p in profiles
    ]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        for row in rows:
            print(",".join(row))
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    x_names = [c.strip() for c in args.x.split(",") if c.strip()]
    with open(args.data, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {args.y, *x_names} - set(reader.fieldnames or [])
        if missing:
            raise report.ConfigError(f"{args.data}: missing columns {sorted(missing)}")
        rows = list(reader)
    def column(name: str) -> list[float]:
        try:
            return [float(r[name]) for r in rows]
        except ValueError:
            raise report.ConfigError(f"{args.data}: column {name!r} has non-numeric cells") from None

    y = np.array(column(args.y))
    X = np.column_stack([column(c) for c in x_names])
    result = st.ols(y, X, names=x_names, robust_flavor=args.robust)
    print(f"n={result.n} k={result.k} R2={result.r_squared:.4f} robust={result.robust_flavor}")
    for i, name in enumerate(result.names):
        print(
            f"{name:>24s}  coef={result.coef[i]: .6f}  se={result.se_classical[i]:.6f}  "
            f"robust_se={result.se_robust[i]:.6f}  t={result.t_stats[i]: .3f}  "
            f"p={result.p_values[i]:.4f}"
        )
    if result.vif:
        vifs = ", ".join(f"{n}={v:.3f}" for n, v in zip(result.vif_names, result.vif))
        print(f"VIF: {vifs} (mean {result.mean_vif:.3f})")
    return 0


_HANDLERS = {
    "pipeline": _cmd_pipeline,
    "train-baseline": _cmd_train,
    "eval-backend": _cmd_eval,
    "index": _cmd_index,
    "stats": _cmd_stats,
}

_INPUT_ERRORS = (
    report.ConfigError,
    policyindex.PolicyLoadError,
    classify.AnnotationError,
    geolocate.GazetteerError,
    FileNotFoundError,
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except classify.BackendProtocolError as exc:
        print(f"backend protocol error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # stage failure
        print(f"stage failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
