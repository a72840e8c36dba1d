"""Command-line entry point. Exit codes: 0 ok, 1 invalid input or config, 2 runtime failure."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .classifier import DatasetError, TooFewEventsError
from .features import TableError
from .ingestion import EmptyEventError, ParseError, SchemaError
from .pipeline import GROUP_NAMES, ConfigError, PipelineError, PipelineRun, load_config, validate_artifacts
from .synth import SynthSpecError, load_spec, synthesize

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
_INVALID = (ConfigError, SynthSpecError, ParseError, SchemaError, EmptyEventError, TableError,
            DatasetError, TooFewEventsError)

STAGES = {
    "ingest": ("ingest",),
    "train-credibility": ("credibility_model",),
    "score": ("tweet_scores",),
    "features": ("interval_features", "credit_plot"),
    "fit-epi": ("epi_features",),
    "dsts": ("write_dsts",),
    "train": ("train_models",),
    "evaluate": ("evaluate",),
    "importance": ("importance",),
}


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in GROUP_NAMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown feature groups {bad}; choose from {GROUP_NAMES}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration (JSON)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", type=Path, default=Path("artifacts"), help="output directory")
    common.add_argument("--hours", type=_int_list, help="prefix hours, e.g. 1,6,12,24,48")
    common.add_argument("--model", choices=("rf", "svm"), help="classifier to train/evaluate")
    common.add_argument("--feature-groups", type=_name_list,
                        help=f"comma-separated subset of {','.join(GROUP_NAMES)}")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="earlyrumor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    syn = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    syn.add_argument("--spec", type=Path, help="corpus spec (JSON); the bundled benchmark by default")
    syn.add_argument("--n-per-class", type=int, help="override the number of events per class")
    for name, stages in STAGES.items():
        sub.add_parser(name, parents=[common], help=f"run up to stage(s): {', '.join(stages)}")
    sub.add_parser("run", parents=[common], help="recompute every stage end to end")
    sub.add_parser("validate", parents=[common],
                   help="check the config and every artifact in --out against its schema")
    return parser


def _config(args):
    if args.config is None:
        raise ConfigError("--config is required for this command")
    overrides = {"seed": args.seed, "hours": args.hours,
                 "models": [args.model] if args.model else None,
                 "feature_groups": args.feature_groups}
    return load_config(args.config, **overrides)


def _dispatch(args) -> int:
    if args.command == "synth":
        spec = load_spec(args.spec).with_overrides(seed=args.seed,
                                                   n_events_per_class=args.n_per_class)
        paths = synthesize(spec, args.out)
        print(f"wrote {len(paths)} files to {args.out}")
        return EXIT_OK
    cfg = _config(args)
    if args.command == "validate":
        problems = validate_artifacts(args.out, cfg.hash()) if args.out.is_dir() else []
        for p in problems:
            print(p, file=sys.stderr)
        print("valid" if not problems else f"{len(problems)} problem(s)")
        return EXIT_OK if not problems else EXIT_INVALID
    if args.command == "run":
        run = PipelineRun(cfg, args.out, reuse=False)
        run.run_all()
    else:
        run = PipelineRun(cfg, args.out, reuse=True)
        for stage in STAGES[args.command]:
            getattr(run, stage)()
        run.write_manifest()
    print(f"artifacts in {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except _INVALID as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PipelineError as exc:
        if isinstance(exc.cause, _INVALID):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001  (any other failure is a runtime error)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
