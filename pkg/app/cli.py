"""Command-line entry point: `tweetinfo <command> [options]`."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.classifiers import MODEL_KINDS
from app.config import settings
from app.errors import ArtifactError, ConfigError, ConvergenceError, DataError
from app.harness import (
    ENCODER,
    FEATURE_CHOICES,
    ExperimentConfig,
    cmd_eval,
    cmd_preprocess,
    cmd_reproduce,
    cmd_stats,
    cmd_train_eval,
    make_run_dir,
    reproduction_table,
    stats_table,
)

logger = logging.getLogger("tweetinfo.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ACCEPTANCE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--seed", type=int, help=f"Global seed (default {settings.SEED})")
    common.add_argument("--train", type=Path, dest="train_path", help="Training TSV")
    common.add_argument("--valid", type=Path, dest="valid_path", help="Validation TSV")
    common.add_argument("--lexicon-dir", type=Path, help="Directory with emoji/contraction TSVs")
    common.add_argument("--emoji-source", choices=("file", "package"))
    common.add_argument("--run-dir", type=Path, help="Artifact directory (default runs/<UTC time>)")
    common.add_argument("--log-level", default=settings.LOG_LEVEL)

    model_args = argparse.ArgumentParser(add_help=False)
    model_args.add_argument("--model", choices=MODEL_KINDS + (ENCODER,))
    model_args.add_argument("--features", choices=FEATURE_CHOICES)

    parser = _Parser(prog="tweetinfo", description="COVID-19 informative tweet classification")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("stats", parents=[common], help="Class counts and word-count statistics")
    sub.add_parser("preprocess", parents=[common], help="Write cleaned train/valid files")
    sub.add_parser("train", parents=[common, model_args], help="Train, evaluate, save the model")

    evaluate = sub.add_parser(
        "eval", parents=[common], help="Evaluate or apply a saved model"
    )
    evaluate.add_argument("--model-path", type=Path, required=True, help="model.json artifact")
    evaluate.add_argument(
        "--predict", type=Path, help="Unlabeled Id<TAB>Text file to label instead of evaluating"
    )

    reproduce = sub.add_parser(
        "reproduce", parents=[common], help="All conventional cells plus the encoder"
    )
    reproduce.add_argument("--jobs", type=int, default=1, help="Worker processes for cells")
    reproduce.add_argument("--skip-encoder", action="store_true")

    serve = sub.add_parser("serve", parents=[common], help="Run the prediction API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig.load(
        args.config,
        train_path=args.train_path,
        valid_path=args.valid_path,
        lexicon_dir=args.lexicon_dir,
        emoji_source=args.emoji_source,
        seed=args.seed,
        model=getattr(args, "model", None),
        features=getattr(args, "features", None),
    )


def run(args: argparse.Namespace) -> int:
    if args.command == "serve":
        import uvicorn

        uvicorn.run("app.main:app", host=args.host, port=args.port)
        return EXIT_OK

    config = _experiment_config(args)
    run_dir = make_run_dir(args.run_dir)
    logger.info("Run directory: %s", run_dir)

    if args.command == "stats":
        print(stats_table(cmd_stats(config, run_dir)))
    elif args.command == "preprocess":
        for path in cmd_preprocess(config, run_dir):
            print(path)
    elif args.command == "train":
        print(cmd_train_eval(config, run_dir).to_table())
    elif args.command == "eval":
        report = cmd_eval(config, run_dir, args.model_path, args.predict)
        print(run_dir / "predictions.tsv" if report is None else report.to_table())
    elif args.command == "reproduce":
        report = cmd_reproduce(config, run_dir, jobs=args.jobs, skip_encoder=args.skip_encoder)
        print(reproduction_table(report))
        if not report.passed:
            return EXIT_ACCEPTANCE
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"tweetinfo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(args.log_level)
    try:
        return run(args)
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_USAGE
    except (DataError, ArtifactError, ConvergenceError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
