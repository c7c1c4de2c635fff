"""
Experiment orchestration behind the command-line interface.

Every command takes an `ExperimentConfig`, seeds everything from it and
writes its artifacts into a run directory (`runs/<UTC timestamp>/` by
default). When the official shared-task files are absent the bundled
synthetic corpus is used instead and acceptance checks are skipped.
"""
import json
import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.classifiers import MODEL_KINDS, ClassicalHyperparameters, fit_classical
from app.classifiers.persistence import TextClassifier, load_model, save_model
from app.config import settings
from app.corpus import (
    CorpusStats,
    Dataset,
    Label,
    load_tsv,
    split_train_dev,
    word_count_stats,
    write_tsv,
)
from app.encoder.model import EncoderConfig
from app.encoder.training import (
    encoder_predict,
    encoder_train,
    is_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from app.errors import ConfigError, TweetInfoError
from app.features import Featurizer, dump_vocabulary
from app.metrics import EvalReport, evaluate, f1_breakdown
from app.preprocess import Lexicons, load_lexicons, preprocess_texts
from app.synthetic import synthetic_splits

logger = logging.getLogger("tweetinfo.harness")

ENCODER = "encoder"
FEATURE_CHOICES = ("bow", "tfidf", "subword")
ENCODER_ROW_LABEL = "from-scratch encoder (not comparable to pretrained transformers)"

# reference F1 per (model, features) for the conventional models
REFERENCE_F1: Dict[Tuple[str, str], float] = {
    ("logreg", "bow"): 0.78318,
    ("logreg", "tfidf"): 0.78331,
    ("svm", "bow"): 0.78054,
    ("svm", "tfidf"): 0.78472,
    ("nb", "bow"): 0.76371,
    ("nb", "tfidf"): 0.74449,
    ("forest", "bow"): 0.55489,
    ("forest", "tfidf"): 0.56447,
    ("mlp", "bow"): 0.78695,
    ("mlp", "tfidf"): 0.79912,
}
DEFAULT_TOLERANCE = 0.03
FOREST_TOLERANCE = 0.08
ENCODER_MIN_F1 = 0.65


class Hyperparameters(ClassicalHyperparameters):
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)


class ExperimentConfig(BaseModel):
    """One experiment: data, lexicons, model, features, seed and overrides."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    train_path: Optional[Path] = None
    valid_path: Optional[Path] = None
    lexicon_dir: Optional[Path] = None
    emoji_source: str = Field(default_factory=lambda: settings.EMOJI_SOURCE)
    model: str = "logreg"
    features: str = "bow"
    seed: int = Field(default_factory=lambda: settings.SEED)
    hyperparameters: Hyperparameters = Field(default_factory=Hyperparameters)

    @model_validator(mode="before")
    @classmethod
    def _default_features(cls, values: Any) -> Any:
        if isinstance(values, dict) and values.get("features") is None:
            default = "subword" if values.get("model") == ENCODER else "bow"
            values = {**values, "features": default}
        return values

    @model_validator(mode="after")
    def _check_pairing(self) -> "ExperimentConfig":
        if self.model != ENCODER and self.model not in MODEL_KINDS:
            valid = ", ".join(MODEL_KINDS + (ENCODER,))
            raise ConfigError(f"Invalid model: {self.model}. Must be one of: {valid}")
        if self.features not in FEATURE_CHOICES:
            raise ConfigError(
                f"Invalid features: {self.features}. Must be one of: {', '.join(FEATURE_CHOICES)}"
            )
        if (self.model == ENCODER) != (self.features == "subword"):
            raise ConfigError(
                f"Model {self.model} cannot use {self.features} features: "
                "the encoder needs subword features, classical models need bow or tfidf"
            )
        if self.emoji_source not in ("file", "package"):
            raise ConfigError(
                f"Invalid emoji source: {self.emoji_source}. Must be one of: file, package"
            )
        return self

    @property
    def is_encoder(self) -> bool:
        return self.model == ENCODER

    @property
    def encoder_config(self) -> EncoderConfig:
        return self.hyperparameters.encoder.model_copy(update={"seed": self.seed})

    @classmethod
    def load(cls, path: Optional[Path] = None, **overrides: Any) -> "ExperimentConfig":
        """
        Build a config from an optional JSON file plus flag overrides.

        `None` overrides are ignored, so unset flags keep file values.

        Raises:
            ConfigError: unreadable file or invalid values.
        """
        values: Dict[str, Any] = {}
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"Missing config file: {path}")
            try:
                values = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path} is not valid JSON: {exc}") from None
            if not isinstance(values, dict):
                raise ConfigError(f"{path} must contain a JSON object")
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**values)
        except ValidationError as exc:
            details = "; ".join(
                f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}"
                for e in exc.errors()
            )
            raise ConfigError(details) from None


def seed_everything(seed: int) -> None:
    """Seed Python, NumPy and torch and request deterministic torch kernels."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


def make_run_dir(run_dir: Optional[Path] = None) -> Path:
    if run_dir is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        run_dir = settings.RUNS_DIR / stamp
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def _write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


class ExperimentData(BaseModel):
    model_config = ConfigDict(frozen=True)

    train: Dataset
    valid: Dataset
    official: bool


def load_experiment_data(config: ExperimentConfig) -> ExperimentData:
    """
    Official train/validation files, or the synthetic corpus.

    Explicitly configured paths must exist; the synthetic fallback only
    applies when the default data directory lacks the files.

    Raises:
        DataError: an explicitly configured file is missing or malformed.
    """
    explicit = config.train_path is not None or config.valid_path is not None
    train_path = config.train_path or settings.train_path
    valid_path = config.valid_path or settings.valid_path
    if explicit or (train_path.exists() and valid_path.exists()):
        return ExperimentData(
            train=load_tsv(train_path, name="train"),
            valid=load_tsv(valid_path, name="valid"),
            official=True,
        )
    logger.warning(
        "Official data not found under %s; using the synthetic corpus (acceptance skipped)",
        settings.DATA_DIR,
    )
    train, valid = synthetic_splits(config.seed)
    return ExperimentData(train=train, valid=valid, official=False)


def experiment_lexicons(config: ExperimentConfig) -> Lexicons:
    return load_lexicons(config.lexicon_dir, emoji_source=config.emoji_source)


def clean_dataset(dataset: Dataset, lexicons: Lexicons) -> Dataset:
    return dataset.with_texts(preprocess_texts(dataset.texts, lexicons), name=dataset.name)


class SplitStats(BaseModel):
    split: str
    before: CorpusStats
    after: CorpusStats


def stats_table(rows: Sequence[SplitStats]) -> str:
    header = ("split", "stage", "informative", "uninformative", "wc_max", "wc_min", "wc_avg")
    lines = [header]
    for row in rows:
        for stage, s in (("before", row.before), ("after", row.after)):
            lines.append(
                (
                    row.split,
                    stage,
                    str(s.count_informative),
                    str(s.count_uninformative),
                    str(s.wc_max),
                    str(s.wc_min),
                    f"{s.wc_avg:.3f}",
                )
            )
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(widths[i]) for i, c in enumerate(line)) for line in lines)


def cmd_stats(config: ExperimentConfig, run_dir: Optional[Path] = None) -> List[SplitStats]:
    """Class counts and word-count statistics before and after preprocessing."""
    seed_everything(config.seed)
    data = load_experiment_data(config)
    lexicons = experiment_lexicons(config)
    rows = []
    for dataset in (data.train, data.valid):
        rows.append(
            SplitStats(
                split=dataset.name,
                before=word_count_stats(dataset),
                after=word_count_stats(clean_dataset(dataset, lexicons)),
            )
        )
    if run_dir is not None:
        _write_json(run_dir / "stats.json", [r.model_dump() for r in rows])
    return rows


def cmd_preprocess(config: ExperimentConfig, run_dir: Path) -> List[Path]:
    """
    Write cleaned copies of the train and validation files.

    Tweets that clean to an empty string cannot be stored in the TSV
    layout; they are left out of the dump and counted in a warning.
    """
    data = load_experiment_data(config)
    lexicons = experiment_lexicons(config)
    written = []
    for dataset in (data.train, data.valid):
        cleaned = preprocess_texts(dataset.texts, lexicons)
        keep = [i for i, text in enumerate(cleaned) if text]
        if len(keep) < len(dataset):
            dropped = [dataset.tweets[i].id for i in range(len(dataset)) if not cleaned[i]]
            logger.warning(
                "%s: %d tweets are empty after cleaning and were not written: %s",
                dataset.name,
                len(dropped),
                ", ".join(dropped),
            )
        kept = dataset.subset(keep).with_texts([cleaned[i] for i in keep])
        path = run_dir / f"{dataset.name}.clean.tsv"
        write_tsv(kept, path)
        written.append(path)
    logger.info("Wrote %d cleaned files to %s", len(written), run_dir)
    return written


def train_classical(
    kind: str,
    features: str,
    train: Dataset,
    lexicons: Lexicons,
    hyper: ClassicalHyperparameters,
    seed: int,
) -> TextClassifier:
    """Fit the featurizer on cleaned train texts, then the model."""
    cleaned = preprocess_texts(train.texts, lexicons)
    featurizer = Featurizer.fit(features, cleaned)
    X = featurizer.transform(cleaned)
    params = fit_classical(kind, X, train.labels, hyper, seed=seed)
    return TextClassifier(
        kind=kind,
        featurizer=featurizer,
        params=params,
        lexicons=lexicons,
        hyperparameters=hyper.model_dump(exclude={"encoder"}),
    )


def _evaluate_classifier(classifier: TextClassifier, dataset: Dataset) -> EvalReport:
    return evaluate(classifier.predict_labels(dataset.texts), dataset.labels)


def cmd_train_eval(config: ExperimentConfig, run_dir: Path) -> EvalReport:
    """
    Train on the train split and evaluate on validation.

    Writes `report.json`, the model artifact (`model.json` or
    `encoder.pt` plus `train_report.json`) and, for TF-IDF, the
    vocabulary dump.
    """
    seed_everything(config.seed)
    data = load_experiment_data(config)
    lexicons = experiment_lexicons(config)

    if config.is_encoder:
        train_clean = clean_dataset(data.train, lexicons)
        valid_clean = clean_dataset(data.valid, lexicons)
        train_part, dev_part = split_train_dev(train_clean, config.seed)
        params, train_report = encoder_train(train_part, dev_part, config.encoder_config)
        report = evaluate(encoder_predict(valid_clean, params), valid_clean.labels)
        save_checkpoint(params, run_dir / "encoder.pt")
        params.vocab.save(run_dir / "subword_vocab.txt")
        _write_json(run_dir / "train_report.json", train_report.model_dump())
    else:
        classifier = train_classical(
            config.model,
            config.features,
            data.train,
            lexicons,
            config.hyperparameters,
            config.seed,
        )
        report = _evaluate_classifier(classifier, data.valid)
        save_model(classifier, run_dir / "model.json")
        if config.features == "tfidf":
            dump_vocabulary(classifier.featurizer.tfidf_model, run_dir / "vocabulary.tsv")

    _write_json(run_dir / "report.json", report.model_dump())
    logger.info("%s/%s validation F1 %.5f", config.model, config.features, report.f1)
    return report


def _predict_dataset(
    model_path: Path, dataset: Dataset, lexicons: Optional[Lexicons] = None
) -> List[Label]:
    """Labels from either a classical model artifact or an encoder checkpoint."""
    if is_checkpoint(model_path):
        params = load_checkpoint(model_path)
        return encoder_predict(clean_dataset(dataset, lexicons or load_lexicons()), params)
    return load_model(model_path, lexicons).predict_labels(dataset.texts)


def cmd_predict(
    model_path: Path, input_path: Path, output_path: Path, lexicons: Optional[Lexicons] = None
) -> Path:
    """Label an unlabeled `Id<TAB>Text` file into an `Id<TAB>Label` TSV."""
    dataset = load_tsv(input_path, labeled=False)
    labels = _predict_dataset(model_path, dataset, lexicons)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with output_path.open("w", encoding="utf-8", newline="") as handle:
        handle.write("Id\tLabel\n")
        for tweet, label in zip(dataset, labels):
            handle.write(f"{tweet.id}\t{label.value}\n")
    logger.info("Wrote %d predictions to %s", len(labels), output_path)
    return output_path


def cmd_eval(
    config: ExperimentConfig,
    run_dir: Path,
    model_path: Path,
    predict_path: Optional[Path] = None,
) -> Optional[EvalReport]:
    """
    Evaluate a saved model artifact or encoder checkpoint on the validation split.

    With `predict_path`, label that unlabeled file into
    `predictions.tsv` instead and return None.
    """
    seed_everything(config.seed)
    lexicons = experiment_lexicons(config)
    if predict_path is not None:
        cmd_predict(model_path, predict_path, run_dir / "predictions.tsv", lexicons)
        return None

    data = load_experiment_data(config)
    report = evaluate(_predict_dataset(model_path, data.valid, lexicons), data.valid.labels)
    _write_json(run_dir / "report.json", report.model_dump())
    return report


class CellResult(BaseModel):
    model: str
    features: str
    status: str = Field(..., description="ok or failed")
    f1: Optional[float] = None
    breakdown: Dict[str, float] = Field(default_factory=dict)
    reference_f1: Optional[float] = None
    delta: Optional[float] = None
    tolerance: Optional[float] = None
    within_tolerance: Optional[bool] = None
    label: Optional[str] = None
    error: Optional[str] = None


class OrderingCheck(BaseModel):
    description: str
    required: bool
    holds: Optional[bool] = None


class ReproductionReport(BaseModel):
    official_data: bool
    seed: int
    cells: List[CellResult]
    orderings: List[OrderingCheck] = Field(default_factory=list)
    acceptance_checked: bool
    passed: bool

    @property
    def failed_cells(self) -> List[CellResult]:
        return [c for c in self.cells if c.status != "ok"]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True) + "\n"


def _run_cell(
    kind: str,
    features: str,
    train: Dataset,
    valid: Dataset,
    lexicons: Lexicons,
    hyper: ClassicalHyperparameters,
    seed: int,
    cell_dir: Path,
) -> CellResult:
    started = time.perf_counter()
    try:
        classifier = train_classical(kind, features, train, lexicons, hyper, seed)
        preds = classifier.predict_labels(valid.texts)
        report = evaluate(preds, valid.labels)
        save_model(classifier, cell_dir / "model.json")
        _write_json(cell_dir / "report.json", report.model_dump())
    except Exception as exc:
        logger.error(
            "Cell %s/%s failed: %s",
            kind,
            features,
            exc,
            exc_info=not isinstance(exc, TweetInfoError),
        )
        return CellResult(
            model=kind, features=features, status="failed", error=f"{type(exc).__name__}: {exc}"
        )

    reference = REFERENCE_F1[(kind, features)]
    tolerance = FOREST_TOLERANCE if kind == "forest" else DEFAULT_TOLERANCE
    delta = report.f1 - reference
    logger.info(
        "Cell %s/%s: F1 %.5f (delta %+.5f) in %.1fs",
        kind,
        features,
        report.f1,
        delta,
        time.perf_counter() - started,
    )
    return CellResult(
        model=kind,
        features=features,
        status="ok",
        f1=report.f1,
        breakdown=f1_breakdown(preds, valid.labels),
        reference_f1=reference,
        delta=delta,
        tolerance=tolerance,
        within_tolerance=abs(delta) <= tolerance,
    )


def _run_encoder_cell(
    train: Dataset, valid: Dataset, config: EncoderConfig, seed: int, cell_dir: Path
) -> CellResult:
    try:
        train_part, dev_part = split_train_dev(train, seed)
        params, train_report = encoder_train(train_part, dev_part, config)
        preds = encoder_predict(valid, params)
        report = evaluate(preds, valid.labels)
        save_checkpoint(params, cell_dir / "encoder.pt")
        _write_json(cell_dir / "train_report.json", train_report.model_dump())
    except Exception as exc:
        logger.error(
            "Encoder cell failed: %s", exc, exc_info=not isinstance(exc, TweetInfoError)
        )
        return CellResult(
            model=ENCODER,
            features="subword",
            status="failed",
            label=ENCODER_ROW_LABEL,
            error=f"{type(exc).__name__}: {exc}",
        )
    logger.info("Encoder cell: F1 %.5f", report.f1)
    return CellResult(
        model=ENCODER,
        features="subword",
        status="ok",
        f1=report.f1,
        breakdown=f1_breakdown(preds, valid.labels),
        label=ENCODER_ROW_LABEL,
        within_tolerance=report.f1 >= ENCODER_MIN_F1,
    )


def _ordering_checks(cells: Sequence[CellResult]) -> List[OrderingCheck]:
    f1 = {(c.model, c.features): c.f1 for c in cells if c.status == "ok"}

    def holds(*keys) -> bool:
        return all(k in f1 for k in keys)

    checks = []
    classical = {k: v for k, v in f1.items() if k[0] != ENCODER}
    best = ("mlp", "tfidf")
    checks.append(
        OrderingCheck(
            description="mlp/tfidf is the best conventional cell",
            required=True,
            holds=(
                best in classical and all(classical[best] >= v for v in classical.values())
            )
            if len(classical) == len(REFERENCE_F1)
            else None,
        )
    )
    checks.append(
        OrderingCheck(
            description="nb prefers bow over tfidf",
            required=True,
            holds=f1[("nb", "bow")] > f1[("nb", "tfidf")]
            if holds(("nb", "bow"), ("nb", "tfidf"))
            else None,
        )
    )
    for kind in ("logreg", "svm", "forest", "mlp"):
        checks.append(
            OrderingCheck(
                description=f"{kind}: tfidf >= bow",
                required=False,
                holds=f1[(kind, "tfidf")] >= f1[(kind, "bow")]
                if holds((kind, "tfidf"), (kind, "bow"))
                else None,
            )
        )
    return checks


def cmd_reproduce(
    config: ExperimentConfig,
    run_dir: Path,
    jobs: int = 1,
    skip_encoder: bool = False,
) -> ReproductionReport:
    """
    Run all ten conventional cells plus the from-scratch encoder.

    Writes `reproduction.json` (no timestamps or durations, so repeated
    runs with one seed are byte-identical) and `reproduction.txt`.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1, got {jobs}")
    seed_everything(config.seed)
    data = load_experiment_data(config)
    lexicons = experiment_lexicons(config)
    hyper = ClassicalHyperparameters(**config.hyperparameters.model_dump(exclude={"encoder"}))

    grid = [(kind, features) for kind in MODEL_KINDS for features in ("bow", "tfidf")]
    cell_args = [
        (kind, features, data.train, data.valid, lexicons, hyper, config.seed,
         run_dir / "cells" / f"{kind}-{features}")
        for kind, features in grid
    ]
    if jobs == 1:
        cells = [_run_cell(*args) for args in cell_args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, *zip(*cell_args)))

    if not skip_encoder:
        train_clean = clean_dataset(data.train, lexicons)
        valid_clean = clean_dataset(data.valid, lexicons)
        cells.append(
            _run_encoder_cell(
                train_clean,
                valid_clean,
                config.encoder_config,
                config.seed,
                run_dir / "cells" / "encoder-subword",
            )
        )

    orderings = _ordering_checks(cells)
    all_ok = all(c.status == "ok" for c in cells)
    if data.official:
        passed = (
            all_ok
            and all(c.within_tolerance for c in cells)
            and all(o.holds for o in orderings if o.required)
        )
    else:
        passed = all_ok

    report = ReproductionReport(
        official_data=data.official,
        seed=config.seed,
        cells=cells,
        orderings=orderings,
        acceptance_checked=data.official,
        passed=passed,
    )
    (run_dir / "reproduction.json").write_text(report.to_json(), encoding="utf-8")
    (run_dir / "reproduction.txt").write_text(reproduction_table(report) + "\n", encoding="utf-8")
    return report


def reproduction_table(report: ReproductionReport) -> str:
    def fmt(value: Optional[float], pattern: str = ".5f") -> str:
        return "-" if value is None else format(value, pattern)

    header = ("model", "features", "reference", "reproduced", "delta", "ok")
    lines = [header]
    for c in report.cells:
        name = c.label or c.model
        if c.status != "ok":
            lines.append((name, c.features, fmt(c.reference_f1), "FAILED", "-", "no"))
            continue
        ok = "-" if not report.acceptance_checked else ("yes" if c.within_tolerance else "no")
        lines.append(
            (name, c.features, fmt(c.reference_f1), fmt(c.f1), fmt(c.delta, "+.5f"), ok)
        )
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    table = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip() for line in lines
    ]
    if not report.acceptance_checked:
        table.append("")
        table.append("synthetic corpus: reference values are not comparable, acceptance skipped")
    for o in report.orderings:
        state = "n/a" if o.holds is None else ("holds" if o.holds else "VIOLATED")
        table.append(f"{'required' if o.required else 'observed'}: {o.description}: {state}")
    return "\n".join(table)
