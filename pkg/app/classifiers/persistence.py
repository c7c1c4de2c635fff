"""
Self-describing JSON artifacts for trained conventional models.

An artifact holds the magic string, the schema version, the model and
feature kinds, the hyperparameters, the fitted featurizer and the
learned parameters. `load_model` rebuilds a ready-to-use `TextClassifier`.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from app.classifiers import PARAMS_BY_KIND, ModelParams, validate_model_kind
from app.corpus import Label
from app.errors import ArtifactError, TweetInfoError
from app.features import Featurizer, Vocabulary, validate_feature_kind
from app.preprocess import Lexicons, load_lexicons, preprocess_texts

logger = logging.getLogger("tweetinfo.classifiers.persistence")

MAGIC = "tweetinfo-model"
SCHEMA_VERSION = 1


class Prediction(BaseModel):
    label: Label
    cleaned: str
    score: float = Field(..., description="Decision value, or INFORMATIVE probability")


@dataclass
class TextClassifier:
    """preprocess -> featurize -> predict over raw tweet texts."""

    kind: str
    featurizer: Featurizer
    params: ModelParams
    lexicons: Lexicons
    hyperparameters: Dict[str, Any] = field(default_factory=dict)

    @property
    def feature_kind(self) -> str:
        return self.featurizer.kind

    def clean(self, texts: Sequence[str]) -> List[str]:
        return preprocess_texts(list(texts), self.lexicons)

    def predict(self, texts: Sequence[str]) -> List[Prediction]:
        cleaned = self.clean(texts)
        X = self.featurizer.transform(cleaned)
        labels = self.params.predict(X)
        scores = self.params.scores(X)
        return [
            Prediction(label=label, cleaned=text, score=float(score))
            for label, text, score in zip(labels, cleaned, scores)
        ]

    def predict_labels(self, texts: Sequence[str]) -> List[Label]:
        return [p.label for p in self.predict(texts)]


def _featurizer_payload(featurizer: Featurizer) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "kind": featurizer.kind,
        "terms": list(featurizer.vocab.index_to_term),
    }
    if featurizer.idf is not None:
        payload["idf"] = featurizer.idf.tolist()
    return payload


def _featurizer_from_payload(payload: Dict[str, Any]) -> Featurizer:
    kind = validate_feature_kind(payload["kind"])
    vocab = Vocabulary(index_to_term=tuple(payload["terms"]))
    idf = None
    if kind == "tfidf":
        idf = np.asarray(payload["idf"], dtype=np.float64)
        if idf.shape != (len(vocab),):
            raise ArtifactError("idf length does not match the vocabulary")
    return Featurizer(kind=kind, vocab=vocab, idf=idf)


def save_model(classifier: TextClassifier, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "magic": MAGIC,
        "schema_version": SCHEMA_VERSION,
        "kind": classifier.kind,
        "feature_kind": classifier.feature_kind,
        "hyperparameters": classifier.hyperparameters,
        "featurizer": _featurizer_payload(classifier.featurizer),
        "params": classifier.params.to_payload(),
    }
    path.write_text(json.dumps(document), encoding="utf-8")
    logger.info("Saved %s/%s model to %s", classifier.kind, classifier.feature_kind, path)
    return path


def load_model(path: Union[str, Path], lexicons: Optional[Lexicons] = None) -> TextClassifier:
    """
    Read a model artifact.

    Raises:
        ArtifactError: missing file, bad JSON, wrong magic, schema version or kind.
    """
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"Missing model artifact: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ArtifactError(f"{path} is not valid JSON: {exc}") from None

    if not isinstance(document, dict) or document.get("magic") != MAGIC:
        raise ArtifactError(f"{path} is not a tweetinfo model (bad magic)")
    if document.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactError(
            f"Unsupported schema version {document.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}"
        )

    try:
        kind = validate_model_kind(document["kind"])
        featurizer = _featurizer_from_payload(document["featurizer"])
        if featurizer.kind != document["feature_kind"]:
            raise ArtifactError("Feature kind does not match the stored featurizer")
        params = PARAMS_BY_KIND[kind].from_payload(document["params"])
    except ArtifactError:
        raise
    except (KeyError, TypeError, ValueError, TweetInfoError) as exc:
        raise ArtifactError(f"Malformed model artifact {path}: {exc}") from None

    if params.kind != kind:
        raise ArtifactError(f"Stored parameters are {params.kind}, artifact says {kind}")
    if params.dim != featurizer.dim:
        raise ArtifactError("Model dimension does not match the vocabulary size")

    return TextClassifier(
        kind=kind,
        featurizer=featurizer,
        params=params,
        lexicons=lexicons or load_lexicons(),
        hyperparameters=document.get("hyperparameters", {}),
    )
