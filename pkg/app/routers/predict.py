"""Preprocessing and prediction endpoints."""
import logging
from functools import lru_cache
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException
from pydantic import BaseModel, Field, field_validator

from app.classifiers.persistence import TextClassifier, load_model
from app.config import settings
from app.corpus import Label
from app.middleware import metrics, validate_text_length, validate_texts
from app.preprocess import Lexicons, PreprocessReport, load_lexicons, preprocess

logger = logging.getLogger("tweetinfo.api")

router = APIRouter(prefix="/v1", tags=["Prediction"])


# ============================================================================
# Request/Response Models
# ============================================================================


class PreprocessRequest(BaseModel):
    text: str = Field(..., description="Raw tweet text")

    @field_validator("text")
    @classmethod
    def check_length(cls, v: str) -> str:
        return validate_text_length(v)


class PredictRequest(BaseModel):
    texts: List[str] = Field(..., description="Raw tweet texts to classify")

    @field_validator("texts")
    @classmethod
    def check_texts(cls, v: List[str]) -> List[str]:
        return validate_texts(v)


class PredictionItem(BaseModel):
    label: Label
    cleaned: str
    score: float = Field(..., description="Decision value or INFORMATIVE probability")


class PredictResponse(BaseModel):
    model: str
    features: str
    predictions: List[PredictionItem]


# ============================================================================
# Dependencies
# ============================================================================


@lru_cache
def get_lexicons() -> Lexicons:
    return load_lexicons()


@lru_cache
def _load_configured_model(path: str) -> TextClassifier:
    logger.info("Loading model artifact %s", path)
    return load_model(path, get_lexicons())


def get_model() -> Optional[TextClassifier]:
    """The model named by TWEETINFO_MODEL_PATH, loaded on first use."""
    if not settings.MODEL_PATH:
        return None
    return _load_configured_model(settings.MODEL_PATH)


def require_model(model: Optional[TextClassifier] = Depends(get_model)) -> TextClassifier:
    if model is None:
        raise HTTPException(status_code=503, detail="No model loaded. Set TWEETINFO_MODEL_PATH.")
    return model


# ============================================================================
# Endpoints
# ============================================================================


@router.post("/preprocess", response_model=PreprocessReport)
async def preprocess_text(
    request: PreprocessRequest, lexicons: Lexicons = Depends(get_lexicons)
) -> PreprocessReport:
    """Run the cleaning pipeline on one tweet."""
    return preprocess(request.text, lexicons)


@router.post("/predict", response_model=PredictResponse)
async def predict(
    request: PredictRequest, model: TextClassifier = Depends(require_model)
) -> PredictResponse:
    """
    Classify a batch of raw tweets.

    Each text is cleaned, featurized with the model's frozen vocabulary
    and labeled INFORMATIVE or UNINFORMATIVE.
    """
    predictions = model.predict(request.texts)
    metrics.texts_classified += len(predictions)
    return PredictResponse(
        model=model.kind,
        features=model.feature_kind,
        predictions=[PredictionItem(**p.model_dump()) for p in predictions],
    )
