"""tweetinfo - HTTP service classifying COVID-19 tweets as INFORMATIVE or UNINFORMATIVE."""
from fastapi import Depends, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.config import settings
from app.errors import TweetInfoError
from app.middleware import MetricsMiddleware, RequestSizeLimitMiddleware, metrics
from app.routers import predict
from app.routers.predict import get_model

app = FastAPI(
    title="tweetinfo",
    description="""
# tweetinfo - Informative COVID-19 Tweet Classification

Cleans raw tweets (emoji to text, contraction expansion, URL and
non-ASCII removal) and labels them with a trained conventional model.

## Quick Start

```python
import httpx

httpx.post(
    "http://localhost:8000/v1/predict",
    json={"texts": ["Ohio reports 120 new confirmed cases today 😷"]},
)
```
    """,
    version=settings.VERSION,
)

# Add middleware (order matters - first added = outermost)
app.add_middleware(MetricsMiddleware)
app.add_middleware(RequestSizeLimitMiddleware, max_size_mb=10)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(predict.router)


def _model_status() -> dict:
    resolver = app.dependency_overrides.get(get_model, get_model)
    try:
        model = resolver()
    except TweetInfoError as exc:
        return {"loaded": False, "error": str(exc)}
    if model is None:
        return {"loaded": False, "error": None}
    return {
        "loaded": True,
        "kind": model.kind,
        "features": model.feature_kind,
        "vocabulary_size": model.featurizer.dim,
    }


@app.get("/health")
async def health(model_status: dict = Depends(_model_status)):
    """Service status and whether a model is available for /v1/predict."""
    return {
        "status": "healthy" if model_status["loaded"] else "degraded",
        "service": settings.SERVICE_NAME,
        "version": settings.VERSION,
        "model": model_status,
    }


@app.get("/metrics")
async def get_metrics():
    """Request counters collected by the metrics middleware."""
    return metrics.get_metrics()


@app.get("/")
async def root():
    """API info."""
    return {
        "service": settings.SERVICE_NAME,
        "version": settings.VERSION,
        "description": "Informative COVID-19 tweet classification",
        "docs": "/docs",
        "endpoints": {
            "predict": "/v1/predict",
            "preprocess": "/v1/preprocess",
            "health": "/health",
            "metrics": "/metrics",
        },
    }


@app.exception_handler(TweetInfoError)
async def tweetinfo_exception_handler(request: Request, exc: TweetInfoError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Global exception handler."""
    return JSONResponse(
        status_code=500,
        content={"detail": str(exc)},
    )
