"""Middleware for request size limits and metrics, plus request validators."""
import time
from collections import defaultdict
from typing import Dict, List

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware
from starlette.responses import Response

from app.config import settings


class RequestSizeLimitMiddleware(BaseHTTPMiddleware):
    """Reject oversized request bodies before they are parsed."""

    def __init__(self, app, max_size_mb: int = 10):
        super().__init__(app)
        self.max_size_bytes = max_size_mb * 1024 * 1024

    async def dispatch(self, request: Request, call_next) -> Response:
        content_length = request.headers.get("content-length")

        if content_length and int(content_length) > self.max_size_bytes:
            limit_mb = self.max_size_bytes // (1024 * 1024)
            return Response(
                content=f'{{"detail": "Request body too large. Maximum size: {limit_mb}MB"}}',
                status_code=413,
                media_type="application/json",
            )

        return await call_next(request)


class MetricsCollector:
    """Request counters shared between the middleware and the /metrics endpoint."""

    def __init__(self):
        self.reset()

    def reset(self) -> None:
        self.request_count = 0
        self.error_count = 0
        self.latency_sum = 0.0
        self.texts_classified = 0
        self.status_codes: Dict[int, int] = defaultdict(int)
        self.start_time = time.time()

    def record(self, status_code: int, duration: float) -> None:
        self.request_count += 1
        self.latency_sum += duration
        self.status_codes[status_code] += 1
        if status_code >= 400:
            self.error_count += 1

    def get_metrics(self) -> dict:
        uptime = time.time() - self.start_time
        avg_latency = self.latency_sum / self.request_count if self.request_count > 0 else 0

        return {
            "uptime_seconds": uptime,
            "total_requests": self.request_count,
            "error_count": self.error_count,
            "error_rate": self.error_count / self.request_count if self.request_count > 0 else 0,
            "avg_latency_ms": avg_latency * 1000,
            "texts_classified": self.texts_classified,
            "status_codes": dict(self.status_codes),
        }


metrics = MetricsCollector()


class MetricsMiddleware(BaseHTTPMiddleware):
    """Collect basic metrics for monitoring."""

    def __init__(self, app, collector: MetricsCollector = metrics):
        super().__init__(app)
        self.collector = collector

    async def dispatch(self, request: Request, call_next) -> Response:
        start = time.time()
        response = await call_next(request)
        self.collector.record(response.status_code, time.time() - start)
        return response


# Validation helpers


def validate_text_length(text: str) -> str:
    """Validate a single tweet's length."""
    if len(text) > settings.MAX_TEXT_LENGTH:
        raise ValueError(f"Text too long. Maximum length: {settings.MAX_TEXT_LENGTH} characters")
    return text


def validate_batch_size(texts: List[str]) -> List[str]:
    if not texts:
        raise ValueError("At least one text is required")
    if len(texts) > settings.MAX_BATCH:
        raise ValueError(f"Too many texts. Maximum batch size: {settings.MAX_BATCH}")
    return texts


def validate_texts(texts: List[str]) -> List[str]:
    """Validate a prediction batch: size, then every text's length."""
    validate_batch_size(texts)
    for text in texts:
        validate_text_length(text)
    return texts
