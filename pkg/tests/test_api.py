"""Tests for the prediction API: health, metrics, preprocessing and prediction."""
import httpx
import pytest
from fastapi import FastAPI

from app.classifiers.base import ClassicalHyperparameters
from app.config import settings
from app.errors import ArtifactError
from app.harness import train_classical
from app.main import app
from app.middleware import RequestSizeLimitMiddleware, metrics
from app.routers.predict import get_model


@pytest.fixture(scope="module")
def classifier(synthetic_data, lexicons):
    train, _ = synthetic_data
    return train_classical("nb", "tfidf", train, lexicons, ClassicalHyperparameters(), seed=0)


@pytest.fixture()
async def client():
    metrics.reset()
    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as c:
        yield c
    app.dependency_overrides.clear()


@pytest.fixture()
def with_model(client, classifier):
    app.dependency_overrides[get_model] = lambda: classifier
    return client


@pytest.fixture()
def without_model(client):
    app.dependency_overrides[get_model] = lambda: None
    return client


async def test_health_with_model(with_model):
    resp = await with_model.get("/health")
    assert resp.status_code == 200
    data = resp.json()
    assert data["status"] == "healthy"
    assert data["service"] == "tweetinfo"
    assert data["model"]["kind"] == "nb"
    assert data["model"]["features"] == "tfidf"
    assert data["model"]["vocabulary_size"] > 0


async def test_health_without_model(without_model):
    data = (await without_model.get("/health")).json()
    assert data["status"] == "degraded"
    assert data["model"]["loaded"] is False


async def test_health_reports_broken_artifact(client):
    def broken():
        raise ArtifactError("Missing model artifact: nowhere.json")

    app.dependency_overrides[get_model] = broken
    data = (await client.get("/health")).json()
    assert data["status"] == "degraded"
    assert "nowhere.json" in data["model"]["error"]


async def test_root_returns_api_info(client):
    resp = await client.get("/")
    assert resp.status_code == 200
    data = resp.json()
    assert data["service"] == "tweetinfo"
    assert "/v1/predict" in data["endpoints"].values()


async def test_metrics_count_requests(with_model):
    await with_model.get("/")
    await with_model.post("/v1/predict", json={"texts": ["new cases in Ohio"]})
    data = (await with_model.get("/metrics")).json()
    assert data["total_requests"] == 2
    assert data["texts_classified"] == 1
    assert data["uptime_seconds"] > 0
    assert data["status_codes"] == {"200": 2}


async def test_preprocess_endpoint(client):
    resp = await client.post(
        "/v1/preprocess", json={"text": "I can't believe it 😷 https://t.co/abc café"}
    )
    assert resp.status_code == 200
    data = resp.json()
    assert data["cleaned"] == "i cannot believe it face with medical mask caf"
    assert data["original"] == "I can't believe it 😷 https://t.co/abc café"


async def test_predict_endpoint(with_model, classifier):
    texts = ["Italy confirms 45 new deaths and 300 cases today", "stay safe and pray 🙏"]
    resp = await with_model.post("/v1/predict", json={"texts": texts})
    assert resp.status_code == 200
    data = resp.json()
    assert data["model"] == "nb"
    assert data["features"] == "tfidf"
    assert [p["label"] for p in data["predictions"]] == [
        label.value for label in classifier.predict_labels(texts)
    ]
    assert all(0.0 <= p["score"] <= 1.0 for p in data["predictions"])


async def test_predict_without_model_is_503(without_model):
    resp = await without_model.post("/v1/predict", json={"texts": ["cases rise"]})
    assert resp.status_code == 503
    assert "TWEETINFO_MODEL_PATH" in resp.json()["detail"]


async def test_broken_artifact_is_400(client):
    def broken():
        raise ArtifactError("bad magic")

    app.dependency_overrides[get_model] = broken
    resp = await client.post("/v1/predict", json={"texts": ["cases rise"]})
    assert resp.status_code == 400
    assert resp.json()["detail"] == "bad magic"


async def test_empty_batch_rejected(with_model):
    resp = await with_model.post("/v1/predict", json={"texts": []})
    assert resp.status_code == 422


async def test_oversized_batch_rejected(with_model, monkeypatch):
    monkeypatch.setattr(settings, "MAX_BATCH", 2)
    resp = await with_model.post("/v1/predict", json={"texts": ["a", "b", "c"]})
    assert resp.status_code == 422


async def test_overlong_text_rejected(client, monkeypatch):
    monkeypatch.setattr(settings, "MAX_TEXT_LENGTH", 10)
    resp = await client.post("/v1/preprocess", json={"text": "x" * 11})
    assert resp.status_code == 422


async def test_openapi_docs(client):
    resp = await client.get("/openapi.json")
    assert resp.status_code == 200
    assert resp.json()["info"]["title"] == "tweetinfo"


async def test_oversized_body_rejected():
    small = FastAPI()
    small.add_middleware(RequestSizeLimitMiddleware, max_size_mb=1)

    @small.post("/echo")
    async def echo():
        return {"ok": True}

    transport = httpx.ASGITransport(app=small)
    async with httpx.AsyncClient(transport=transport, base_url="http://test") as c:
        assert (await c.post("/echo", content=b"x" * 100)).status_code == 200
        resp = await c.post("/echo", content=b"x" * (1024 * 1024 + 1))
    assert resp.status_code == 413
    assert "1MB" in resp.json()["detail"]
