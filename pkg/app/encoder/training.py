"""
Training, prediction and checkpointing for the encoder classifier.

Parameters are updated with `app.numopt.adam_step`; batch order, weight
init and dropout draws all derive from `EncoderConfig.seed`.
"""
import json
import logging
import pickle
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import torch
from pydantic import BaseModel, Field

from app.classifiers.base import decode_labels, encode_labels
from app.corpus import Dataset, Label
from app.encoder.bpe import SubwordVocab, bpe_train, encode_batch
from app.encoder.model import EncoderClassifier, EncoderConfig, binary_loss
from app.errors import ArtifactError, ConvergenceError, DataError
from app.metrics import evaluate
from app.numopt import AdamConfig, AdamState, Objective, adam_step

logger = logging.getLogger("tweetinfo.encoder.training")

CHECKPOINT_MAGIC = "tweetinfo-encoder"
CHECKPOINT_VERSION = 1
_EVAL_BATCH = 256


class EpochRecord(BaseModel):
    epoch: int = Field(..., ge=1)
    train_loss: float
    dev_f1: float = Field(..., ge=0, le=1)


class TrainReport(BaseModel):
    initial_loss: float
    epochs: List[EpochRecord] = Field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)


@dataclass
class EncoderParams:
    """A trained encoder together with the vocabulary and config it needs."""

    model: EncoderClassifier
    vocab: SubwordVocab
    config: EncoderConfig


def build_model(config: EncoderConfig, vocab_size: int) -> EncoderClassifier:
    torch.manual_seed(config.seed)
    return EncoderClassifier(config, vocab_size)


def _dataset_tensors(
    dataset: Dataset, vocab: SubwordVocab, config: EncoderConfig, labeled: bool = True
) -> Tuple[torch.Tensor, torch.Tensor, Optional[torch.Tensor]]:
    ids, mask = encode_batch(dataset.texts, vocab, config.max_len)
    targets = None
    if labeled:
        targets = torch.as_tensor(encode_labels(dataset.labels), dtype=torch.float32)
    return torch.as_tensor(ids), torch.as_tensor(mask), targets


def _logits(model: EncoderClassifier, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            chunks = [
                model(ids[i : i + _EVAL_BATCH], mask[i : i + _EVAL_BATCH])
                for i in range(0, ids.shape[0], _EVAL_BATCH)
            ]
    finally:
        model.train(was_training)
    return torch.cat(chunks) if chunks else torch.zeros(0)


def _numpy_params(model: EncoderClassifier) -> Dict[str, np.ndarray]:
    return {name: p.detach().cpu().numpy() for name, p in model.named_parameters()}


def _numpy_grads(model: EncoderClassifier) -> Dict[str, np.ndarray]:
    grads = {}
    for name, p in model.named_parameters():
        grad = p.grad if p.grad is not None else torch.zeros_like(p)
        grads[name] = grad.detach().cpu().numpy()
    return grads


def encoder_train(
    train: Dataset,
    dev: Dataset,
    config: EncoderConfig = EncoderConfig(),
    vocab: Optional[SubwordVocab] = None,
) -> Tuple[EncoderParams, TrainReport]:
    """
    Minimize binary cross-entropy for `config.epochs` epochs.

    The subword vocabulary is learned from the training texts unless one
    is given. Returns the final-epoch parameters and the per-epoch
    report (mean train loss, dev F1).

    Raises:
        ConvergenceError: a batch loss is non-finite; carries the batch index.
    """
    if len(train) == 0 or len(dev) == 0:
        raise DataError("Encoder training needs non-empty train and dev sets")
    if not config.is_reference_setup:
        logger.warning("Encoder training deviates from the reference settings: %s", config)

    vocab = vocab or bpe_train(train.texts, config.vocab_size)
    model = build_model(config, len(vocab))
    ids, mask, targets = _dataset_tensors(train, vocab, config)
    dev_ids, dev_mask, _ = _dataset_tensors(dev, vocab, config, labeled=False)
    dev_golds = dev.labels

    adam = AdamConfig(learning_rate=config.lr, epsilon=config.adam_eps)
    state = AdamState()
    rng = np.random.default_rng(config.seed)

    initial_loss = float(binary_loss(_logits(model, ids, mask), targets))
    report = TrainReport(initial_loss=initial_loss)
    logger.info("Encoder initial loss %.6f on %d tweets", initial_loss, len(train))

    batch_index = 0
    for epoch in range(1, config.epochs + 1):
        model.train()
        order = torch.as_tensor(rng.permutation(len(train)))
        losses = []
        for start in range(0, len(train), config.batch_size):
            rows = order[start : start + config.batch_size]
            loss = binary_loss(model(ids[rows], mask[rows]), targets[rows])
            if not torch.isfinite(loss):
                raise ConvergenceError("Encoder loss became non-finite", batch=batch_index)
            model.zero_grad(set_to_none=True)
            loss.backward()

            updated, state = adam_step(_numpy_params(model), _numpy_grads(model), state, adam)
            with torch.no_grad():
                for name, p in model.named_parameters():
                    p.copy_(torch.as_tensor(updated[name], dtype=p.dtype))
            losses.append(float(loss))
            batch_index += 1

        dev_preds = decode_labels((_logits(model, dev_ids, dev_mask) > 0).numpy())
        record = EpochRecord(
            epoch=epoch,
            train_loss=float(np.mean(losses)),
            dev_f1=evaluate(dev_preds, dev_golds).f1,
        )
        report.epochs.append(record)
        logger.info(
            "Encoder epoch %d: loss %.6f, dev F1 %.5f", epoch, record.train_loss, record.dev_f1
        )

    model.eval()
    return EncoderParams(model=model, vocab=vocab, config=config), report


def encoder_logits(dataset: Dataset, params: EncoderParams) -> np.ndarray:
    ids, mask, _ = _dataset_tensors(dataset, params.vocab, params.config, labeled=False)
    return _logits(params.model, ids, mask).numpy().astype(np.float64)


def encoder_predict(dataset: Dataset, params: EncoderParams) -> List[Label]:
    """logit > 0 -> INFORMATIVE; a zero logit is UNINFORMATIVE."""
    return decode_labels(encoder_logits(dataset, params) > 0)


def encoder_loss_objective(
    model: EncoderClassifier, ids: np.ndarray, mask: np.ndarray, targets: np.ndarray
) -> Objective:
    """Loss over a fixed batch as a function of the flattened parameters."""
    params = list(model.parameters())
    shapes = [p.shape for p in params]
    sizes = [p.numel() for p in params]
    ids_t, mask_t = torch.as_tensor(ids), torch.as_tensor(mask)
    targets_t = torch.as_tensor(targets, dtype=params[0].dtype)

    def evaluate_at(theta: np.ndarray):
        offset = 0
        with torch.no_grad():
            for p, shape, size in zip(params, shapes, sizes):
                chunk = theta[offset : offset + size].reshape(tuple(shape))
                p.copy_(torch.as_tensor(chunk, dtype=p.dtype))
                offset += size
        model.zero_grad(set_to_none=True)
        loss = binary_loss(model(ids_t, mask_t), targets_t)
        loss.backward()
        grad = np.concatenate(
            [
                (p.grad if p.grad is not None else torch.zeros_like(p)).detach().numpy().ravel()
                for p in params
            ]
        )
        return float(loss), grad.astype(np.float64)

    return Objective(dim=sum(sizes), eval=evaluate_at)


def flat_parameters(model: EncoderClassifier) -> np.ndarray:
    return np.concatenate([p.detach().cpu().numpy().ravel() for p in model.parameters()])


def save_checkpoint(params: EncoderParams, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "magic": CHECKPOINT_MAGIC,
            "version": CHECKPOINT_VERSION,
            "config": params.config.model_dump(),
            "tokens": list(params.vocab.tokens),
            "merges": [list(m) for m in params.vocab.merges],
            "state_dict": params.model.state_dict(),
        },
        path,
    )
    logger.info("Saved encoder checkpoint to %s", path)
    return path


def is_checkpoint(path: Union[str, Path]) -> bool:
    """torch.save writes zip archives; classical model artifacts are JSON."""
    path = Path(path)
    return path.is_file() and zipfile.is_zipfile(path)


def load_checkpoint(path: Union[str, Path]) -> EncoderParams:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"Missing encoder checkpoint: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (pickle.UnpicklingError, RuntimeError, OSError, EOFError, ValueError) as exc:
        raise ArtifactError(f"{path} is not a torch checkpoint: {exc}") from None
    if not isinstance(payload, dict) or payload.get("magic") != CHECKPOINT_MAGIC:
        raise ArtifactError(f"{path} is not an encoder checkpoint (bad magic)")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ArtifactError(f"Unsupported checkpoint version {payload.get('version')!r}")

    config = EncoderConfig(**payload["config"])
    vocab = SubwordVocab(
        tokens=tuple(payload["tokens"]), merges=tuple(tuple(m) for m in payload["merges"])
    )
    model = EncoderClassifier(config, len(vocab))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return EncoderParams(model=model, vocab=vocab, config=config)
