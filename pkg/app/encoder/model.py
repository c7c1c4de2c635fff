"""Small transformer encoder classifier with padding-masked self-attention."""
import math
from typing import List, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.encoder.bpe import MAX_LEN, TokenizedInput
from app.errors import ConfigError, DataError


class EncoderConfig(BaseModel):
    """
    Encoder sizes and training settings.

    max_len, batch_size, lr, adam_eps and epochs default to the reference
    training setup; overriding them is allowed for quick runs and tests.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    d_model: int = Field(128, ge=1)
    n_heads: int = Field(4, ge=1)
    n_layers: int = Field(2, ge=1)
    d_ffn: int = Field(256, ge=1)
    dropout: float = Field(0.1, ge=0, lt=1)
    vocab_size: int = Field(8000, gt=4, description="Subword vocabulary size incl. specials")
    max_len: int = Field(MAX_LEN, ge=2)
    batch_size: int = Field(32, ge=1)
    lr: float = Field(2e-5, gt=0)
    adam_eps: float = Field(1e-8, gt=0)
    epochs: int = Field(4, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _heads_divide_width(self) -> "EncoderConfig":
        if self.d_model % self.n_heads != 0:
            raise ConfigError(
                f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})"
            )
        return self

    @property
    def is_reference_setup(self) -> bool:
        return (self.max_len, self.batch_size, self.lr, self.adam_eps, self.epochs) == (
            MAX_LEN,
            32,
            2e-5,
            1e-8,
            4,
        )


class MultiHeadSelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.query = nn.Linear(d_model, d_model)
        self.key = nn.Linear(d_model, d_model)
        self.value = nn.Linear(d_model, d_model)
        self.out = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Returns the attended values and the (B, H, L, L) attention weights."""
        batch, length, width = x.shape

        def heads(t: torch.Tensor) -> torch.Tensor:
            return t.view(batch, length, self.n_heads, self.d_head).transpose(1, 2)

        q, k, v = heads(self.query(x)), heads(self.key(x)), heads(self.value(x))
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        # padded keys get no attention from any query
        scores = scores.masked_fill(mask[:, None, None, :] == 0, float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        attended = (self.dropout(weights) @ v).transpose(1, 2).reshape(batch, length, width)
        return self.out(attended), weights


class EncoderBlock(nn.Module):
    """Post-norm residual block: attention, then feed-forward."""

    def __init__(self, d_model: int, n_heads: int, d_ffn: int, dropout: float):
        super().__init__()
        self.attention = MultiHeadSelfAttention(d_model, n_heads, dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.feed_forward = nn.Sequential(
            nn.Linear(d_model, d_ffn),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(d_ffn, d_model),
        )
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        attended, weights = self.attention(x, mask)
        x = self.norm1(x + self.dropout(attended))
        x = self.norm2(x + self.dropout(self.feed_forward(x)))
        return x, weights


class EncoderClassifier(nn.Module):
    """Token + learned position embeddings, encoder blocks, linear head on CLS."""

    def __init__(self, config: EncoderConfig, vocab_size: int):
        super().__init__()
        self.vocab_size = vocab_size
        self.max_len = config.max_len
        self.token_embedding = nn.Embedding(vocab_size, config.d_model)
        self.position_embedding = nn.Embedding(config.max_len, config.d_model)
        self.dropout = nn.Dropout(config.dropout)
        self.layers = nn.ModuleList(
            [
                EncoderBlock(config.d_model, config.n_heads, config.d_ffn, config.dropout)
                for _ in range(config.n_layers)
            ]
        )
        self.head = nn.Linear(config.d_model, 1)
        nn.init.normal_(self.token_embedding.weight, std=0.02)
        nn.init.normal_(self.position_embedding.weight, std=0.02)

    def forward(
        self, ids: torch.Tensor, mask: torch.Tensor, return_attention: bool = False
    ) -> Union[torch.Tensor, Tuple[torch.Tensor, List[torch.Tensor]]]:
        if ids.numel() and int(ids.max()) >= self.vocab_size:
            raise DataError(
                f"Token id {int(ids.max())} is outside the vocabulary ({self.vocab_size})"
            )
        if ids.shape[1] > self.max_len:
            raise DataError(f"Sequence length {ids.shape[1]} exceeds max_len {self.max_len}")

        positions = torch.arange(ids.shape[1], device=ids.device)
        x = self.token_embedding(ids) + self.position_embedding(positions)[None, :, :]
        x = self.dropout(x)
        attention: List[torch.Tensor] = []
        for layer in self.layers:
            x, weights = layer(x, mask)
            attention.append(weights)
        logits = self.head(x[:, 0, :]).squeeze(-1)
        if return_attention:
            return logits, attention
        return logits


def stack_inputs(inputs: Sequence[TokenizedInput]) -> Tuple[torch.Tensor, torch.Tensor]:
    ids = torch.tensor([list(t.ids) for t in inputs], dtype=torch.long)
    mask = torch.tensor([list(t.mask) for t in inputs], dtype=torch.long)
    return ids, mask


Batch = Union[Sequence[TokenizedInput], Tuple[np.ndarray, np.ndarray]]


def encoder_forward(batch: Batch, model: EncoderClassifier) -> np.ndarray:
    """
    Evaluation-mode logits (dropout off), one per input.

    `batch` is a list of TokenizedInput or an explicit (ids, mask) pair
    of integer arrays.
    """
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        ids = torch.as_tensor(batch[0], dtype=torch.long)
        mask = torch.as_tensor(batch[1], dtype=torch.long)
    else:
        ids, mask = stack_inputs(batch)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            logits = model(ids, mask)
    finally:
        model.train(was_training)
    return logits.detach().cpu().numpy().astype(np.float64)


def binary_loss(logits: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    return F.binary_cross_entropy_with_logits(logits, targets.to(logits.dtype))
