"""Subword encoding and the from-scratch transformer encoder classifier."""
from app.encoder.bpe import (
    CLS_ID,
    MAX_LEN,
    PAD_ID,
    SEP_ID,
    UNK_ID,
    SubwordVocab,
    TokenizedInput,
    bpe_train,
    encode,
    encode_batch,
)
from app.encoder.model import EncoderClassifier, EncoderConfig, encoder_forward
from app.encoder.training import (
    EncoderParams,
    TrainReport,
    encoder_predict,
    encoder_train,
    load_checkpoint,
    save_checkpoint,
)

__all__ = [
    "CLS_ID",
    "MAX_LEN",
    "PAD_ID",
    "SEP_ID",
    "UNK_ID",
    "EncoderClassifier",
    "EncoderConfig",
    "EncoderParams",
    "SubwordVocab",
    "TokenizedInput",
    "TrainReport",
    "bpe_train",
    "encode",
    "encode_batch",
    "encoder_forward",
    "encoder_predict",
    "encoder_train",
    "load_checkpoint",
    "save_checkpoint",
]
