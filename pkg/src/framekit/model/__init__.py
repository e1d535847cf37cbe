"""Neural action predictor: biLSTM encoder, recurrent feed-forward
decoder, teacher-forced training, and greedy decoding."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig
from .decode import greedy_parse, parse_like, parse_tokens
from .features import StepFeatures, extract_features
from .lexicon import Lexicon
from .network import Parameters, document_loss, encode_tokens, feature_dim
from .train import (Adam, Checkpoint, TrainingError, build_lexicon, grad_check,
                    oracle_sequences, train)

__all__ = [
    "Adam", "Checkpoint", "Lexicon", "ModelConfig", "Parameters",
    "StepFeatures", "TrainingError", "build_lexicon", "document_loss",
    "encode_tokens", "extract_features", "feature_dim", "grad_check",
    "greedy_parse", "load_checkpoint", "oracle_sequences", "parse_like",
    "parse_tokens", "save_checkpoint", "train",
]
