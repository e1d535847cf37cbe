"""Model hyperparameters.  Defaults follow the published training recipe
(32-dim word embeddings, 256-dim single-layer LSTMs, 128-dim hidden
layer, Adam at learning rate 0.0005 with beta1=0.01, beta2=0.999,
epsilon=1e-5, gradient clipping at 1.0, batch size 8, no dropout)."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional


@dataclass
class ModelConfig:
    word_dim: int = 32
    lstm_dim: int = 256
    hidden_dim: int = 128
    max_affix_len: int = 3
    k_attention: int = 5
    k_history: int = 5
    learning_rate: float = 0.0005
    adam_beta1: float = 0.01
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-5
    gradient_clip_norm: float = 1.0
    batch_size: int = 8
    dropout: float = 0.0  # the recipe trains without dropout; must stay 0
    affix_dim: int = 8
    shape_dim: int = 4
    link_dim: int = 16
    hidden_activation: str = "relu"  # or "tanh"
    use_ema: bool = False
    ema_decay: float = 0.999
    decode_action_cap: int = 32  # max non-SHIFT actions per token position
    dtype: str = "float32"
    word_vectors_path: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("word_dim", "lstm_dim", "hidden_dim", "max_affix_len",
                     "k_attention", "k_history", "batch_size", "affix_dim",
                     "shape_dim", "link_dim", "decode_action_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.dropout != 0.0:
            raise ValueError("dropout is not implemented; it must stay 0")
        if self.hidden_activation not in ("relu", "tanh"):
            raise ValueError("hidden_activation must be 'relu' or 'tanh'")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be 'float32' or 'float64'")

    def apply_override(self, key: str, raw: str) -> None:
        """Set one field from a key=value command line override."""
        matching = {f.name: f for f in fields(self)}
        if key not in matching:
            raise ValueError(f"unknown model option {key!r}")
        current = getattr(self, key)
        if key == "word_vectors_path":
            value: object = raw
        elif isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        else:
            value = raw
        setattr(self, key, value)
        self.__post_init__()
