"""Training (teacher forcing + Adam with global-norm clipping) and the
finite-difference gradient checker."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..document import Document
from ..oracle import generate
from ..transitions import Action
from . import autodiff as ad
from .config import ModelConfig
from .lexicon import Lexicon
from .network import Parameters, document_loss


class TrainingError(Exception):
    pass


class Adam:
    """Adam over named arrays, updating them in place."""

    def __init__(self, arrays: dict[str, np.ndarray], config: ModelConfig):
        self.arrays = arrays
        self.config = config
        self.m = {k: np.zeros_like(v) for k, v in arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in arrays.items()}
        self.t = 0

    def step(self, grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
        if norm > cfg.gradient_clip_norm > 0:
            factor = cfg.gradient_clip_norm / norm
            grads = {k: g * factor for k, g in grads.items()}
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for name, grad in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad * grad
            update = (cfg.learning_rate * (m / bias1)
                      / (np.sqrt(v / bias2) + cfg.adam_epsilon))
            self.arrays[name] -= update.astype(self.arrays[name].dtype)


@dataclass
class Checkpoint:
    step: int
    loss: float
    accuracy: float
    dev_slot_f1: Optional[float] = None


def oracle_sequences(corpus: list[Document]) -> list[list[Action]]:
    return [list(generate(doc)) for doc in corpus]


def build_lexicon(corpus: list[Document], config: ModelConfig,
                  sequences: Optional[list[list[Action]]] = None) -> Lexicon:
    if sequences is None:
        sequences = oracle_sequences(corpus)
    return Lexicon.build(corpus, sequences, config.max_affix_len)


def train(corpus: list[Document], config: ModelConfig, seed: int = 1,
          steps: int = 1000, checkpoint_every: int = 200,
          on_checkpoint: Optional[Callable[[Parameters, Checkpoint], None]] = None,
          ) -> Parameters:
    """Train an action predictor on oracle sequences.

    Deterministic for a given (corpus, config, seed, steps).  Every
    `checkpoint_every` steps the running loss/accuracy is reported to
    `on_checkpoint`, which may also run a dev evaluation.
    """
    if not corpus:
        raise TrainingError("cannot train on an empty corpus")
    sequences = oracle_sequences(corpus)
    lexicon = build_lexicon(corpus, config, sequences)
    params = Parameters(config, lexicon, seed)
    tensors = params.tensors(trainable=True)
    adam = Adam(params.arrays, config)
    if config.use_ema:
        params.start_ema()

    examples = [(doc.text, list(doc.tokens), actions)
                for doc, actions in zip(corpus, sequences)]
    rng = random.Random(seed)
    order: list[int] = []
    window_loss = 0.0
    window_correct = 0
    window_actions = 0
    window_steps = 0

    for step in range(1, steps + 1):
        batch = []
        for _ in range(config.batch_size):
            if not order:
                order = list(range(len(examples)))
                rng.shuffle(order)
            batch.append(examples[order.pop()])

        for tensor in tensors.values():
            tensor.zero_grad()
        losses = []
        n_actions = 0
        n_correct = 0
        for text, tokens, actions in batch:
            loss, count, correct = document_loss(
                tensors, config, lexicon, text, tokens, actions)
            losses.append(loss)
            n_actions += count
            n_correct += correct
        total = ad.scale(ad.addn(losses), 1.0 / n_actions)
        loss_value = float(total.data)
        if not math.isfinite(loss_value):
            raise TrainingError(f"non-finite loss at step {step}")
        ad.backward(total)

        grads = {name: (tensor.grad if tensor.grad is not None
                        else np.zeros_like(tensor.data))
                 for name, tensor in tensors.items()}
        adam.step(grads)
        if config.use_ema:
            params.update_ema(config.ema_decay)

        window_loss += loss_value
        window_correct += n_correct
        window_actions += n_actions
        window_steps += 1
        if step % checkpoint_every == 0 or step == steps:
            report = Checkpoint(step=step,
                                loss=window_loss / window_steps,
                                accuracy=window_correct / max(1, window_actions))
            if on_checkpoint is not None:
                on_checkpoint(params, report)
            window_loss = 0.0
            window_correct = 0
            window_actions = 0
            window_steps = 0
    return params


def clone_arrays(params: Parameters) -> dict[str, np.ndarray]:
    return {name: array.copy() for name, array in params.arrays.items()}


def grad_check(params: Parameters, doc: Document,
               actions: Optional[list[Action]] = None,
               step: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Checks every element of every parameter tensor; the error for each
    is |analytic - numeric| / max(1, |analytic|, |numeric|).  Use a
    float64 parameter set; finite differences have no headroom in
    single precision.
    """
    if actions is None:
        actions = list(generate(doc))
    config = params.config
    lexicon = params.lexicon

    tensors = params.tensors(trainable=True)
    loss, count, _ = document_loss(tensors, config, lexicon,
                                   doc.text, list(doc.tokens), actions)
    ad.backward(loss)
    analytic = {name: (tensor.grad if tensor.grad is not None
                       else np.zeros_like(tensor.data))
                for name, tensor in tensors.items()}

    def loss_at() -> float:
        frozen = params.tensors(trainable=False)
        value, _, _ = document_loss(frozen, config, lexicon,
                                    doc.text, list(doc.tokens), actions)
        return float(value.data)

    worst = 0.0
    for name, array in params.arrays.items():
        flat = array.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for index in range(flat.shape[0]):
            original = flat[index]
            flat[index] = original + step
            upper = loss_at()
            flat[index] = original - step
            lower = loss_at()
            flat[index] = original
            numeric = (upper - lower) / (2.0 * step)
            a = float(grad_flat[index])
            error = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, error)
    return worst
