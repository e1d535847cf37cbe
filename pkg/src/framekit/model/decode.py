"""Greedy decoding: repeatedly apply the highest-scoring valid action.

A per-position cap on non-SHIFT actions guarantees termination even for
adversarial parameters; once a position exhausts its budget only SHIFT
(or STOP at the end of input) may be chosen.
"""

from __future__ import annotations

from ..document import Document, Token, tokenize
from ..transitions import SHIFT, STOP
from .network import ForwardPass, Parameters


def parse_tokens(params: Parameters, text: str, tokens: list[Token],
                 use_ema: bool = False) -> Document:
    """Parse a pre-tokenized text into a predicted document."""
    config = params.config
    lexicon = params.lexicon
    P = params.tensors(trainable=False, use_ema=use_ema)
    run = ForwardPass(P, config, lexicon, text, tokens)
    actions = lexicon.actions
    nonshift_here = 0

    while not run.state.done:
        scores = run.step_logits().data
        capped = nonshift_here >= config.decode_action_cap
        best = None
        best_score = None
        for index, action in enumerate(actions):
            if capped and action.kind not in (SHIFT, STOP):
                continue
            if not run.state.is_valid(action):
                continue
            if best_score is None or scores[index] > best_score:
                best, best_score = action, scores[index]
        if best is None:
            raise RuntimeError("action inventory has no valid action; "
                               "it must contain SHIFT and STOP")
        assert run.state.is_valid(best)
        if best.kind == SHIFT:
            nonshift_here = 0
        elif best.kind != STOP:
            nonshift_here += 1
        run.state.apply(best)
    return run.state.to_document()


def greedy_parse(text: str, params: Parameters, use_ema: bool = False) -> Document:
    """Tokenize raw text and parse it."""
    return parse_tokens(params, text, tokenize(text), use_ema=use_ema)


def parse_like(params: Parameters, gold: Document, use_ema: bool = False) -> Document:
    """Parse over a gold document's tokens (for span-comparable scoring)."""
    return parse_tokens(params, gold.text, list(gold.tokens), use_ema=use_ema)
