"""Decoder step features extracted from the parser state.

For the top-k attention frames: the last token of the most recent
evoking phrase (absent for frames created by EMBED/ELABORATE), and the
steps that created and last fronted them, whose stored hidden
activations feed back into the current step.  The previous k steps form
the history feature.  Role links between top-k frames become (source,
role, target) triple ids with (source, role), (role, target) and
(source, target) back-offs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..store import Handle
from ..transitions import ParserState
from .lexicon import Lexicon


@dataclass
class StepFeatures:
    cursor_token: Optional[int]
    att_end_token: list[Optional[int]]
    att_created: list[Optional[int]]
    att_focused: list[Optional[int]]
    history: list[Optional[int]]
    triples: list[int]
    source_roles: list[int]
    role_targets: list[int]
    source_targets: list[int]


def extract_features(state: ParserState, lexicon: Lexicon,
                     k_attention: int, k_history: int) -> StepFeatures:
    k = k_attention
    attention = state.attention[:k]

    att_end: list[Optional[int]] = []
    att_created: list[Optional[int]] = []
    att_focused: list[Optional[int]] = []
    for frame in attention:
        span = state.phrase_of(frame)
        att_end.append(span[0] + span[1] - 1 if span is not None else None)
        att_created.append(state.created_step.get(frame))
        att_focused.append(state.focused_step.get(frame))
    padding = k - len(attention)
    att_end.extend([None] * padding)
    att_created.extend([None] * padding)
    att_focused.extend([None] * padding)

    history = [state.step - 1 - j if state.step - 1 - j >= 0 else None
               for j in range(k_history)]

    positions = {frame: i for i, frame in enumerate(attention)}
    num_roles = lexicon.num_roles
    triples: list[int] = []
    source_roles: list[int] = []
    role_targets: list[int] = []
    source_targets: list[int] = []
    for s_pos, frame in enumerate(attention):
        for slot in state.store.slots(frame):
            value = slot.value
            if not (isinstance(value, Handle) and value.is_frame()):
                continue
            t_pos = positions.get(value)
            if t_pos is None:
                continue
            role_id = (lexicon.role_id(state.store.symbol_name(slot.role))
                       if slot.role.is_symbol() else 0)
            triples.append((s_pos * num_roles + role_id) * k + t_pos)
            source_roles.append(s_pos * num_roles + role_id)
            role_targets.append(role_id * k + t_pos)
            source_targets.append(s_pos * k + t_pos)

    cursor = state.cursor if state.cursor < state.num_tokens else None
    return StepFeatures(cursor, att_end, att_created, att_focused, history,
                        triples, source_roles, role_targets, source_targets)
