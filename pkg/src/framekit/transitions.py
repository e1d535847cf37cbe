"""Transition system: parser state with an attention buffer plus the
eight actions that build frame graphs as a side effect.

The attention buffer is an ordered list of every frame created so far;
index 0 is the center of attention.  Each action that creates or
touches a frame moves it to the front.  The buffer itself is unbounded;
only feature extraction truncates it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Union

from .document import Document, Mention, Token
from .store import Handle, Store

SHIFT = "SHIFT"
STOP = "STOP"
EVOKE = "EVOKE"
REFER = "REFER"
CONNECT = "CONNECT"
ASSIGN = "ASSIGN"
EMBED = "EMBED"
ELABORATE = "ELABORATE"

ACTION_KINDS = (SHIFT, STOP, EVOKE, REFER, CONNECT, ASSIGN, EMBED, ELABORATE)


class SymbolName(str):
    """Marks an ASSIGN constant as a bare symbol rather than a string."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SymbolName({str.__repr__(self)})"


Constant = Union[int, float, str, SymbolName]


class InvalidActionError(Exception):
    """An action was applied in a state where it is not valid."""


@dataclass(frozen=True)
class Action:
    """One transition, with symbol arguments held by name so actions are
    meaningful independent of any particular store."""

    kind: str
    type: Optional[str] = None      # EVOKE/EMBED/ELABORATE frame type
    length: Optional[int] = None    # EVOKE/REFER token count
    source: Optional[int] = None    # CONNECT/ASSIGN/ELABORATE buffer index
    target: Optional[int] = None    # CONNECT/EMBED/REFER buffer index
    role: Optional[str] = None
    value: Optional[Constant] = None

    @staticmethod
    def shift() -> "Action":
        return Action(SHIFT)

    @staticmethod
    def stop() -> "Action":
        return Action(STOP)

    @staticmethod
    def evoke(type_name: str, length: int) -> "Action":
        return Action(EVOKE, type=type_name, length=length)

    @staticmethod
    def refer(frame: int, length: int) -> "Action":
        return Action(REFER, target=frame, length=length)

    @staticmethod
    def connect(source: int, role: str, target: int) -> "Action":
        return Action(CONNECT, source=source, role=role, target=target)

    @staticmethod
    def assign(source: int, role: str, value: Constant) -> "Action":
        return Action(ASSIGN, source=source, role=role, value=value)

    @staticmethod
    def embed(target: int, role: str, type_name: str) -> "Action":
        return Action(EMBED, target=target, role=role, type=type_name)

    @staticmethod
    def elaborate(source: int, role: str, type_name: str) -> "Action":
        return Action(ELABORATE, source=source, role=role, type=type_name)

    def to_text(self) -> str:
        k = self.kind
        if k == SHIFT or k == STOP:
            return k
        if k == EVOKE:
            return f"EVOKE({self.type}, {self.length})"
        if k == REFER:
            return f"REFER({self.target}, {self.length})"
        if k == CONNECT:
            return f"CONNECT({self.source}, {self.role}, {self.target})"
        if k == ASSIGN:
            return f"ASSIGN({self.source}, {self.role}, {_constant_text(self.value)})"
        if k == EMBED:
            return f"EMBED({self.target}, {self.role}, {self.type})"
        if k == ELABORATE:
            return f"ELABORATE({self.source}, {self.role}, {self.type})"
        raise ValueError(f"unknown action kind {k!r}")


def _constant_text(value: Constant) -> str:
    if isinstance(value, SymbolName):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    return repr(value)


_NUMBER_ARG = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?$")


def _split_args(body: str) -> list[str]:
    args = []
    depth = 0
    current = []
    in_string = False
    i = 0
    while i < len(body):
        ch = body[i]
        if in_string:
            current.append(ch)
            if ch == "\\":
                if i + 1 < len(body):
                    current.append(body[i + 1])
                    i += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
            current.append(ch)
        elif ch == "," and depth == 0:
            args.append("".join(current).strip())
            current = []
        else:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            current.append(ch)
        i += 1
    tail = "".join(current).strip()
    if tail:
        args.append(tail)
    return args


def _parse_constant(text: str) -> Constant:
    if text.startswith('"'):
        return json.loads(text)
    if _NUMBER_ARG.match(text):
        return int(text) if re.fullmatch(r"-?\d+", text) else float(text)
    return SymbolName(text)


def parse_action(text: str) -> Action:
    """Inverse of Action.to_text."""
    text = text.strip()
    if text == SHIFT:
        return Action.shift()
    if text == STOP:
        return Action.stop()
    m = re.fullmatch(r"([A-Z]+)\((.*)\)", text)
    if not m:
        raise ValueError(f"malformed action: {text!r}")
    kind, body = m.group(1), m.group(2)
    args = _split_args(body)
    try:
        if kind == EVOKE:
            return Action.evoke(args[0], int(args[1]))
        if kind == REFER:
            return Action.refer(int(args[0]), int(args[1]))
        if kind == CONNECT:
            return Action.connect(int(args[0]), args[1], int(args[2]))
        if kind == ASSIGN:
            return Action.assign(int(args[0]), args[1], _parse_constant(args[2]))
        if kind == EMBED:
            return Action.embed(int(args[0]), args[1], args[2])
        if kind == ELABORATE:
            return Action.elaborate(int(args[0]), args[1], args[2])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed action: {text!r}") from exc
    raise ValueError(f"unknown action kind in {text!r}")


def sequence_to_text(actions: list[Action]) -> str:
    return "\n".join(action.to_text() for action in actions)


def sequence_from_text(text: str) -> list[Action]:
    return [parse_action(line) for line in text.splitlines() if line.strip()]


class ParserState:
    """Mutable parse state: cursor, attention buffer, graph under
    construction, and per-frame step bookkeeping."""

    def __init__(self, text: str, tokens: list[Token], store: Optional[Store] = None):
        self.store = store if store is not None else Store()
        self.text = text
        self.tokens = tokens
        self.cursor = 0
        self.step = 0
        self.done = False
        self.attention: list[Handle] = []
        self.created_step: dict[Handle, int] = {}
        self.focused_step: dict[Handle, int] = {}
        self.mentions: list[Mention] = []
        self._mention_by_span: dict[tuple[int, int], Mention] = {}
        self._evoked_types: set[tuple[int, int, str]] = set()
        self._last_phrase: dict[Handle, tuple[int, int]] = {}

    # -- queries ---------------------------------------------------------

    @property
    def num_tokens(self) -> int:
        return len(self.tokens)

    def attention_at(self, index: int) -> Handle:
        """Frame at buffer position `index`; 0 is the most recent."""
        if not 0 <= index < len(self.attention):
            raise IndexError(f"attention index {index} out of range "
                             f"({len(self.attention)} frames)")
        return self.attention[index]

    def attention_index(self, frame: Handle) -> int:
        return self.attention.index(frame)

    def phrase_of(self, frame: Handle) -> Optional[tuple[int, int]]:
        """Most recent evoking span of `frame`, if it has one."""
        return self._last_phrase.get(frame)

    def is_valid(self, action: Action) -> bool:
        """Total validity predicate for `action` in the current state."""
        kind = action.kind
        if self.done:
            return kind == STOP
        if kind == SHIFT:
            return self.cursor < self.num_tokens
        if kind == STOP:
            return self.cursor == self.num_tokens
        size = len(self.attention)
        if kind == EVOKE:
            if action.length is None or action.length < 1:
                return False
            if self.cursor + action.length > self.num_tokens:
                return False
            key = (self.cursor, action.length, action.type)
            return key not in self._evoked_types
        if kind == REFER:
            if action.length is None or action.length < 1:
                return False
            if self.cursor + action.length > self.num_tokens:
                return False
            return 0 <= action.target < size
        if kind == CONNECT:
            return 0 <= action.source < size and 0 <= action.target < size
        if kind == ASSIGN:
            return 0 <= action.source < size
        if kind == EMBED:
            return 0 <= action.target < size
        if kind == ELABORATE:
            return 0 <= action.source < size
        return False

    # -- mutation ----------------------------------------------------------

    def apply(self, action: Action) -> "ParserState":
        """Apply a valid action in place; returns self for chaining."""
        if not self.is_valid(action):
            raise InvalidActionError(f"invalid action {action.to_text()} at "
                                     f"cursor={self.cursor} step={self.step}")
        kind = action.kind
        if kind == SHIFT:
            self.cursor += 1
        elif kind == STOP:
            self.done = True
        elif kind == EVOKE:
            type_sym = self.store.intern(action.type)
            frame = self.store.new_frame([(self.store.isa, type_sym)])
            self._evoke(frame, action.length)
            self.attention.insert(0, frame)
            self.created_step[frame] = self.step
            self.focused_step[frame] = self.step
            self._evoked_types.add((self.cursor, action.length, action.type))
        elif kind == REFER:
            frame = self.attention[action.target]
            self._evoke(frame, action.length)
            self._front(frame)
            type_name = self._type_name(frame)
            if type_name is not None:
                self._evoked_types.add((self.cursor, action.length, type_name))
        elif kind == CONNECT:
            source = self.attention[action.source]
            target = self.attention[action.target]
            self.store.add_slot(source, self.store.intern(action.role), target)
            self._front(source)
        elif kind == ASSIGN:
            source = self.attention[action.source]
            self.store.add_slot(source, self.store.intern(action.role),
                                self._constant_value(action.value))
            self._front(source)
        elif kind == EMBED:
            target = self.attention[action.target]
            type_sym = self.store.intern(action.type)
            frame = self.store.new_frame([
                (self.store.isa, type_sym),
                (self.store.intern(action.role), target),
            ])
            self.attention.insert(0, frame)
            self.created_step[frame] = self.step
            self.focused_step[frame] = self.step
        elif kind == ELABORATE:
            source = self.attention[action.source]
            type_sym = self.store.intern(action.type)
            frame = self.store.new_frame([(self.store.isa, type_sym)])
            self.store.add_slot(source, self.store.intern(action.role), frame)
            self.attention.insert(0, frame)
            self.created_step[frame] = self.step
            self.focused_step[frame] = self.step
        self.step += 1
        return self

    def _constant_value(self, value: Constant):
        if isinstance(value, SymbolName):
            return self.store.intern(str(value))
        return value

    def _type_name(self, frame: Handle) -> Optional[str]:
        value = self.store.get_role(frame, self.store.isa)
        if isinstance(value, Handle) and value.is_symbol():
            return self.store.symbol_name(value)
        return None

    def _evoke(self, frame: Handle, length: int) -> None:
        span = (self.cursor, length)
        mention = self._mention_by_span.get(span)
        if mention is None:
            mention = Mention(self.cursor, length, [])
            self.mentions.append(mention)
            self._mention_by_span[span] = mention
        if frame not in mention.evoked:
            mention.evoked.append(frame)
        self._last_phrase[frame] = span
        self.focused_step[frame] = self.step

    def _front(self, frame: Handle) -> None:
        self.attention.remove(frame)
        self.attention.insert(0, frame)
        self.focused_step[frame] = self.step

    # -- output ------------------------------------------------------------

    def to_document(self) -> Document:
        """Snapshot the constructed annotations as a Document."""
        doc = Document(self.text, list(self.tokens),
                       [Mention(m.begin, m.length, list(m.evoked)) for m in self.mentions],
                       self.store)
        doc.sort_mentions()
        return doc


def run_sequence(text: str, tokens: list[Token], actions: list[Action],
                 store: Optional[Store] = None) -> ParserState:
    """Replay a full action sequence from a fresh state."""
    state = ParserState(text, tokens, store)
    for action in actions:
        state.apply(action)
    return state
