"""Typed view over document frames: tokens, mentions, evoked frames.

A document frame follows a fixed schema: an ``isa: /s/document`` type,
a ``/s/document/text`` string, a ``/s/document/tokens`` array of token
frames (text, byte start, byte length), and one ``/s/document/mention``
slot per phrase frame.  Phrase frames carry ``/s/phrase/begin``, an
optional ``/s/phrase/length`` (default 1), and one ``/s/phrase/evokes``
slot per evoked frame.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Optional

from .store import Handle, Slot, Store, Value

DOCUMENT_TYPE = "/s/document"
DOCUMENT_TEXT = "/s/document/text"
DOCUMENT_TOKENS = "/s/document/tokens"
DOCUMENT_MENTION = "/s/document/mention"
TOKEN_TEXT = "/s/token/text"
TOKEN_START = "/s/token/start"
TOKEN_LENGTH = "/s/token/length"
PHRASE_TYPE = "/s/phrase"
PHRASE_BEGIN = "/s/phrase/begin"
PHRASE_LENGTH = "/s/phrase/length"
PHRASE_EVOKES = "/s/phrase/evokes"

# Frame types that belong to the document schema rather than to the
# semantic graph itself.
STRUCTURAL_TYPES = frozenset([DOCUMENT_TYPE, PHRASE_TYPE])

_PUNCT = frozenset(string.punctuation)


class SchemaError(Exception):
    """A frame does not follow the document schema."""


@dataclass(frozen=True)
class Token:
    """One token: its text plus byte offsets into the document text."""

    text: str
    start: int
    length: int


@dataclass
class Mention:
    """A token span evoking one or more frames."""

    begin: int
    length: int
    evoked: list[Handle]

    @property
    def span(self) -> tuple[int, int]:
        return (self.begin, self.length)

    @property
    def end(self) -> int:
        return self.begin + self.length


@dataclass
class Document:
    """Token sequence plus mentions over frames living in `store`."""

    text: str
    tokens: list[Token]
    mentions: list[Mention]
    store: Store

    def sort_mentions(self) -> None:
        """Normalize mention order: by begin, longer spans first."""
        self.mentions.sort(key=lambda m: (m.begin, -m.length))

    def check(self) -> None:
        """Assert the document invariants; raises SchemaError."""
        data = self.text.encode("utf-8")
        pos = 0
        for token in self.tokens:
            if token.start < pos:
                raise SchemaError("tokens overlap or are out of order")
            if data[token.start:token.start + token.length].decode("utf-8") != token.text:
                raise SchemaError(f"token text mismatch at byte {token.start}")
            pos = token.start + token.length
        previous = None
        for mention in self.mentions:
            if mention.length < 1 or mention.begin < 0:
                raise SchemaError("mention span out of range")
            if mention.begin + mention.length > len(self.tokens):
                raise SchemaError("mention extends past the last token")
            if not mention.evoked:
                raise SchemaError("mention evokes no frame")
            for frame in mention.evoked:
                self.store.slots(frame)  # resolves, raises otherwise
            key = (mention.begin, -mention.length)
            if previous is not None and key < previous:
                raise SchemaError("mentions are not sorted")
            previous = key

    def span_text(self, begin: int, length: int) -> str:
        toks = self.tokens[begin:begin + length]
        if not toks:
            return ""
        data = self.text.encode("utf-8")
        first, last = toks[0], toks[-1]
        return data[first.start:last.start + last.length].decode("utf-8")


def tokenize(text: str) -> list[Token]:
    """Split text on whitespace, with each ASCII punctuation character
    forming its own token; offsets are byte offsets into UTF-8."""
    tokens: list[Token] = []
    word_chars: list[str] = []
    word_start = 0
    byte_pos = 0

    def flush() -> None:
        if word_chars:
            text_piece = "".join(word_chars)
            tokens.append(Token(text_piece, word_start, len(text_piece.encode("utf-8"))))
            word_chars.clear()

    for ch in text:
        width = len(ch.encode("utf-8"))
        if ch.isspace():
            flush()
        elif ch in _PUNCT:
            flush()
            tokens.append(Token(ch, byte_pos, width))
        else:
            if not word_chars:
                word_start = byte_pos
            word_chars.append(ch)
        byte_pos += width
    flush()
    return tokens


def doc_to_frame(doc: Document) -> Handle:
    """Serialize a document into its store as a schema frame."""
    store = doc.store
    isa = store.isa
    token_frames = []
    for token in doc.tokens:
        token_frames.append(store.new_frame([
            (store.intern(TOKEN_TEXT), token.text),
            (store.intern(TOKEN_START), token.start),
            (store.intern(TOKEN_LENGTH), token.length),
        ]))
    slots: list[tuple[Handle, Value]] = [
        (isa, store.intern(DOCUMENT_TYPE)),
        (store.intern(DOCUMENT_TEXT), doc.text),
        (store.intern(DOCUMENT_TOKENS), token_frames),
    ]
    mention_role = store.intern(DOCUMENT_MENTION)
    for mention in doc.mentions:
        phrase_slots: list[tuple[Handle, Value]] = [
            (isa, store.intern(PHRASE_TYPE)),
            (store.intern(PHRASE_BEGIN), mention.begin),
        ]
        if mention.length != 1:
            phrase_slots.append((store.intern(PHRASE_LENGTH), mention.length))
        evokes = store.intern(PHRASE_EVOKES)
        for frame in mention.evoked:
            phrase_slots.append((evokes, frame))
        slots.append((mention_role, store.new_frame(phrase_slots)))
    return store.new_frame(slots)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def doc_from_frame(handle: Handle, store: Store) -> Document:
    """Read a schema frame back into a Document view."""
    isa = store.isa
    doc_type = store.get_role(handle, isa)
    _require(isinstance(doc_type, Handle) and doc_type.is_symbol()
             and store.symbol_name(doc_type) == DOCUMENT_TYPE,
             "frame is not a document (missing isa /s/document)")

    text = store.get_role(handle, store.intern(DOCUMENT_TEXT))
    _require(isinstance(text, str), "missing /s/document/text")

    tokens: list[Token] = []
    token_array = store.get_role(handle, store.intern(DOCUMENT_TOKENS))
    if token_array is None:
        token_array = []
    _require(isinstance(token_array, list), "/s/document/tokens must be an array")
    text_role = store.intern(TOKEN_TEXT)
    start_role = store.intern(TOKEN_START)
    length_role = store.intern(TOKEN_LENGTH)
    for item in token_array:
        _require(isinstance(item, Handle) and item.is_frame(), "malformed token frame")
        token_text = store.get_role(item, text_role)
        start = store.get_role(item, start_role)
        length = store.get_role(item, length_role)
        _require(isinstance(token_text, str) and isinstance(start, int)
                 and isinstance(length, int), "malformed token frame")
        tokens.append(Token(token_text, start, length))

    mentions: list[Mention] = []
    begin_role = store.intern(PHRASE_BEGIN)
    len_role = store.intern(PHRASE_LENGTH)
    evokes_role = store.intern(PHRASE_EVOKES)
    for slot in store.slots(handle):
        if slot.role != store.intern(DOCUMENT_MENTION):
            continue
        phrase = slot.value
        _require(isinstance(phrase, Handle) and phrase.is_frame(), "malformed mention")
        begin = store.get_role(phrase, begin_role)
        _require(isinstance(begin, int), "phrase missing /s/phrase/begin")
        length = store.get_role(phrase, len_role)
        if length is None:
            length = 1
        _require(isinstance(length, int) and length >= 1, "bad /s/phrase/length")
        evoked = [s.value for s in store.slots(phrase) if s.role == evokes_role]
        _require(all(isinstance(e, Handle) and e.is_frame() for e in evoked),
                 "phrase evokes a non-frame")
        _require(len(evoked) >= 1, "phrase evokes no frame")
        mentions.append(Mention(begin, length, list(evoked)))

    doc = Document(text, tokens, mentions, store)
    doc.sort_mentions()
    doc.check()
    return doc


def frame_graph(doc: Document) -> list[Handle]:
    """All semantic frames of a document in a canonical order.

    Starts from the evoked frames in mention order and closes over
    frame-to-frame links in both directions (embedded frames point at
    evoked ones and are not reachable by outgoing links alone).
    Document and phrase schema frames are excluded.
    """
    store = doc.store
    ordered: list[Handle] = []
    seen: set[Handle] = set()

    def admit(frame: Handle) -> None:
        if frame not in seen and not _is_structural(store, frame):
            seen.add(frame)
            ordered.append(frame)

    for mention in doc.mentions:
        for frame in mention.evoked:
            admit(frame)

    # Incoming edges require an arena scan; build the reverse index once.
    incoming: dict[Handle, list[Handle]] = {}
    for frame in store.frames():
        if _is_structural(store, frame):
            continue
        for slot in store.slots(frame):
            if isinstance(slot.value, Handle) and slot.value.is_frame():
                incoming.setdefault(slot.value, []).append(frame)

    cursor = 0
    while cursor < len(ordered):
        frame = ordered[cursor]
        cursor += 1
        for slot in store.slots(frame):
            if isinstance(slot.value, Handle) and slot.value.is_frame():
                admit(slot.value)
        for source in incoming.get(frame, ()):
            admit(source)
    return ordered


def _is_structural(store: Store, frame: Handle) -> bool:
    value = store.get_role(frame, store.isa)
    return (isinstance(value, Handle) and value.is_symbol()
            and store.symbol_name(value) in STRUCTURAL_TYPES)


def evoked_frames(doc: Document) -> list[Handle]:
    """Frames evoked by at least one mention, in mention order."""
    seen: set[Handle] = set()
    out: list[Handle] = []
    for mention in doc.mentions:
        for frame in mention.evoked:
            if frame not in seen:
                seen.add(frame)
                out.append(frame)
    return out


def spans_to_frames(doc: Document) -> dict[tuple[int, int], list[Handle]]:
    """Map each (begin, length) span to the frames it evokes, merged
    across same-span mentions, preserving order and dropping repeats."""
    table: dict[tuple[int, int], list[Handle]] = {}
    for mention in doc.mentions:
        frames = table.setdefault(mention.span, [])
        for frame in mention.evoked:
            if frame not in frames:
                frames.append(frame)
    return table
