"""Oracle: converts annotated documents into canonical transition
sequences and verifies graph-preserving round trips.

Canonical order, per token position left to right: evoke (or refer to)
each mention beginning there, longer spans first; immediately after each
evocation emit every link whose endpoints are now both evoked, ordered
by (source first-evocation order, slot order), then the fronted frame's
constant slots, then creations for its non-evoked neighbors; then shift.
One stop closes the sequence.  Buffer indices are computed against a
simulated attention buffer at emission time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .document import Document, frame_graph, spans_to_frames
from .store import Handle, Store
from .transitions import (Action, ParserState, SymbolName, run_sequence)


class UnrepresentableDocumentError(Exception):
    """The document's frame graph cannot be expressed by the transition
    system (for example a frame that is neither evoked nor attached to
    an evoked frame by exactly one role)."""


@dataclass
class TransitionSequence:
    actions: list[Action]

    def __iter__(self):
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def to_text(self) -> str:
        return "\n".join(action.to_text() for action in self.actions)


def _type_name(store: Store, frame: Handle) -> str:
    value = store.get_role(frame, store.isa)
    if isinstance(value, Handle) and value.is_symbol():
        return store.symbol_name(value)
    raise UnrepresentableDocumentError("frame has no symbol-valued isa slot")


def _constant_of(store: Store, value) -> object:
    if isinstance(value, Handle):
        if value.is_symbol():
            return SymbolName(store.symbol_name(value))
        raise UnrepresentableDocumentError("unexpected handle constant")
    if isinstance(value, (int, float, str)) and not isinstance(value, bool):
        return value
    raise UnrepresentableDocumentError(
        f"slot value {value!r} cannot be expressed as an action constant")


class _Generator:
    def __init__(self, doc: Document):
        self.doc = doc
        self.store = doc.store
        self.frames = frame_graph(doc)
        self.evoked: set[Handle] = set()
        for mention in doc.mentions:
            self.evoked.update(mention.evoked)
        self.state = ParserState(doc.text, doc.tokens)
        self.replay_of: dict[Handle, Handle] = {}
        self.evocation_order: dict[Handle, int] = {}
        self.emitted_slots: set[tuple[Handle, int]] = set()
        self.actions: list[Action] = []
        self.incoming: dict[Handle, list[tuple[Handle, int]]] = {}
        for frame in self.frames:
            for i, slot in enumerate(self.store.slots(frame)):
                if isinstance(slot.value, Handle) and slot.value.is_frame():
                    self.incoming.setdefault(slot.value, []).append((frame, i))

    def run(self) -> list[Action]:
        self._validate()
        by_begin: dict[int, list] = {}
        for mention in self.doc.mentions:  # already (begin, -length) sorted
            by_begin.setdefault(mention.begin, []).append(mention)
        for i in range(len(self.doc.tokens)):
            for mention in by_begin.get(i, ()):
                for frame in mention.evoked:
                    self._evoke(frame, mention.length)
            self._emit(Action.shift())
        self._emit(Action.stop())
        return self.actions

    def _validate(self) -> None:
        for frame in self.frames:
            slots = self.store.slots(frame)
            for slot in slots:
                if not slot.role.is_symbol():
                    raise UnrepresentableDocumentError("slot role is not a symbol")
            if frame in self.evoked:
                _type_name(self.store, frame)
                continue
            # A non-evoked frame must hang off the evoked graph by
            # exactly one role, in either direction.
            edges = 0
            for slot in slots:
                if isinstance(slot.value, Handle) and slot.value.is_frame():
                    edges += 1
                    if slot.value not in self.evoked:
                        raise UnrepresentableDocumentError(
                            "non-evoked frame links to another non-evoked frame")
            for source, _ in self.incoming.get(frame, ()):
                edges += 1
                if source not in self.evoked:
                    raise UnrepresentableDocumentError(
                        "non-evoked frame reached only through non-evoked frames")
            if edges != 1:
                raise UnrepresentableDocumentError(
                    f"non-evoked frame has {edges} connecting roles, expected 1")
            _type_name(self.store, frame)

    def _emit(self, action: Action) -> None:
        self.actions.append(action)
        self.state.apply(action)

    def _index(self, gold_frame: Handle) -> int:
        return self.state.attention_index(self.replay_of[gold_frame])

    def _evoke(self, frame: Handle, length: int) -> None:
        store = self.store
        if frame not in self.replay_of:
            self._emit(Action.evoke(_type_name(store, frame), length))
            self.replay_of[frame] = self.state.attention[0]
            self.evocation_order[frame] = len(self.evocation_order)
            first = True
        else:
            self._emit(Action.refer(self._index(frame), length))
            first = False
        self._emit_connects()
        if first:
            self._emit_assigns(frame, skip_first_isa=True)
            self._emit_creations(frame)

    def _emit_connects(self) -> None:
        pending = []
        for frame, order in sorted(self.evocation_order.items(), key=lambda kv: kv[1]):
            for i, slot in enumerate(self.store.slots(frame)):
                if (frame, i) in self.emitted_slots:
                    continue
                value = slot.value
                if isinstance(value, Handle) and value.is_frame() \
                        and value in self.replay_of and value in self.evoked:
                    pending.append((order, i, frame, slot.role, value))
        for _, i, frame, role, value in sorted(pending, key=lambda p: (p[0], p[1])):
            self.emitted_slots.add((frame, i))
            self._emit(Action.connect(self._index(frame),
                                      self.store.symbol_name(role),
                                      self._index(value)))

    def _emit_assigns(self, frame: Handle, skip_first_isa: bool) -> None:
        store = self.store
        skipped_isa = not skip_first_isa
        for i, slot in enumerate(store.slots(frame)):
            if (frame, i) in self.emitted_slots:
                continue
            if slot.role == store.id:
                self.emitted_slots.add((frame, i))
                continue
            if slot.role == store.isa and not skipped_isa:
                skipped_isa = True
                self.emitted_slots.add((frame, i))
                continue
            value = slot.value
            if isinstance(value, Handle) and value.is_frame():
                continue  # link slot, handled by connect/creation emission
            self.emitted_slots.add((frame, i))
            self._emit(Action.assign(self._index(frame),
                                     store.symbol_name(slot.role),
                                     _constant_of(store, value)))

    def _emit_creations(self, frame: Handle) -> None:
        """EMBED/ELABORATE the non-evoked neighbors of a just-evoked frame."""
        store = self.store
        for i, slot in enumerate(store.slots(frame)):
            value = slot.value
            if (frame, i) in self.emitted_slots:
                continue
            if not (isinstance(value, Handle) and value.is_frame()):
                continue
            if value in self.evoked or value in self.replay_of:
                continue
            self.emitted_slots.add((frame, i))
            self._emit(Action.elaborate(self._index(frame),
                                        store.symbol_name(slot.role),
                                        _type_name(store, value)))
            self.replay_of[value] = self.state.attention[0]
            self._emit_assigns(value, skip_first_isa=True)
        for source, i in self.incoming.get(frame, ()):
            if source in self.evoked or source in self.replay_of:
                continue
            if (source, i) in self.emitted_slots:
                continue
            self.emitted_slots.add((source, i))
            role = store.slots(source)[i].role
            self._emit(Action.embed(self._index(frame),
                                    store.symbol_name(role),
                                    _type_name(store, source)))
            self.replay_of[source] = self.state.attention[0]
            self._emit_assigns(source, skip_first_isa=True)


def generate(doc: Document) -> TransitionSequence:
    """Canonical transition sequence reconstructing `doc`'s annotations."""
    return TransitionSequence(_Generator(doc).run())


def replay(doc: Document, sequence: TransitionSequence) -> Document:
    """Apply a sequence over the document's tokens in a fresh store."""
    state = run_sequence(doc.text, doc.tokens, list(sequence))
    return state.to_document()


def roundtrip_check(doc: Document) -> bool:
    """True iff replaying the generated sequence reproduces the
    document's mention set and frame graph up to isomorphism."""
    pred = replay(doc, generate(doc))
    return _equivalent(doc, pred)


def _slot_key(store: Store, role: Handle, value, mapping: dict[Handle, Handle],
              universe: set[Handle]):
    role_name = store.symbol_name(role)
    if isinstance(value, Handle):
        if value.is_symbol():
            return (role_name, "sym", store.symbol_name(value))
        if value in mapping:
            return (role_name, "frame", mapping[value])
        if value in universe:
            return (role_name, "nonevoked", _signature(store, value))
        return (role_name, "foreign", value)
    return (role_name, "lit", type(value).__name__, _hashable(value))


def _hashable(value):
    return tuple(_hashable(v) for v in value) if isinstance(value, list) else value


def _signature(store: Store, frame: Handle):
    """Content signature of a non-evoked frame (type plus constants)."""
    parts = []
    for slot in store.slots(frame):
        value = slot.value
        if isinstance(value, Handle) and value.is_frame():
            continue  # its single link edge, compared structurally elsewhere
        if isinstance(value, Handle):
            parts.append((store.symbol_name(slot.role), "sym", store.symbol_name(value)))
        else:
            parts.append((store.symbol_name(slot.role), "lit",
                          type(value).__name__, _hashable(value)))
    return tuple(sorted(parts, key=repr))


def _equivalent(gold: Document, pred: Document) -> bool:
    gold_spans = spans_to_frames(gold)
    pred_spans = spans_to_frames(pred)
    if set(gold_spans) != set(pred_spans):
        return False

    mapping: dict[Handle, Handle] = {}
    for span in sorted(gold_spans):
        g_frames, p_frames = gold_spans[span], pred_spans[span]
        if len(g_frames) != len(p_frames):
            return False
        for g, p in zip(g_frames, p_frames):
            if mapping.setdefault(g, p) != p:
                return False

    gold_universe = frame_graph(gold)
    pred_universe = frame_graph(pred)
    if len(gold_universe) != len(pred_universe):
        return False
    gold_set, pred_set = set(gold_universe), set(pred_universe)

    reverse = {p: g for g, p in mapping.items()}
    if len(reverse) != len(mapping):
        return False

    for g, p in mapping.items():
        g_slots = [s for s in gold.store.slots(g) if s.role != gold.store.id]
        p_slots = [s for s in pred.store.slots(p) if s.role != pred.store.id]
        if len(g_slots) != len(p_slots):
            return False
        g_keys = sorted((_slot_key(gold.store, s.role, s.value, mapping, gold_set)
                         for s in g_slots), key=repr)
        identity = {h: h for h in reverse}
        p_keys = sorted((_slot_key(pred.store, s.role, s.value, identity, pred_set)
                         for s in p_slots), key=repr)
        # Frame-valued keys on the pred side are already pred handles;
        # the gold side was mapped through the correspondence.
        if g_keys != p_keys:
            return False

    # Embedded frames: non-evoked sources pointing into the mapped graph
    # must match by (role, target, signature) multisets.
    def embed_profile(doc: Document, universe: list[Handle],
                      into: dict[Handle, Handle]) -> list:
        profile = []
        evoked = set(into)
        for frame in universe:
            if frame in evoked:
                continue
            for slot in doc.store.slots(frame):
                if isinstance(slot.value, Handle) and slot.value.is_frame() \
                        and slot.value in into:
                    profile.append((doc.store.symbol_name(slot.role),
                                    into[slot.value],
                                    _signature(doc.store, frame)))
        return sorted(profile, key=repr)

    gold_profile = embed_profile(gold, gold_universe, mapping)
    pred_profile = embed_profile(pred, pred_universe, {p: p for p in reverse})
    return gold_profile == pred_profile


@dataclass
class ActionStats:
    """Raw and unique-argument counts per action kind."""

    raw: dict[str, int]
    unique: dict[str, set[str]]

    KINDS = ("SHIFT", "STOP", "EVOKE", "REFER", "CONNECT", "ASSIGN",
             "EMBED", "ELABORATE")

    def rows(self) -> list[tuple[str, int, int]]:
        return [(kind, len(self.unique.get(kind, ())), self.raw.get(kind, 0))
                for kind in self.KINDS]

    @property
    def total_raw(self) -> int:
        return sum(self.raw.values())

    @property
    def total_unique(self) -> int:
        return sum(len(v) for v in self.unique.values())

    def format_table(self) -> str:
        lines = [f"{'Action Type':<12} {'# Unique Args':>14} {'Raw Count':>12}"]
        for kind, uniq, raw in self.rows():
            lines.append(f"{kind:<12} {uniq:>14,} {raw:>12,}")
        lines.append(f"{'Total':<12} {self.total_unique:>14,} {self.total_raw:>12,}")
        return "\n".join(lines)


def action_stats(corpus: list[Document]) -> ActionStats:
    """Tally oracle actions over a corpus; raises on unrepresentable docs."""
    raw: dict[str, int] = {}
    unique: dict[str, set[str]] = {}
    for doc in corpus:
        for action in generate(doc):
            raw[action.kind] = raw.get(action.kind, 0) + 1
            unique.setdefault(action.kind, set()).add(action.to_text())
    return ActionStats(raw, unique)
