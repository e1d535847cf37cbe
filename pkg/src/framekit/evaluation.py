"""Graph-alignment scoring of predicted against gold documents.

Spans are matched on exact (begin, length).  Evoked frames of matched
spans are aligned greedily in mention order, and the alignment is
extended to a fixpoint over outgoing role links: whenever both sides of
an aligned pair carry a same-role link to unaligned frames, those
targets become aligned.  Precision/recall/F1 are computed for Span,
Frame, Type, Role (frame-valued slots) and Label (constant-valued
slots), plus the Slot (Type+Role+Label) and Combined (all five)
aggregates.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .document import Document, frame_graph, spans_to_frames
from .store import Handle, Store

METRICS = ("Span", "Frame", "Type", "Role", "Label", "Slot", "Combined")


class TokenMismatchError(Exception):
    """Gold and predicted documents are over different token sequences."""


@dataclass
class MetricCounts:
    matched_pred: int = 0
    total_pred: int = 0
    matched_gold: int = 0
    total_gold: int = 0

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(self.matched_pred + other.matched_pred,
                            self.total_pred + other.total_pred,
                            self.matched_gold + other.matched_gold,
                            self.total_gold + other.total_gold)

    @property
    def precision(self) -> float:
        return self.matched_pred / self.total_pred if self.total_pred else 0.0

    @property
    def recall(self) -> float:
        return self.matched_gold / self.total_gold if self.total_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class EvalReport:
    """Per-metric counts; Slot and Combined are derived aggregates."""

    span: MetricCounts = field(default_factory=MetricCounts)
    frame: MetricCounts = field(default_factory=MetricCounts)
    type: MetricCounts = field(default_factory=MetricCounts)
    role: MetricCounts = field(default_factory=MetricCounts)
    label: MetricCounts = field(default_factory=MetricCounts)

    @property
    def slot(self) -> MetricCounts:
        return self.type + self.role + self.label

    @property
    def combined(self) -> MetricCounts:
        return self.span + self.frame + self.type + self.role + self.label

    def metric(self, name: str) -> MetricCounts:
        return getattr(self, name.lower())

    def __add__(self, other: "EvalReport") -> "EvalReport":
        return EvalReport(self.span + other.span, self.frame + other.frame,
                          self.type + other.type, self.role + other.role,
                          self.label + other.label)

    def format_table(self) -> str:
        lines = []
        for name in METRICS:
            counts = self.metric(name)
            lines.append(f"{name:<10} Precision {100 * counts.precision:>8.2f}")
            lines.append(f"{'':<10} Recall    {100 * counts.recall:>8.2f}")
            lines.append(f"{'':<10} F1        {100 * counts.f1:>8.2f}")
        return "\n".join(lines)

    def format_machine(self) -> str:
        lines = []
        for name in METRICS:
            counts = self.metric(name)
            key = name.lower()
            lines.append(f"{key}.precision={100 * counts.precision:.2f}")
            lines.append(f"{key}.recall={100 * counts.recall:.2f}")
            lines.append(f"{key}.f1={100 * counts.f1:.2f}")
            lines.append(f"{key}.matched_pred={counts.matched_pred}")
            lines.append(f"{key}.total_pred={counts.total_pred}")
            lines.append(f"{key}.matched_gold={counts.matched_gold}")
            lines.append(f"{key}.total_gold={counts.total_gold}")
        return "\n".join(lines)


def _check_tokens(gold: Document, pred: Document) -> None:
    gold_tokens = [(t.text, t.start, t.length) for t in gold.tokens]
    pred_tokens = [(t.text, t.start, t.length) for t in pred.tokens]
    if gold_tokens != pred_tokens:
        raise TokenMismatchError("gold and predicted token sequences differ")


def align(gold: Document, pred: Document) -> dict[Handle, Handle]:
    """Partial bijection from gold frames to predicted frames."""
    _check_tokens(gold, pred)
    gold_spans = spans_to_frames(gold)
    pred_spans = spans_to_frames(pred)

    mapping: dict[Handle, Handle] = {}
    taken: set[Handle] = set()
    for span in sorted(set(gold_spans) & set(pred_spans)):
        unaligned_gold = [g for g in gold_spans[span] if g not in mapping]
        unaligned_pred = [p for p in pred_spans[span] if p not in taken]
        for g, p in zip(unaligned_gold, unaligned_pred):
            mapping[g] = p
            taken.add(p)

    # Extend over same-role links until nothing changes.  Links are
    # followed in both directions: embedded frames point into the
    # aligned graph and are only reachable through incoming edges.
    gold_incoming = _incoming_index(gold.store, frame_graph(gold))
    pred_incoming = _incoming_index(pred.store, frame_graph(pred))
    changed = True
    while changed:
        changed = False
        for g in list(mapping):
            p = mapping[g]
            pairs = [
                (_link_targets(gold.store, g, mapping.keys()),
                 _link_targets(pred.store, p, taken)),
                (_grouped(gold_incoming.get(g, ()), mapping.keys()),
                 _grouped(pred_incoming.get(p, ()), taken)),
            ]
            for gold_by_role, pred_by_role in pairs:
                for role_name, g_list in gold_by_role.items():
                    p_list = pred_by_role.get(role_name, [])
                    for gv, pv in zip(g_list, p_list):
                        if gv in mapping or pv in taken:
                            continue
                        mapping[gv] = pv
                        taken.add(pv)
                        changed = True
    return mapping


def _incoming_index(store: Store, frames: list[Handle]) -> dict[Handle, list[tuple[str, Handle]]]:
    """target -> [(role, source)] over the semantic frames, in a
    deterministic (frame order, slot order) traversal."""
    index: dict[Handle, list[tuple[str, Handle]]] = {}
    for frame in frames:
        for slot in store.slots(frame):
            if slot.role == store.id or slot.role == store.isa:
                continue
            if not slot.role.is_symbol():
                continue
            value = slot.value
            if isinstance(value, Handle) and value.is_frame():
                index.setdefault(value, []).append(
                    (store.symbol_name(slot.role), frame))
    return index


def _grouped(entries, aligned) -> dict[str, list[Handle]]:
    out: dict[str, list[Handle]] = {}
    seen: set[tuple[str, Handle]] = set()
    for role_name, frame in entries:
        if frame in aligned or (role_name, frame) in seen:
            continue
        seen.add((role_name, frame))
        out.setdefault(role_name, []).append(frame)
    return out


def _link_targets(store: Store, frame: Handle, aligned) -> dict[str, list[Handle]]:
    """Unaligned frame targets grouped by role, in slot order, deduped."""
    out: dict[str, list[Handle]] = {}
    seen: set[tuple[str, Handle]] = set()
    for slot in store.slots(frame):
        if slot.role == store.id or slot.role == store.isa:
            continue
        value = slot.value
        if not (isinstance(value, Handle) and value.is_frame()):
            continue
        if value in aligned:
            continue
        role_name = store.symbol_name(slot.role) if slot.role.is_symbol() else None
        if role_name is None:
            continue
        if (role_name, value) in seen:
            continue
        seen.add((role_name, value))
        out.setdefault(role_name, []).append(value)
    return out


def _first_type(store: Store, frame: Handle):
    value = store.get_role(frame, store.isa)
    if isinstance(value, Handle) and value.is_symbol():
        return store.symbol_name(value)
    return None


def _constant_key(store: Store, value):
    if isinstance(value, Handle):
        return ("sym", store.symbol_name(value)) if value.is_symbol() else None
    if value is None:
        return ("nil",)
    if isinstance(value, list):
        return ("lit", "list", _freeze(value))
    return ("lit", type(value).__name__, value)


def _freeze(value):
    return tuple(_freeze(v) for v in value) if isinstance(value, list) else value


def _role_counter(store: Store, frame: Handle, rename) -> Counter:
    """Multiset of (role, target) links with the target renamed through
    `rename`; unaligned targets are dropped by returning None."""
    counter: Counter = Counter()
    for slot in store.slots(frame):
        if slot.role == store.id or slot.role == store.isa:
            continue
        if not slot.role.is_symbol():
            continue
        value = slot.value
        if isinstance(value, Handle) and value.is_frame():
            target = rename(value)
            if target is not None:
                counter[(store.symbol_name(slot.role), target)] += 1
    return counter


def _label_counter(store: Store, frame: Handle) -> Counter:
    counter: Counter = Counter()
    for slot in store.slots(frame):
        if slot.role == store.id or slot.role == store.isa:
            continue
        if not slot.role.is_symbol():
            continue
        value = slot.value
        if isinstance(value, Handle) and value.is_frame():
            continue
        key = _constant_key(store, value)
        if key is not None:
            counter[(store.symbol_name(slot.role), key)] += 1
    return counter


def _slot_totals(store: Store, frames: list[Handle]) -> tuple[int, int]:
    """(role slot count, label slot count) over `frames`."""
    roles = labels = 0
    for frame in frames:
        for slot in store.slots(frame):
            if slot.role == store.id or slot.role == store.isa:
                continue
            if not slot.role.is_symbol():
                continue
            if isinstance(slot.value, Handle) and slot.value.is_frame():
                roles += 1
            elif _constant_key(store, slot.value) is not None:
                labels += 1
    return roles, labels


def evaluate(gold: Document, pred: Document) -> EvalReport:
    """Score one predicted document against its gold annotation."""
    mapping = align(gold, pred)

    gold_span_set = set(spans_to_frames(gold))
    pred_span_set = set(spans_to_frames(pred))
    span_matched = len(gold_span_set & pred_span_set)
    span = MetricCounts(span_matched, len(pred_span_set),
                        span_matched, len(gold_span_set))

    gold_frames = frame_graph(gold)
    pred_frames = frame_graph(pred)
    frame = MetricCounts(len(mapping), len(pred_frames),
                         len(mapping), len(gold_frames))

    type_matched = 0
    for g, p in mapping.items():
        g_type = _first_type(gold.store, g)
        if g_type is not None and g_type == _first_type(pred.store, p):
            type_matched += 1
    type_counts = MetricCounts(
        type_matched,
        sum(1 for f in pred_frames if _first_type(pred.store, f) is not None),
        type_matched,
        sum(1 for f in gold_frames if _first_type(gold.store, f) is not None))

    role_matched = 0
    label_matched = 0
    aligned_pred = set(mapping.values())
    for g, p in mapping.items():
        gold_links = _role_counter(gold.store, g, lambda t: mapping.get(t))
        pred_links = _role_counter(pred.store, p,
                                   lambda t: t if t in aligned_pred else None)
        role_matched += sum((gold_links & pred_links).values())
        gold_labels = _label_counter(gold.store, g)
        pred_labels = _label_counter(pred.store, p)
        label_matched += sum((gold_labels & pred_labels).values())

    gold_roles, gold_labels = _slot_totals(gold.store, gold_frames)
    pred_roles, pred_labels = _slot_totals(pred.store, pred_frames)
    role = MetricCounts(role_matched, pred_roles, role_matched, gold_roles)
    label = MetricCounts(label_matched, pred_labels, label_matched, gold_labels)

    return EvalReport(span, frame, type_counts, role, label)


def evaluate_corpus(gold: list[Document], pred: list[Document]) -> EvalReport:
    """Micro-averaged report: counts are summed before deriving P/R/F1."""
    if len(gold) != len(pred):
        raise ValueError(f"corpus length mismatch: {len(gold)} gold vs "
                         f"{len(pred)} predicted documents")
    report = EvalReport()
    for g, p in zip(gold, pred):
        report = report + evaluate(g, p)
    return report
