"""Shared test utilities: the worked-example document, an exact
backtracking graph-isomorphism oracle, a brute-force metric counter, and
seeded random generators for stores, documents, and perturbations."""

from __future__ import annotations

import random
import string

from framekit.document import Document, Mention, frame_graph, tokenize
from framekit.evaluation import align
from framekit.store import Handle, Store

HIT_DOC_TEXT = """{
  :/s/document
  /s/document/text: "John hit the ball"
  /s/document/tokens: [
    {/s/token/text: "John" /s/token/start: 0  /s/token/length: 4},
    {/s/token/text: "hit"  /s/token/start: 5  /s/token/length: 3},
    {/s/token/text: "the"  /s/token/start: 9  /s/token/length: 3},
    {/s/token/text: "ball" /s/token/start: 13 /s/token/length: 4}
  ]
  /s/document/mention: {
    :/s/phrase /s/phrase/begin: 0
    /s/phrase/evokes: {=#1 :/saft/person }
  }
  /s/document/mention: {
    :/s/phrase /s/phrase/begin: 1
    /s/phrase/evokes: {
      :/pb/hit-01
      /pb/arg0: #1
      /pb/arg1: #2
    }
  }
  /s/document/mention: {
    :/s/phrase /s/phrase/begin: 3
    /s/phrase/evokes: {=#2 :/saft/consumer_good }
  }
}
"""

HIT_SEQUENCE = """EVOKE(/saft/person, 1)
SHIFT
EVOKE(/pb/hit-01, 1)
CONNECT(0, /pb/arg0, 1)
SHIFT
SHIFT
EVOKE(/saft/consumer_good, 1)
CONNECT(1, /pb/arg1, 0)
SHIFT
STOP"""


def hit_document() -> Document:
    from framekit.document import doc_from_frame
    from framekit.notation import parse_or_raise
    store = Store()
    top = parse_or_raise(HIT_DOC_TEXT, store)
    return doc_from_frame(top[0], store)


# ---------------------------------------------------------------------------
# Exact graph isomorphism (backtracking); the independent oracle for
# notation round-trips.
# ---------------------------------------------------------------------------


def _reachable(store: Store, roots: list[Handle]) -> list[Handle]:
    seen: list[Handle] = []
    seen_set: set[Handle] = set()
    stack = list(reversed(roots))
    while stack:
        value = stack.pop()
        if isinstance(value, list):
            stack.extend(reversed(value))
            continue
        if not (isinstance(value, Handle) and value.is_frame()):
            continue
        if value in seen_set:
            continue
        seen_set.add(value)
        seen.append(value)
        for slot in store.slots(value):
            if slot.role.is_frame():
                stack.append(slot.role)
            stack.append(slot.value)
    return seen


def _local_signature(store: Store, frame: Handle):
    """Frame content with link endpoints abstracted away."""
    parts = []
    for slot in store.slots(frame):
        role = ("frame" if slot.role.is_frame() else store.symbol_name(slot.role))
        parts.append((role, _value_shape(store, slot.value)))
    return tuple(sorted(parts, key=repr))


def _value_shape(store: Store, value):
    if isinstance(value, Handle):
        if value.is_frame():
            return ("frame",)
        return ("sym", store.symbol_name(value))
    if isinstance(value, list):
        return ("array", tuple(_value_shape(store, v) for v in value))
    if value is None:
        return ("nil",)
    return ("lit", type(value).__name__, value)


def _mapped_value(store: Store, value, assignment):
    if isinstance(value, Handle):
        if value.is_frame():
            return ("frame", assignment[value])
        return ("sym", store.symbol_name(value))
    if isinstance(value, list):
        return ("array", tuple(_mapped_value(store, v, assignment) for v in value))
    if value is None:
        return ("nil",)
    return ("lit", type(value).__name__, value)


def _identity_value(store: Store, value):
    return _mapped_value(store, value, _Identity())


class _Identity(dict):
    def __missing__(self, key):
        return key


def graphs_isomorphic(store_a: Store, roots_a: list[Handle],
                      store_b: Store, roots_b: list[Handle]) -> bool:
    """Exact isomorphism: a bijection over reachable frames preserving
    slot multisets, symbol names, and literals, matching roots by
    position."""
    if len(roots_a) != len(roots_b):
        return False
    frames_a = _reachable(store_a, roots_a)
    frames_b = _reachable(store_b, roots_b)
    if len(frames_a) != len(frames_b):
        return False

    sig_b: dict = {}
    for frame in frames_b:
        sig_b.setdefault(_local_signature(store_b, frame), []).append(frame)
    candidates = {}
    for frame in frames_a:
        candidates[frame] = sig_b.get(_local_signature(store_a, frame), [])
        if not candidates[frame]:
            return False

    assignment: dict[Handle, Handle] = {}
    used: set[Handle] = set()
    for a, b in zip(roots_a, roots_b):
        if assignment.get(a, b) != b:
            return False
        if a not in assignment and b in used:
            return False
        assignment[a] = b
        used.add(b)

    def full_check() -> bool:
        for frame in frames_a:
            partner = assignment[frame]
            keys_a = sorted(
                ((("frame" if s.role.is_frame() else store_a.symbol_name(s.role)),
                  _mapped_value(store_a, s.value, assignment))
                 for s in store_a.slots(frame)), key=repr)
            keys_b = sorted(
                ((("frame" if s.role.is_frame() else store_b.symbol_name(s.role)),
                  _identity_value(store_b, s.value))
                 for s in store_b.slots(partner)), key=repr)
            mapped_roles_a = []
            for s in store_a.slots(frame):
                if s.role.is_frame():
                    mapped_roles_a.append(assignment[s.role])
            roles_b = [s.role for s in store_b.slots(partner) if s.role.is_frame()]
            if sorted(mapped_roles_a, key=repr) != sorted(roles_b, key=repr):
                return False
            if keys_a != keys_b:
                return False
        return True

    unassigned = [f for f in frames_a if f not in assignment]

    def backtrack(index: int) -> bool:
        if index == len(unassigned):
            return full_check()
        frame = unassigned[index]
        for option in candidates[frame]:
            if option in used:
                continue
            assignment[frame] = option
            used.add(option)
            if backtrack(index + 1):
                return True
            del assignment[frame]
            used.discard(option)
        return False

    return backtrack(0)


def documents_isomorphic(gold: Document, pred: Document) -> bool:
    """Document-level isomorphism via the store-level oracle applied to
    serialized document frames."""
    from framekit.document import doc_to_frame
    a = doc_to_frame(gold)
    b = doc_to_frame(pred)
    return graphs_isomorphic(gold.store, [a], pred.store, [b])


# ---------------------------------------------------------------------------
# Brute-force metric counter: an independent recount of every metric
# given the alignment, using explicit scans with used-flags instead of
# counter intersections.
# ---------------------------------------------------------------------------


def brute_force_counts(gold: Document, pred: Document) -> dict[str, tuple[int, int, int, int]]:
    mapping = align(gold, pred)
    out: dict[str, tuple[int, int, int, int]] = {}

    gold_spans = []
    for mention in gold.mentions:
        if mention.span not in gold_spans:
            gold_spans.append(mention.span)
    pred_spans = []
    for mention in pred.mentions:
        if mention.span not in pred_spans:
            pred_spans.append(mention.span)
    span_hits = sum(1 for span in gold_spans if span in pred_spans)
    out["Span"] = (span_hits, len(pred_spans), span_hits, len(gold_spans))

    gold_frames = frame_graph(gold)
    pred_frames = frame_graph(pred)
    aligned_gold = [f for f in gold_frames if f in mapping]
    out["Frame"] = (len(aligned_gold), len(pred_frames),
                    len(aligned_gold), len(gold_frames))

    def first_type(store, frame):
        for slot in store.slots(frame):
            if slot.role == store.isa and isinstance(slot.value, Handle) \
                    and slot.value.is_symbol():
                return store.symbol_name(slot.value)
        return None

    gold_typed = [f for f in gold_frames if first_type(gold.store, f) is not None]
    pred_typed = [f for f in pred_frames if first_type(pred.store, f) is not None]
    type_hits = 0
    for frame in gold_typed:
        partner = mapping.get(frame)
        if partner is not None and \
                first_type(gold.store, frame) == first_type(pred.store, partner):
            type_hits += 1
    out["Type"] = (type_hits, len(pred_typed), type_hits, len(gold_typed))

    def link_slots(store, frame):
        slots = []
        for slot in store.slots(frame):
            if slot.role in (store.id, store.isa) or not slot.role.is_symbol():
                continue
            if isinstance(slot.value, Handle) and slot.value.is_frame():
                slots.append((store.symbol_name(slot.role), slot.value))
        return slots

    def constant_slots(store, frame):
        slots = []
        for slot in store.slots(frame):
            if slot.role in (store.id, store.isa) or not slot.role.is_symbol():
                continue
            value = slot.value
            if isinstance(value, Handle):
                if value.is_symbol():
                    slots.append((store.symbol_name(slot.role),
                                  ("sym", store.symbol_name(value))))
                continue
            if value is None:
                slots.append((store.symbol_name(slot.role), ("nil",)))
            elif isinstance(value, list):
                slots.append((store.symbol_name(slot.role),
                              ("lit", "list", _freeze(value))))
            else:
                slots.append((store.symbol_name(slot.role),
                              ("lit", type(value).__name__, value)))
        return slots

    role_total_gold = sum(len(link_slots(gold.store, f)) for f in gold_frames)
    role_total_pred = sum(len(link_slots(pred.store, f)) for f in pred_frames)
    role_hits = 0
    for frame in gold_frames:
        partner = mapping.get(frame)
        if partner is None:
            continue
        remaining = link_slots(pred.store, partner)
        used = [False] * len(remaining)
        for role_name, target in link_slots(gold.store, frame):
            wanted = mapping.get(target)
            if wanted is None:
                continue
            for index, (p_role, p_target) in enumerate(remaining):
                if used[index]:
                    continue
                if p_role == role_name and p_target == wanted:
                    used[index] = True
                    role_hits += 1
                    break
    out["Role"] = (role_hits, role_total_pred, role_hits, role_total_gold)

    label_total_gold = sum(len(constant_slots(gold.store, f)) for f in gold_frames)
    label_total_pred = sum(len(constant_slots(pred.store, f)) for f in pred_frames)
    label_hits = 0
    for frame in gold_frames:
        partner = mapping.get(frame)
        if partner is None:
            continue
        remaining = constant_slots(pred.store, partner)
        used = [False] * len(remaining)
        for role_name, key in constant_slots(gold.store, frame):
            for index, (p_role, p_key) in enumerate(remaining):
                if used[index]:
                    continue
                if p_role == role_name and p_key == key:
                    used[index] = True
                    label_hits += 1
                    break
    out["Label"] = (label_hits, label_total_pred, label_hits, label_total_gold)

    def summed(names):
        return tuple(sum(out[n][i] for n in names) for i in range(4))

    out["Slot"] = summed(("Type", "Role", "Label"))
    out["Combined"] = summed(("Span", "Frame", "Type", "Role", "Label"))
    return out


def _freeze(value):
    return tuple(_freeze(v) for v in value) if isinstance(value, list) else value


# ---------------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------------

TYPE_POOL = ["/t/alpha", "/t/beta", "/t/gamma", "/t/delta"]
ROLE_POOL = ["/r/zero", "/r/one", "/r/two"]
CONST_ROLE_POOL = ["/c/note", "/c/rank"]


def random_store_graph(rng: random.Random, ensure_cycle: bool = False
                       ) -> tuple[Store, list[Handle]]:
    """A random frame graph: literals, arrays, symbols, shared frames,
    named ids, and (optionally) a guaranteed cycle."""
    store = Store()
    count = rng.randint(1, 8)
    frames = [store.new_frame() for _ in range(count)]

    def random_value(depth=0):
        choice = rng.random()
        if choice < 0.25:
            return rng.randint(-100, 100)
        if choice < 0.4:
            return round(rng.uniform(-5, 5), 3)
        if choice < 0.55:
            alphabet = string.ascii_letters + ' \\"\n\t\u00e9'
            return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 6)))
        if choice < 0.7:
            return store.intern(rng.choice(TYPE_POOL + ROLE_POOL))
        if choice < 0.8 and depth == 0:
            return [random_value(1) for _ in range(rng.randint(0, 3))]
        if choice < 0.9:
            return None
        return rng.choice(frames)

    for frame in frames:
        if rng.random() < 0.7:
            store.add_slot(frame, store.isa, store.intern(rng.choice(TYPE_POOL)))
        for _ in range(rng.randint(0, 4)):
            store.add_slot(frame, store.intern(rng.choice(ROLE_POOL)), random_value())
        if rng.random() < 0.15:
            name = f"/name/n{rng.randrange(1 << 20)}"
            try:
                store.add_slot(frame, store.id, store.intern(name))
            except Exception:
                pass

    if ensure_cycle and len(frames) >= 2:
        store.add_slot(frames[0], store.intern("/r/loop"), frames[1])
        store.add_slot(frames[1], store.intern("/r/loop"), frames[0])
    elif ensure_cycle:
        store.add_slot(frames[0], store.intern("/r/loop"), frames[0])

    roots = [f for f in frames if rng.random() < 0.7] or [frames[0]]
    return store, roots


def random_document(rng: random.Random) -> Document:
    """A random oracle-representable document: multi-evoke mentions,
    re-evoked frames (REFER), cross links, constants, and non-evoked
    frames attached by one role in either direction."""
    store = Store()
    n_tokens = rng.randint(0, 8)
    words = ["".join(rng.choice(string.ascii_lowercase)
                     for _ in range(rng.randint(1, 5)))
             for _ in range(n_tokens)]
    text = " ".join(words)
    tokens = tokenize(text)
    assert len(tokens) == n_tokens

    mentions: list[Mention] = []
    evoked: list[Handle] = []
    span_types: dict[tuple[int, int], set[str]] = {}
    if n_tokens:
        for _ in range(rng.randint(0, 6)):
            begin = rng.randrange(n_tokens)
            length = min(rng.randint(1, 2), n_tokens - begin)
            span = (begin, length)
            if evoked and rng.random() < 0.3:
                frame = rng.choice(evoked)  # re-evocation -> REFER
                type_name = store.symbol_name(store.get_role(frame, store.isa))
            else:
                type_name = rng.choice(TYPE_POOL)
                if type_name in span_types.get(span, set()):
                    continue
                frame = store.new_frame([(store.isa, store.intern(type_name))])
                if rng.random() < 0.4:
                    store.add_slot(frame, store.intern(rng.choice(CONST_ROLE_POOL)),
                                   rng.choice([7, "tag", 2.5]))
                evoked.append(frame)
            span_types.setdefault(span, set()).add(type_name)
            for mention in mentions:
                if mention.span == span:
                    if frame not in mention.evoked:
                        mention.evoked.append(frame)
                    break
            else:
                mentions.append(Mention(begin, length, [frame]))

    # Links between evoked frames (duplicates and self-loops allowed).
    for _ in range(rng.randint(0, 4)):
        if not evoked:
            break
        source = rng.choice(evoked)
        target = rng.choice(evoked)
        store.add_slot(source, store.intern(rng.choice(ROLE_POOL)), target)

    # Non-evoked frames, one connecting role each.
    for _ in range(rng.randint(0, 2)):
        if not evoked:
            break
        other = store.new_frame([(store.isa, store.intern(rng.choice(TYPE_POOL)))])
        if rng.random() < 0.5:
            store.add_slot(other, store.intern(rng.choice(CONST_ROLE_POOL)), "extra")
        anchor = rng.choice(evoked)
        if rng.random() < 0.5:
            store.add_slot(anchor, store.intern(rng.choice(ROLE_POOL)), other)
        else:
            store.add_slot(other, store.intern(rng.choice(ROLE_POOL)), anchor)

    doc = Document(text, tokens, mentions, store)
    doc.sort_mentions()
    doc.check()
    return doc


def copy_document(doc: Document) -> Document:
    """Deep copy into a fresh store (same annotations, new handles)."""
    store = Store()
    frames = frame_graph(doc)
    clones = {frame: store.new_frame() for frame in frames}
    for frame in frames:
        for slot in doc.store.slots(frame):
            role = store.intern(doc.store.symbol_name(slot.role))
            value = slot.value
            if isinstance(value, Handle):
                value = (clones[value] if value.is_frame()
                         else store.intern(doc.store.symbol_name(value)))
            store.add_slot(clones[frame], role, value)
    mentions = [Mention(m.begin, m.length, [clones[f] for f in m.evoked])
                for m in doc.mentions]
    out = Document(doc.text, list(doc.tokens), mentions, store)
    out.sort_mentions()
    return out


def perturb_document(doc: Document, rng: random.Random) -> Document:
    """A structurally altered copy: retyped frames, dropped/added
    mentions, dropped slots, changed constants or roles."""
    out = copy_document(doc)
    store = out.store
    frames = frame_graph(out)
    for _ in range(rng.randint(1, 3)):
        op = rng.choice(["retype", "drop_mention", "add_mention",
                         "drop_slot", "change_constant", "rename_role"])
        if op == "retype" and frames:
            frame = rng.choice(frames)
            slots = store.slots(frame)
            for index, slot in enumerate(slots):
                if slot.role == store.isa:
                    store._frames[frame.index][index] = slot._replace(
                        value=store.intern(rng.choice(TYPE_POOL)))
                    break
        elif op == "drop_mention" and len(out.mentions) > 1:
            out.mentions.pop(rng.randrange(len(out.mentions)))
        elif op == "add_mention" and out.tokens:
            begin = rng.randrange(len(out.tokens))
            frame = store.new_frame([(store.isa, store.intern(rng.choice(TYPE_POOL)))])
            out.mentions.append(Mention(begin, 1, [frame]))
        elif op == "drop_slot" and frames:
            frame = rng.choice(frames)
            slots = store._frames[frame.index]
            if len(slots) > 1:
                slots.pop(rng.randrange(1, len(slots)))
        elif op == "change_constant" and frames:
            frame = rng.choice(frames)
            slots = store._frames[frame.index]
            for index, slot in enumerate(slots):
                if isinstance(slot.value, (int, str)) and slot.role != store.isa:
                    slots[index] = slot._replace(value="changed!")
                    break
        elif op == "rename_role" and frames:
            frame = rng.choice(frames)
            slots = store._frames[frame.index]
            for index, slot in enumerate(slots):
                if slot.role not in (store.isa, store.id):
                    slots[index] = slot._replace(role=store.intern("/r/renamed"))
                    break
    out.sort_mentions()
    return out
