"""Reader and printer for the frame text notation.

The notation is a superset of JSON.  Objects in braces are frames whose
slots are written ``role: value``; commas are treated as whitespace.
``=#n`` attaches a file-scoped numeric label to a frame and ``=name``
gives it a named id; ``#n`` or ``name`` elsewhere refers to the labeled
frame, forward references included.  ``:x`` is shorthand for an ``isa``
slot and ``+x`` for an ``is`` slot.  Arrays, strings (JSON escaping),
integers and floats are supported; ``nil``/``null`` denote the nil
value.  Symbols in role position always stay symbols; in value position
a name resolves to the frame it ids, if any, else to the symbol.

The reader never raises on malformed input: it returns a ParseResult
whose diagnostics carry (byte offset, message) pairs.  The printer is
deterministic and labels a frame if and only if it is referenced at
least twice (or cyclically) or carries a named id, so that its output
re-parses to an isomorphic graph.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .store import FRAME, Handle, Store, StoreError, Value

_MAX_DEPTH = 200

_SYMBOL_START = re.compile(r"[A-Za-z_/]")
_SYMBOL_CHAR = re.compile(r"[A-Za-z0-9_/.\-]")
_NUMBER = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?")
_WHITESPACE = " \t\r\n,"


class NotationError(Exception):
    """Raised by the raising wrappers around the diagnostic-based reader."""

    def __init__(self, diagnostics: list[tuple[int, str]]):
        self.diagnostics = diagnostics
        head = "; ".join(f"@{off}: {msg}" for off, msg in diagnostics[:3])
        super().__init__(head or "notation error")


@dataclass
class ParseResult:
    """Top-level frames in input order plus reader diagnostics."""

    top: list[Handle] = field(default_factory=list)
    diagnostics: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


# --------------------------------------------------------------------------
# Reader
# --------------------------------------------------------------------------

# AST nodes.  Literal values are represented by themselves (None, int,
# float, str); the node classes cover everything that needs resolution.


@dataclass
class _Sym:
    name: str
    offset: int


@dataclass
class _Ref:
    label: int
    offset: int


@dataclass
class _Array:
    items: list


@dataclass
class _FrameNode:
    offset: int
    num_labels: list[tuple[int, int]] = field(default_factory=list)  # (label, offset)
    names: list[tuple[str, int]] = field(default_factory=list)
    slots: list = field(default_factory=list)  # (role_node, value_node)
    handle: Optional[Handle] = None


_ID_MARK = "="
_ISA_MARK = ":"
_IS_MARK = "+"


class _SyntaxError(Exception):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        self.message = message


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.n = len(text)

    def error(self, message: str, offset: Optional[int] = None) -> _SyntaxError:
        return _SyntaxError(self.pos if offset is None else offset, message)

    def skip_ws(self) -> None:
        while self.pos < self.n and self.text[self.pos] in _WHITESPACE:
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.n else ""

    def parse_top(self) -> list:
        tops = []
        self.skip_ws()
        while self.pos < self.n:
            tops.append(self.parse_value(0))
            self.skip_ws()
        return tops

    def parse_value(self, depth: int):
        if depth > _MAX_DEPTH:
            raise self.error("nesting too deep")
        self.skip_ws()
        ch = self.peek()
        if ch == "":
            raise self.error("unexpected end of input")
        if ch == "{":
            return self.parse_frame(depth)
        if ch == "[":
            return self.parse_array(depth)
        if ch == '"':
            return self.parse_string()
        if ch == "#":
            return self.parse_ref()
        if ch == "-" or ch.isdigit():
            return self.parse_number()
        if _SYMBOL_START.match(ch):
            return self.parse_symbol_or_keyword()
        raise self.error(f"unexpected character {ch!r}")

    def parse_frame(self, depth: int) -> _FrameNode:
        node = _FrameNode(offset=self.pos)
        self.pos += 1  # '{'
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "":
                raise self.error("unterminated frame", node.offset)
            if ch == "}":
                self.pos += 1
                return node
            if ch == "=":
                off = self.pos
                self.pos += 1
                self.skip_ws()
                nxt = self.peek()
                if nxt == "#":
                    ref = self.parse_ref()
                    node.num_labels.append((ref.label, off))
                elif _SYMBOL_START.match(nxt or ""):
                    sym = self.parse_symbol_or_keyword()
                    if not isinstance(sym, _Sym):
                        raise self.error("expected label after '='", off)
                    node.names.append((sym.name, off))
                else:
                    raise self.error("expected label after '='", off)
            elif ch == ":":
                self.pos += 1
                node.slots.append((_ISA_MARK, self.parse_value(depth + 1)))
            elif ch == "+":
                self.pos += 1
                node.slots.append((_IS_MARK, self.parse_value(depth + 1)))
            else:
                off = self.pos
                role = self.parse_value(depth + 1)
                if isinstance(role, str):
                    role = _Sym(role, off)  # JSON-style string key
                if not isinstance(role, (_Sym, _Ref, _FrameNode)):
                    raise self.error("slot role must be a symbol or frame", off)
                self.skip_ws()
                if self.peek() != ":":
                    raise self.error("expected ':' after slot role")
                self.pos += 1
                node.slots.append((role, self.parse_value(depth + 1)))

    def parse_array(self, depth: int) -> _Array:
        start = self.pos
        self.pos += 1  # '['
        items = []
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "":
                raise self.error("unterminated array", start)
            if ch == "]":
                self.pos += 1
                return _Array(items)
            items.append(self.parse_value(depth + 1))

    def parse_string(self) -> str:
        start = self.pos
        self.pos += 1
        out = []
        while True:
            if self.pos >= self.n:
                raise self.error("unterminated string", start)
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= self.n:
                    raise self.error("unterminated string escape", start)
                esc = self.text[self.pos]
                simple = {'"': '"', "\\": "\\", "/": "/", "b": "\b",
                          "f": "\f", "n": "\n", "r": "\r", "t": "\t"}
                if esc in simple:
                    out.append(simple[esc])
                    self.pos += 1
                elif esc == "u":
                    hexpart = self.text[self.pos + 1:self.pos + 5]
                    if len(hexpart) != 4 or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
                        raise self.error("invalid \\u escape")
                    out.append(chr(int(hexpart, 16)))
                    self.pos += 5
                else:
                    raise self.error(f"invalid string escape \\{esc}")
            else:
                out.append(ch)
                self.pos += 1

    def parse_ref(self) -> _Ref:
        off = self.pos
        self.pos += 1  # '#'
        start = self.pos
        while self.pos < self.n and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected digits after '#'", off)
        return _Ref(int(self.text[start:self.pos]), off)

    def parse_number(self) -> Union[int, float]:
        m = _NUMBER.match(self.text, self.pos)
        if m is None:
            raise self.error("malformed number")
        self.pos = m.end()
        literal = m.group(0)
        if m.group(1) or m.group(2):
            return float(literal)
        return int(literal)

    def parse_symbol_or_keyword(self) -> Union[_Sym, None]:
        off = self.pos
        while self.pos < self.n and _SYMBOL_CHAR.match(self.text[self.pos]):
            self.pos += 1
        name = self.text[off:self.pos]
        if name in ("nil", "null"):
            return None
        return _Sym(name, off)


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Builder:
    """Second pass: allocates frames, binds labels, then fills slots."""

    def __init__(self, store: Store, text: str):
        self.store = store
        self.text = text
        self.labels: dict[int, Handle] = {}
        self.diagnostics: list[tuple[int, str]] = []

    def diag(self, pos: int, message: str) -> None:
        self.diagnostics.append((_byte_offset(self.text, pos), message))

    def collect(self, node) -> None:
        if isinstance(node, _FrameNode):
            node.handle = self.store.new_frame()
            for label, off in node.num_labels:
                if label in self.labels:
                    self.diag(off, f"duplicate label #{label}")
                else:
                    self.labels[label] = node.handle
            for name, off in node.names:
                sym = self.store.intern(name)
                try:
                    self.store.add_slot(node.handle, self.store.id, sym)
                except StoreError as exc:
                    self.diag(off, str(exc))
            for role, value in node.slots:
                if isinstance(role, _FrameNode):
                    self.collect(role)
                self.collect(value)
        elif isinstance(node, _Array):
            for item in node.items:
                self.collect(item)

    def fill(self, node) -> None:
        if isinstance(node, _FrameNode):
            assert node.handle is not None
            for role, value in node.slots:
                if isinstance(role, _FrameNode):
                    self.fill(role)
                role_handle = self.resolve_role(role)
                self.fill(value)
                resolved = self.resolve_value(value)
                if role_handle is not None:
                    self.store.add_slot(node.handle, role_handle, resolved)
        elif isinstance(node, _Array):
            for item in node.items:
                self.fill(item)

    def resolve_role(self, role) -> Optional[Handle]:
        if role == _ISA_MARK:
            return self.store.isa
        if role == _IS_MARK:
            return self.store.is_
        if isinstance(role, _Sym):
            return self.store.intern(role.name)
        if isinstance(role, _Ref):
            return self.resolve_ref(role)
        if isinstance(role, _FrameNode):
            return role.handle
        return None

    def resolve_ref(self, ref: _Ref) -> Optional[Handle]:
        handle = self.labels.get(ref.label)
        if handle is None:
            self.diag(ref.offset, f"unresolved reference #{ref.label}")
        return handle

    def resolve_value(self, node) -> Value:
        if isinstance(node, _FrameNode):
            return node.handle
        if isinstance(node, _Array):
            return [self.resolve_value(item) for item in node.items]
        if isinstance(node, _Ref):
            return self.resolve_ref(node)
        if isinstance(node, _Sym):
            sym = self.store.intern(node.name)
            bound = self.store.binding(sym)
            return bound if bound is not None else sym
        return node


def parse_notation(text: str, store: Store) -> ParseResult:
    """Parse notation text into `store`, returning tops and diagnostics.

    Any input yields a ParseResult; malformed input is reported through
    diagnostics rather than exceptions.  The store must not be frozen.
    """
    if store.frozen:
        raise StoreError("cannot parse into a frozen store")
    try:
        tops = _Parser(text).parse_top()
    except _SyntaxError as exc:
        return ParseResult([], [(_byte_offset(text, exc.offset), exc.message)])
    except RecursionError:
        return ParseResult([], [(0, "nesting too deep")])

    builder = _Builder(store, text)
    for node in tops:
        builder.collect(node)
    for node in tops:
        builder.fill(node)

    handles = []
    for node in tops:
        if isinstance(node, _FrameNode):
            handles.append(node.handle)
        elif isinstance(node, _Ref):
            resolved = builder.resolve_ref(node)
            if resolved is not None:
                handles.append(resolved)
        elif isinstance(node, _Sym):
            resolved = builder.resolve_value(node)
            if isinstance(resolved, Handle) and resolved.is_frame():
                handles.append(resolved)
            else:
                builder.diag(node.offset, f"top-level name {node.name!r} is not a frame")
        else:
            builder.diag(0, "top-level object must be a frame")

    if builder.diagnostics:
        return ParseResult([], builder.diagnostics)
    return ParseResult(handles, [])


def parse_or_raise(text: str, store: Store) -> list[Handle]:
    """Like parse_notation but raises NotationError on any diagnostic."""
    result = parse_notation(text, store)
    if not result.ok:
        raise NotationError(result.diagnostics)
    return result.top


# --------------------------------------------------------------------------
# Printer
# --------------------------------------------------------------------------


class _Printer:
    def __init__(self, store: Store, first_label: int = 1):
        self.store = store
        self.counts: dict[int, int] = {}
        self.names: dict[int, str] = {}
        self.numbers: dict[int, int] = {}
        self.printed: set[int] = set()
        self.next_number = first_label

    def count_refs(self, roots: list[Handle]) -> None:
        stack = list(reversed(roots))
        while stack:
            value = stack.pop()
            if isinstance(value, list):
                stack.extend(reversed(value))
                continue
            if not isinstance(value, Handle) or not value.is_frame():
                continue
            idx = value.index
            self.counts[idx] = self.counts.get(idx, 0) + 1
            if self.counts[idx] > 1:
                continue
            name = self.store.frame_id_name(value)
            if name is not None:
                self.names[idx] = name
            for slot in self.store.slots(value):
                if isinstance(slot.role, Handle) and slot.role.is_frame():
                    stack.append(slot.role)
                stack.append(slot.value)

    def needs_label(self, frame: Handle) -> bool:
        return self.counts.get(frame.index, 0) >= 2 or frame.index in self.names

    def reference(self, frame: Handle) -> str:
        name = self.names.get(frame.index)
        if name is not None:
            return name
        return f"#{self.numbers[frame.index]}"

    def emit(self, value: Value) -> str:
        if value is None:
            return "nil"
        if isinstance(value, bool):  # pragma: no cover - store rejects bools
            return "true" if value else "false"
        if isinstance(value, (int, float)):
            return repr(value)
        if isinstance(value, str):
            return json.dumps(value, ensure_ascii=False)
        if isinstance(value, list):
            return "[" + " ".join(self.emit(item) for item in value) + "]"
        if value.is_symbol():
            return self.store.symbol_name(value)
        return self.emit_frame(value)

    def emit_frame(self, frame: Handle) -> str:
        idx = frame.index
        if idx in self.printed:
            return self.reference(frame)
        self.printed.add(idx)
        pieces = []
        labeled = self.needs_label(frame)
        name = self.names.get(idx)
        if labeled and name is None:
            self.numbers[idx] = self.next_number
            self.next_number += 1
            pieces.append(f"=#{self.numbers[idx]}")
        name_emitted = False
        for slot in self.store.slots(frame):
            role = slot.role
            if role == self.store.id and not name_emitted and name is not None \
                    and isinstance(slot.value, Handle) and slot.value.is_symbol() \
                    and self.store.symbol_name(slot.value) == name:
                pieces.append(f"={name}")
                name_emitted = True
            elif role == self.store.isa:
                pieces.append(":" + self.emit(slot.value))
            elif role == self.store.is_:
                pieces.append("+" + self.emit(slot.value))
            else:
                if isinstance(role, Handle) and role.is_frame():
                    role_text = self.emit_frame(role)
                else:
                    role_text = self.store.symbol_name(role)
                pieces.append(role_text + ": " + self.emit(slot.value))
        return "{" + " ".join(pieces) + "}"


def print_notation(roots: list[Handle], store: Store, first_label: int = 1) -> str:
    """Print frames deterministically; shared frames get =#n labels."""
    text, _ = print_with_labels(roots, store, first_label)
    return text


def print_with_labels(roots: list[Handle], store: Store,
                      first_label: int = 1) -> tuple[str, int]:
    """Like print_notation, also returning the next unused =#n label
    (numeric labels are file-scoped, so multi-store corpus writers must
    thread the counter across documents)."""
    for root in roots:
        if not isinstance(root, Handle) or root.kind != FRAME:
            raise StoreError(f"root {root!r} is not a frame handle")
        store.slots(root)  # validates ownership and liveness
    printer = _Printer(store, first_label)
    printer.count_refs(list(roots))
    text = "\n".join(printer.emit_frame(root) for root in roots)
    return text, printer.next_number
