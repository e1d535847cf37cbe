"""Arena-style container for frames and interned symbols.

A store owns every frame allocated in it and a bidirectional symbol
table.  Frames are ordered lists of (role, value) slots; slot values may
be literals, arrays, or handles to other frames, so a store can hold
arbitrary graphs, including cycles.  Handles stay valid for the lifetime
of the store.  A frozen store rejects all mutation and may be shared
read-only between threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Union

FRAME = "frame"
SYMBOL = "symbol"
NIL = "nil"

# Built-in roles, pre-interned in every store at these symbol indices.
ID_INDEX = 0
ISA_INDEX = 1
IS_INDEX = 2


class StoreError(Exception):
    """Base class for frame store contract violations."""


class FrozenStoreError(StoreError):
    """Mutation was attempted on a frozen store."""


class ForeignHandleError(StoreError):
    """A handle issued by a different store was passed in."""


class DanglingHandleError(StoreError):
    """A handle does not resolve to a live object in this store."""


class DuplicateIdError(StoreError):
    """A symbol is already bound as the id of a different frame."""


@dataclass(frozen=True)
class Handle:
    """Store-scoped reference to one frame or interned symbol."""

    kind: str
    index: int
    store_uid: int

    def is_nil(self) -> bool:
        return self.kind == NIL

    def is_frame(self) -> bool:
        return self.kind == FRAME

    def is_symbol(self) -> bool:
        return self.kind == SYMBOL

    def __repr__(self) -> str:
        if self.kind == NIL:
            return "Handle(nil)"
        return f"Handle({self.kind} {self.index}@{self.store_uid})"


NIL_HANDLE = Handle(NIL, 0, 0)

# A slot value: nil, a literal, an array of values, or a handle.
Value = Union[None, int, float, str, list, Handle]


class Slot(NamedTuple):
    role: Handle
    value: Value


class Store:
    """Allocation arena for frames plus an interned symbol table.

    Frames live until the store is dropped; there is no per-frame
    garbage collection.  Symbol names are unique and interning is
    idempotent.  The roles ``id``, ``isa`` and ``is`` are pre-interned
    at fixed well-known handles.
    """

    _uids = itertools.count(1)

    def __init__(self) -> None:
        self._uid = next(Store._uids)
        self._frames: list[list[Slot]] = []
        self._symbol_names: list[str] = []
        self._symbols: dict[str, Handle] = {}
        self._bindings: dict[int, Handle] = {}  # symbol index -> named frame
        self._frozen = False
        self.id = self.intern("id")
        self.isa = self.intern("isa")
        self.is_ = self.intern("is")

    # -- basic queries ---------------------------------------------------

    @property
    def uid(self) -> int:
        return self._uid

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    def num_frames(self) -> int:
        return len(self._frames)

    def frames(self) -> Iterable[Handle]:
        """All frame handles in allocation order."""
        for i in range(len(self._frames)):
            yield Handle(FRAME, i, self._uid)

    def owns(self, handle: Handle) -> bool:
        if handle.kind == NIL:
            return True
        if handle.store_uid != self._uid:
            return False
        if handle.kind == FRAME:
            return 0 <= handle.index < len(self._frames)
        return 0 <= handle.index < len(self._symbol_names)

    # -- symbols ---------------------------------------------------------

    def intern(self, name: str) -> Handle:
        """Return the symbol handle for `name`, creating it if needed."""
        if name in self._symbols:
            return self._symbols[name]
        self._check_mutable()
        if not name:
            raise ValueError("symbol name must be non-empty")
        handle = Handle(SYMBOL, len(self._symbol_names), self._uid)
        self._symbol_names.append(name)
        self._symbols[name] = handle
        return handle

    def symbol_name(self, handle: Handle) -> str:
        self._check_handle(handle, SYMBOL)
        return self._symbol_names[handle.index]

    def lookup(self, name: str) -> Optional[Handle]:
        """Symbol handle for `name` if it was ever interned, else None."""
        return self._symbols.get(name)

    def binding(self, symbol: Handle) -> Optional[Handle]:
        """Frame bound to `symbol` as its id, else None."""
        self._check_handle(symbol, SYMBOL)
        return self._bindings.get(symbol.index)

    def resolve(self, name: str) -> Optional[Handle]:
        """Frame named `name` if one exists, else the symbol, else None."""
        sym = self._symbols.get(name)
        if sym is None:
            return None
        return self._bindings.get(sym.index, sym)

    # -- frames ----------------------------------------------------------

    def new_frame(self, slots: Iterable[tuple[Handle, Value]] = ()) -> Handle:
        """Allocate a frame with the given (role, value) slots.

        An ``id`` slot with a symbol value registers this frame under
        that name; re-binding a name already attached to another frame
        is a DuplicateIdError.
        """
        self._check_mutable()
        pending = [Slot(role, value) for role, value in slots]
        for slot in pending:
            self._check_handle(slot.role)
            if slot.role.is_nil():
                raise ValueError("slot role must not be nil")
            self._check_value(slot.value)
        handle = Handle(FRAME, len(self._frames), self._uid)
        self._frames.append(pending)
        for slot in pending:
            if slot.role.index == ID_INDEX and slot.role.kind == SYMBOL:
                if isinstance(slot.value, Handle) and slot.value.is_symbol():
                    self._bind(slot.value, handle)
        return handle

    def add_slot(self, frame: Handle, role: Handle, value: Value) -> None:
        """Append one slot to a frame; duplicates are permitted."""
        self._check_mutable()
        self._check_handle(frame, FRAME)
        self._check_handle(role)
        if role.is_nil():
            raise ValueError("slot role must not be nil")
        self._check_value(value)
        if role.index == ID_INDEX and role.kind == SYMBOL:
            if isinstance(value, Handle) and value.is_symbol():
                self._bind(value, frame)
        self._frames[frame.index].append(Slot(role, value))

    def slots(self, frame: Handle) -> list[Slot]:
        self._check_handle(frame, FRAME)
        return list(self._frames[frame.index])

    def slot_count(self, frame: Handle) -> int:
        self._check_handle(frame, FRAME)
        return len(self._frames[frame.index])

    def get_role(self, frame: Handle, role: Handle) -> Value:
        """Value of the first slot with this role, or None if absent."""
        self._check_handle(frame, FRAME)
        self._check_handle(role)
        for slot in self._frames[frame.index]:
            if slot.role == role:
                return slot.value
        return None

    def frame_type(self, frame: Handle) -> Optional[Handle]:
        """First ``isa`` value of the frame, if it is a handle."""
        value = self.get_role(frame, self.isa)
        return value if isinstance(value, Handle) else None

    def frame_id_name(self, frame: Handle) -> Optional[str]:
        """Name bound to this frame through its first ``id`` slot."""
        value = self.get_role(frame, self.id)
        if isinstance(value, Handle) and value.is_symbol():
            if self._bindings.get(value.index) == frame:
                return self._symbol_names[value.index]
        return None

    # -- internals -------------------------------------------------------

    def _bind(self, symbol: Handle, frame: Handle) -> None:
        existing = self._bindings.get(symbol.index)
        if existing is not None and existing != frame:
            name = self._symbol_names[symbol.index]
            raise DuplicateIdError(f"symbol {name!r} already names another frame")
        self._bindings[symbol.index] = frame

    def _check_mutable(self) -> None:
        if self._frozen:
            raise FrozenStoreError("store is frozen")

    def _check_handle(self, handle: Handle, kind: Optional[str] = None) -> None:
        if not isinstance(handle, Handle):
            raise TypeError(f"expected Handle, got {type(handle).__name__}")
        if handle.is_nil():
            if kind is not None:
                raise DanglingHandleError("nil handle where an object is required")
            return
        if handle.store_uid != self._uid:
            raise ForeignHandleError("handle belongs to a different store")
        limit = len(self._frames) if handle.kind == FRAME else len(self._symbol_names)
        if not 0 <= handle.index < limit:
            raise DanglingHandleError(f"handle {handle!r} does not resolve")
        if kind is not None and handle.kind != kind:
            raise DanglingHandleError(f"expected a {kind} handle, got {handle!r}")

    def _check_value(self, value: Value) -> None:
        if isinstance(value, bool):
            raise TypeError("boolean slot values are not supported")
        if value is None or isinstance(value, (int, float, str)):
            return
        if isinstance(value, Handle):
            self._check_handle(value)
            return
        if isinstance(value, list):
            for item in value:
                self._check_value(item)
            return
        raise TypeError(f"unsupported slot value type: {type(value).__name__}")
