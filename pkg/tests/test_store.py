import pytest
from hypothesis import given
from hypothesis import strategies as st

from framekit.store import (DanglingHandleError, DuplicateIdError,
                            ForeignHandleError, FrozenStoreError, Handle,
                            Store)


def test_intern_idempotent():
    store = Store()
    a = store.intern("/pb/arg0")
    b = store.intern("/pb/arg0")
    assert a == b


def test_intern_distinct_names():
    store = Store()
    assert store.intern("/saft/person") != store.intern("/saft/location")


def test_intern_frozen_store_rejected():
    store = Store()
    store.freeze()
    with pytest.raises(FrozenStoreError):
        store.intern("/x")


def test_intern_empty_name_rejected():
    store = Store()
    with pytest.raises(ValueError):
        store.intern("")


def test_builtins_preinterned():
    store = Store()
    assert store.symbol_name(store.id) == "id"
    assert store.symbol_name(store.isa) == "isa"
    assert store.symbol_name(store.is_) == "is"
    # fixed well-known handles in every store
    other = Store()
    assert store.isa.index == other.isa.index


def test_new_frame_with_type():
    store = Store()
    person = store.intern("/saft/person")
    frame = store.new_frame([(store.isa, person)])
    assert store.get_role(frame, store.isa) == person


def test_new_frame_empty():
    store = Store()
    frame = store.new_frame()
    assert store.slot_count(frame) == 0


def test_cyclic_frames_permitted():
    store = Store()
    role = store.intern("/r/next")
    a = store.new_frame()
    b = store.new_frame()
    store.add_slot(a, role, b)
    store.add_slot(b, role, a)
    assert store.get_role(a, role) == b
    assert store.get_role(b, role) == a


def test_new_frame_foreign_handle_rejected():
    store = Store()
    other = Store()
    sym = other.intern("/x")
    with pytest.raises(ForeignHandleError):
        store.new_frame([(store.isa, sym)])


def test_duplicate_id_rejected():
    store = Store()
    name = store.intern("shared")
    store.new_frame([(store.id, name)])
    with pytest.raises(DuplicateIdError):
        store.new_frame([(store.id, name)])


def test_named_frame_resolves():
    store = Store()
    name = store.intern("thing")
    frame = store.new_frame([(store.id, name)])
    assert store.resolve("thing") == frame
    assert store.frame_id_name(frame) == "thing"


def test_add_slot_appends_in_order():
    store = Store()
    frame = store.new_frame()
    arg0 = store.intern("/pb/arg0")
    arg1 = store.intern("/pb/arg1")
    store.add_slot(frame, arg0, 1)
    store.add_slot(frame, arg1, 2)
    assert [s.role for s in store.slots(frame)] == [arg0, arg1]


def test_duplicate_slots_permitted():
    store = Store()
    frame = store.new_frame()
    role = store.intern("/r/x")
    store.add_slot(frame, role, 1)
    store.add_slot(frame, role, 1)
    assert store.slot_count(frame) == 2


def test_add_slot_frozen_rejected():
    store = Store()
    frame = store.new_frame()
    store.freeze()
    with pytest.raises(FrozenStoreError):
        store.add_slot(frame, store.isa, 1)


def test_get_role_first_match():
    store = Store()
    frame = store.new_frame()
    role = store.intern("/r/x")
    store.add_slot(frame, role, "first")
    store.add_slot(frame, role, "second")
    assert store.get_role(frame, role) == "first"


def test_get_role_absent_is_nil():
    store = Store()
    frame = store.new_frame()
    assert store.get_role(frame, store.isa) is None


def test_dangling_handle_rejected():
    store = Store()
    bogus = Handle("frame", 99, store.uid)
    with pytest.raises(DanglingHandleError):
        store.slots(bogus)


def test_bool_values_rejected():
    store = Store()
    frame = store.new_frame()
    with pytest.raises(TypeError):
        store.add_slot(frame, store.isa, True)


@given(st.lists(st.text(min_size=1, max_size=8), min_size=1, max_size=30))
def test_intern_bijection(names):
    store = Store()
    handles = {}
    for name in names:
        handle = store.intern(name)
        if name in handles:
            assert handles[name] == handle
        handles[name] = handle
        assert store.symbol_name(handle) == name
    assert len(set(handles.values())) == len(handles)


@given(st.lists(st.integers(0, 4), max_size=40), st.integers(0, 5))
def test_handles_never_invalidate(ops, seed):
    store = Store()
    frames = [store.new_frame()]
    issued = list(frames)
    role = store.intern("/r/x")
    for op in ops:
        if op == 0:
            frames.append(store.new_frame())
            issued.append(frames[-1])
        else:
            target = frames[(op + seed) % len(frames)]
            store.add_slot(frames[-1], role, target)
    for handle in issued:
        store.slots(handle)  # still resolves


def test_slot_count_matches_adds():
    store = Store()
    frame = store.new_frame([(store.isa, store.intern("/t/x"))])
    role = store.intern("/r/x")
    for index in range(5):
        store.add_slot(frame, role, index)
    assert store.slot_count(frame) == 6


def test_reachability_stays_in_store():
    store = Store()
    frames = [store.new_frame() for _ in range(5)]
    role = store.intern("/r/x")
    for a, b in zip(frames, frames[1:]):
        store.add_slot(a, role, b)
    seen = set()
    stack = [frames[0]]
    while stack:
        frame = stack.pop()
        if frame in seen:
            continue
        seen.add(frame)
        for slot in store.slots(frame):
            assert slot.role.store_uid == store.uid
            if isinstance(slot.value, Handle) and slot.value.is_frame():
                assert slot.value.store_uid == store.uid
                stack.append(slot.value)
