import random
import threading

import pytest

from ltg_equiv import group_core as gc
from ltg_equiv.compressed_words import (SlpStore, slp_concat, slp_equal, slp_expand, slp_invert,
                                        slp_make)
from ltg_equiv.errors import ExpansionLimitError, UsageError
from ltg_equiv.group_core import EPSILON, parse_word as w


def test_concat_and_invert_denote_group_operations():
    store = SlpStore(limit=1000)
    x = store.make(w("ab"))
    y = store.make(w("b-a"))
    assert store.expand(store.concat(x, y)) == w("aa")
    assert store.expand(store.invert(x)) == w("b-a-")
    assert store.expand(store.concat(x, store.invert(x))) == EPSILON


def test_length_is_unreduced():
    store = SlpStore(limit=1000)
    x = store.make(w("ab"))
    both = store.concat(x, store.invert(x))
    assert store.length(both) == 4
    assert store.expand(both) == EPSILON


def test_doubling_chain_stays_small():
    store = SlpStore(limit=2 ** 12)
    h = store.make(w("ab"))
    for _ in range(10):
        h = store.concat(h, h)
    assert len(store) == 11
    assert store.length(h) == 2 ** 11
    assert store.expand(h) == gc.power(w("ab"), 2 ** 10)


def test_expansion_limit():
    store = SlpStore(limit=16)
    h = store.make(w("a"))
    for _ in range(5):
        h = store.concat(h, h)
    with pytest.raises(ExpansionLimitError) as info:
        store.expand(h)
    assert info.value.limit == 16
    assert store.expand(h, limit=64) == gc.power(w("a"), 32)


def test_deep_chain_expands_iteratively():
    store = SlpStore(limit=10_000)
    h = store.make(EPSILON)
    a = store.make(w("a"))
    for _ in range(2000):
        h = store.concat(h, a)
    assert store.expand(h) == gc.power(w("a"), 2000)


def test_equal_and_parity_shortcut():
    store = SlpStore(limit=1000)
    x = store.make(w("abb-"))
    assert store.equal(x, store.make(w("a")))
    assert not store.equal(store.make(w("ab")), store.make(w("a")))
    assert not store.equal(store.make(w("ab")), store.make(w("ba")))


def test_handles_of_another_store_are_rejected():
    first, second = SlpStore(limit=10), SlpStore(limit=10)
    h = first.make(w("a"))
    with pytest.raises(UsageError):
        second.expand(h)


def test_reduced_root_and_coset():
    store = SlpStore(limit=1000)
    h = store.concat(store.make(w("ab")), store.make(w("ab")))
    assert store.expand(store.reduced(h)) == w("abab")
    assert store.expand(store.primitive_root(h)) == w("ab")
    coset = store.coset(store.make(w("ababa")), store.make(w("ba")))
    assert coset == gc.canonical_coset(w("a"), w("ba"))


def test_module_functions_delegate_to_store():
    store = SlpStore(limit=100)
    x = slp_make(store, w("ab"))
    y = slp_concat(store, x, slp_invert(store, x))
    assert slp_expand(store, y) == EPSILON
    assert slp_equal(store, y, slp_make(store, EPSILON))


def test_random_programs_match_direct_evaluation():
    rng = random.Random(2)
    store = SlpStore(limit=10_000)
    handles = [store.make(w(t)) for t in ("a", "b", "a-", "ab-")]
    values = [w(t) for t in ("a", "b", "a-", "ab-")]
    for _ in range(300):
        if rng.random() < 0.3:
            i = rng.randrange(len(handles))
            handles.append(store.invert(handles[i]))
            values.append(gc.invert(values[i]))
        else:
            i, j = rng.randrange(len(handles)), rng.randrange(len(handles))
            handles.append(store.concat(handles[i], handles[j]))
            values.append(gc.concat(values[i], values[j]))
        if len(values[-1]) > 200:
            handles.pop()
            values.pop()
    for handle, value in zip(handles, values):
        assert store.expand(handle) == value


def test_concurrent_expansion_agrees():
    store = SlpStore(limit=10_000)
    h = store.make(w("ab"))
    for _ in range(8):
        h = store.concat(h, store.make(w("b-")))
        h = store.concat(h, store.make(w("ba")))
    results = []

    def worker():
        results.append(store.expand(h))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(set(results)) == 1


def test_concat_all_of_nothing_is_identity():
    store = SlpStore(limit=10)
    assert store.expand(store.concat_all([])) == EPSILON


def _random_literal(rng):
    return gc.reduce(gc.SignedLetter(rng.choice("ab"), rng.random() < 0.5)
                     for _ in range(rng.randint(0, 4)))


def test_random_dags_match_explicit_words():
    rng = random.Random(23)
    for _ in range(10_000):
        store = SlpStore(limit=1 << 16)
        nodes = []
        for _ in range(rng.randint(1, 3)):
            literal = _random_literal(rng)
            nodes.append((slp_make(store, literal), literal, 0))
        for _ in range(rng.randint(0, 8)):
            if rng.random() < 0.3:
                handle, value, depth = rng.choice(nodes)
                nodes.append((slp_invert(store, handle), gc.invert(value), depth + 1))
            else:
                (h1, v1, d1), (h2, v2, d2) = rng.choice(nodes), rng.choice(nodes)
                nodes.append((slp_concat(store, h1, h2), gc.concat(v1, v2), max(d1, d2) + 1))
            if nodes[-1][2] > 10:
                nodes.pop()
        for handle, value, _ in nodes:
            assert slp_expand(store, handle) == value
        (h1, v1, _), (h2, v2, _) = rng.choice(nodes), rng.choice(nodes)
        assert slp_equal(store, h1, h2) == (v1 == v2)
        assert slp_equal(store, slp_concat(store, h1, slp_invert(store, h1)), slp_make(store, EPSILON))
