"""
Straight-line programs over the free group.

An `SlpStore` is an append-only DAG whose nodes are literals, concatenations
and inversions. Handles are small value types; each expanded (reduced) form
is computed once and memoized.
"""
import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Union

from . import group_core as gc
from .errors import ExpansionLimitError, UsageError
from .group_core import Coset, GroupWord
from .utils import get_expansion_limit

logger = logging.getLogger(__name__)

_store_ids = itertools.count(1)


class SlpHandle(NamedTuple):
    """Reference to one node of one store."""
    store_id: int
    node: int


@dataclass(frozen=True)
class Literal:
    word: GroupWord


@dataclass(frozen=True)
class Concat:
    left: int
    right: int


@dataclass(frozen=True)
class Inverse:
    child: int


SlpNode = Union[Literal, Concat, Inverse]


class SlpStore:
    """
    Append-only store of SLP nodes.

    Node creation is constant time. Unreduced lengths are cached at creation;
    reduced expansions are memoized under a lock so concurrent expansions
    agree and never corrupt the cache.
    """

    def __init__(self, limit: Optional[int] = None):
        self.store_id = next(_store_ids)
        self.limit = limit if limit is not None else get_expansion_limit()
        self._nodes: List[SlpNode] = []
        self._lengths: List[int] = []
        self._expanded: Dict[int, GroupWord] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._nodes)

    def _check(self, handle: SlpHandle) -> int:
        if handle.store_id != self.store_id:
            raise UsageError(
                f"Handle from store {handle.store_id} used with store {self.store_id}"
            )
        if not 0 <= handle.node < len(self._nodes):
            raise UsageError(f"Unknown node {handle.node} in store {self.store_id}")
        return handle.node

    def _append(self, node: SlpNode, length: int) -> SlpHandle:
        with self._lock:
            self._nodes.append(node)
            self._lengths.append(length)
            return SlpHandle(self.store_id, len(self._nodes) - 1)

    def make(self, word: GroupWord) -> SlpHandle:
        return self._append(Literal(word), len(word))

    def concat(self, h1: SlpHandle, h2: SlpHandle) -> SlpHandle:
        left, right = self._check(h1), self._check(h2)
        return self._append(Concat(left, right), self._lengths[left] + self._lengths[right])

    def concat_all(self, handles: List[SlpHandle]) -> SlpHandle:
        """Balanced concatenation of a non-empty handle list."""
        if not handles:
            return self.make(gc.EPSILON)
        layer = list(handles)
        while len(layer) > 1:
            paired = [self.concat(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                paired.append(layer[-1])
            layer = paired
        return layer[0]

    def invert(self, h: SlpHandle) -> SlpHandle:
        child = self._check(h)
        return self._append(Inverse(child), self._lengths[child])

    def length(self, h: SlpHandle) -> int:
        """Length of the denoted word before reduction."""
        return self._lengths[self._check(h)]

    def expand(self, h: SlpHandle, limit: Optional[int] = None) -> GroupWord:
        """
        Reduced denotation of a handle.

        Args:
            h: handle of this store
            limit: maximum letters of any intermediate reduced form

        Returns:
            The reduced word.

        Raises:
            ExpansionLimitError: if some node expands past the limit.
        """
        limit = self.limit if limit is None else limit
        if limit < 1:
            raise UsageError(f"Expansion limit must be positive, got {limit}")
        root = self._check(h)

        with self._lock:
            cached = self._expanded.get(root)
            if cached is not None:
                if len(cached) > limit:
                    raise ExpansionLimitError(root, len(cached), limit)
                return cached

            # iterative post-order: deep chains must not hit the recursion limit
            stack = [(root, False)]
            while stack:
                node_id, children_done = stack.pop()
                if node_id in self._expanded:
                    continue
                node = self._nodes[node_id]
                if isinstance(node, Literal):
                    word = node.word
                elif not children_done:
                    stack.append((node_id, True))
                    if isinstance(node, Concat):
                        stack.append((node.right, False))
                        stack.append((node.left, False))
                    else:
                        stack.append((node.child, False))
                    continue
                elif isinstance(node, Concat):
                    word = gc.concat(self._expanded[node.left], self._expanded[node.right])
                else:
                    word = gc.invert(self._expanded[node.child])
                if len(word) > limit:
                    raise ExpansionLimitError(node_id, len(word), limit)
                self._expanded[node_id] = word

            return self._expanded[root]

    def equal(self, h1: SlpHandle, h2: SlpHandle) -> bool:
        """True iff both handles denote the same group element."""
        if (self.length(h1) - self.length(h2)) % 2:
            # cancellation removes letters in pairs
            return False
        return self.expand(h1) == self.expand(h2)

    def reduced(self, h: SlpHandle) -> SlpHandle:
        """A literal handle for the reduced form of h."""
        return self.make(self.expand(h))

    def primitive_root(self, h: SlpHandle) -> SlpHandle:
        return self.make(gc.primitive_root(self.expand(h)))

    def coset(self, h1: SlpHandle, h2: SlpHandle) -> Coset:
        """Canonical coset den(h1)·⟨den(h2)⟩."""
        return gc.canonical_coset(self.expand(h1), self.expand(h2))


def slp_make(store: SlpStore, word: GroupWord) -> SlpHandle:
    return store.make(word)


def slp_concat(store: SlpStore, h1: SlpHandle, h2: SlpHandle) -> SlpHandle:
    return store.concat(h1, h2)


def slp_invert(store: SlpStore, h: SlpHandle) -> SlpHandle:
    return store.invert(h)


def slp_expand(store: SlpStore, h: SlpHandle, limit: Optional[int] = None) -> GroupWord:
    return store.expand(h, limit)


def slp_equal(store: SlpStore, h1: SlpHandle, h2: SlpHandle) -> bool:
    return store.equal(h1, h2)
