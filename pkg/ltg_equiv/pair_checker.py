"""
Equivalence decision for ordered, trivial-free transducers.

Two normalized transducers are equivalent relative to a DTA iff they are
same-ordered and the two projections of the pair grammar, which interleaves
plain output of the first with barred output of the second, agree on its
language. Agreement is checked on a bounded-derivation test set.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from . import group_core as gc
from .compressed_words import SlpHandle, SlpStore
from .errors import InvariantViolation, OversizedTestSetError, UsageError
from .group_core import GroupWord, SignedLetter
from .normalizer import order_transducer
from .tree_model import (CompatibleMap, Dta, DtaState, State, Symbol, Transducer, Tree,
                         dta_reduce, enum_trees, evaluate, min_trees)
from .utils import (DEFAULT_EXPANSION_LIMIT, DEFAULT_TEST_SET_CAP, DEFAULT_WORKERS,
                    get_expansion_limit, get_test_set_cap, get_worker_count)

logger = logging.getLogger(__name__)

StatePair = Tuple[State, State]

DEFAULT_BOUND = 2
DEFAULT_SEARCH_DEPTH = 6
DEFAULT_SEARCH_TREES = 20_000
SEARCH_CHUNK = 256


class Outcome(str, Enum):
    EQUIVALENT = "equivalent"
    INEQUIVALENT = "inequivalent"
    EMPTY_DOMAIN = "empty-domain"


@dataclass(frozen=True)
class Verdict:
    """
    Result of an equivalence check.

    An inequivalent verdict usually carries a witness tree of the domain and
    the two differing outputs. `depth_bounded` is set when "equivalent" only
    means that no witness exists below that depth.
    """
    outcome: Outcome
    witness: Optional[Tree] = None
    left: Optional[GroupWord] = None
    right: Optional[GroupWord] = None
    note: str = ""
    depth_bounded: Optional[int] = None

    @property
    def equivalent(self) -> bool:
        return self.outcome == Outcome.EQUIVALENT

    @property
    def witness_depth(self) -> Optional[int]:
        return None if self.witness is None else self.witness.depth


@dataclass
class CheckConfig:
    """Per-run knobs of the decision procedure."""
    bound: int = DEFAULT_BOUND
    search_depth: int = DEFAULT_SEARCH_DEPTH
    search_trees: int = DEFAULT_SEARCH_TREES
    test_set_cap: int = DEFAULT_TEST_SET_CAP
    expansion_limit: int = DEFAULT_EXPANSION_LIMIT
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        for name in ("bound", "search_depth", "search_trees", "test_set_cap",
                     "expansion_limit", "workers"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be at least 1, got {getattr(self, name)}")

    @classmethod
    def from_env(cls, **overrides) -> "CheckConfig":
        settings = dict(
            test_set_cap=get_test_set_cap(),
            expansion_limit=get_expansion_limit(),
            workers=get_worker_count(),
        )
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)


@dataclass(frozen=True)
class CoReachability:
    pairs: Tuple[StatePair, ...]
    same_ordered: bool
    mismatch: Optional[str] = None


def coreachable_pairs(m: Transducer, m2: Transducer, b: Dta) -> CoReachability:
    """
    State pairs reachable simultaneously on a common input path.

    Pairs are explored from the axiom pair, pairing calls that read the same
    child. The transducers are same-ordered when every explored rule pair reads
    the same children in the same order.
    """
    if m.axiom.state is None or m2.axiom.state is None:
        return CoReachability((), True)
    iota = CompatibleMap.infer(m, b)
    iota2 = CompatibleMap.infer(m2, b)
    start = (m.axiom.state, m2.axiom.state)
    pairs: List[StatePair] = [start]
    seen = {start}
    mismatch: Optional[str] = None
    index = 0
    while index < len(pairs):
        q, q2 = pairs[index]
        index += 1
        h = iota[q]
        if iota2[q2] != h:
            raise InvariantViolation(f"Pair ({q}, {q2}) reads DTA states {h} and {iota2[q2]}")
        for symbol in b.alphabet:
            if b.transition(h, symbol) is None:
                continue
            rule, rule2 = m.rule(q, symbol), m2.rule(q2, symbol)
            if rule.sigma != rule2.sigma and mismatch is None:
                mismatch = (f"rules {q}({symbol}) and {q2}({symbol}) read children "
                            f"{list(rule.sigma)} and {list(rule2.sigma)}")
            partner = {call.child: call.state for call in rule2.calls}
            for call in rule.calls:
                if call.child in partner:
                    pair = (call.state, partner[call.child])
                    if pair not in seen:
                        seen.add(pair)
                        pairs.append(pair)
    if mismatch:
        logger.info(f"Not same-ordered: {mismatch}")
    return CoReachability(tuple(pairs), mismatch is None, mismatch)


START = "S"
Nonterminal = Union[str, StatePair]


@dataclass(frozen=True)
class Terminal:
    """Output letter of the first transducer, or barred letter of the second."""
    letter: SignedLetter
    barred: bool = False

    def __str__(self) -> str:
        return ("~" if self.barred else "") + str(self.letter)


@dataclass(frozen=True)
class PairRef:
    """Nonterminal occurrence for a state pair reading input child `child` (0 = root)."""
    pair: StatePair
    child: int


Item = Union[Terminal, PairRef]


def _terminals(word: GroupWord, barred: bool) -> List[Terminal]:
    return [Terminal(letter, barred) for letter in word]


@dataclass(frozen=True)
class Production:
    lhs: Nonterminal
    items: Tuple[Item, ...]
    symbol: Optional[Symbol] = None
    child_states: Tuple[DtaState, ...] = ()

    def refs(self) -> List[PairRef]:
        return [item for item in self.items if isinstance(item, PairRef)]

    def __str__(self) -> str:
        rhs = " ".join(
            f"<{item.pair[0]},{item.pair[1]}>" if isinstance(item, PairRef) else str(item)
            for item in self.items
        )
        return f"{self.lhs} -> {rhs or '_'}"


@dataclass
class PairGrammar:
    productions: Dict[Nonterminal, List[Production]] = field(default_factory=dict)
    start: Nonterminal = START

    def add(self, production: Production) -> None:
        self.productions.setdefault(production.lhs, []).append(production)

    def __len__(self) -> int:
        return sum(len(rules) for rules in self.productions.values())


def build_pair_grammar(m: Transducer, m2: Transducer, b: Dta) -> PairGrammar:
    """
    Grammar of the interleaved outputs of two same-ordered transducers.

    Raises:
        UsageError: if the transducers are not same-ordered or only one axiom is constant.
    """
    if (m.axiom.state is None) != (m2.axiom.state is None):
        raise UsageError("A constant and a non-constant axiom have no pair grammar")
    co = coreachable_pairs(m, m2, b)
    if not co.same_ordered:
        raise UsageError(f"Transducers are not same-ordered: {co.mismatch}")

    grammar = PairGrammar()
    if m.axiom.state is None:
        left = gc.concat(m.axiom.prefix, m.axiom.suffix)
        right = gc.concat(m2.axiom.prefix, m2.axiom.suffix)
        grammar.add(Production(START, tuple(_terminals(left, False) + _terminals(right, True))))
        return grammar

    items: List[Item] = _terminals(m.axiom.prefix, False) + _terminals(m2.axiom.prefix, True)
    items.append(PairRef(co.pairs[0], 0))
    items += _terminals(m.axiom.suffix, False) + _terminals(m2.axiom.suffix, True)
    grammar.add(Production(START, tuple(items)))

    iota = CompatibleMap.infer(m, b)
    for q, q2 in co.pairs:
        h = iota[q]
        for symbol in b.alphabet:
            targets = b.transition(h, symbol)
            if targets is None:
                continue
            rule, rule2 = m.rule(q, symbol), m2.rule(q2, symbol)
            items = _terminals(rule.words[0], False) + _terminals(rule2.words[0], True)
            for k, (call, call2) in enumerate(zip(rule.calls, rule2.calls)):
                items.append(PairRef((call.state, call2.state), call.child))
                items += _terminals(rule.words[k + 1], False)
                items += _terminals(rule2.words[k + 1], True)
            grammar.add(Production((q, q2), tuple(items), symbol, targets))
    logger.info(f"Pair grammar: {len(co.pairs)} pair(s), {len(grammar)} production(s)")
    return grammar


@dataclass(frozen=True)
class Derivation:
    """A derivation tree with the SLP images of its word under both projections."""
    production: Production
    children: Tuple["Derivation", ...]
    left: SlpHandle
    right: SlpHandle
    size: int = 1

    def word(self) -> Tuple[Terminal, ...]:
        result: List[Terminal] = []
        nested = iter(self.children)
        for item in self.production.items:
            if isinstance(item, PairRef):
                result.extend(next(nested).word())
            else:
                result.append(item)
        return tuple(result)

    def to_tree(self, fillers: Dict[DtaState, Tree], default: Tree) -> Tree:
        """The input tree this derivation reads; unread children get minimal trees."""
        if self.production.symbol is None:
            return self.children[0].to_tree(fillers, default) if self.children else default
        subtrees = [fillers[h] for h in self.production.child_states]
        for ref, child in zip(self.production.refs(), self.children):
            subtrees[ref.child - 1] = child.to_tree(fillers, default)
        return Tree(self.production.symbol, tuple(subtrees))


def format_word(word: Sequence[Terminal]) -> str:
    return " ".join(str(t) for t in word) if word else "_"


class _TestSetBuilder:
    """
    Bounded derivations that leave a fixed reference along a single path.

    For a production A -> x0 B1 x1 ... Bk xk with fixed outer context, the two
    projections agree on every combination of child derivations iff they agree
    on the combinations that differ from one reference tuple in at most one
    child: the first child's contribution can be moved to one side of the
    equation and the rest follows by induction. Agreement on these spine
    derivations is therefore agreement on the whole bounded test set.

    Derivations of a nonterminal are deduplicated by their reduced image pair
    and listed smallest first; the first one is the reference.
    """

    def __init__(self, grammar: PairGrammar, bound: int, cap: int, store: SlpStore):
        self.grammar = grammar
        self.bound = bound
        self.cap = cap
        self.store = store
        self.built = 0
        self._memo: Dict[Tuple[Nonterminal, Tuple], List[Derivation]] = {}

    def _segment(self, items: Sequence[Item]) -> Tuple[SlpHandle, SlpHandle]:
        plain = gc.reduce(t.letter for t in items if not t.barred)
        barred = gc.reduce(t.letter for t in items if t.barred)
        return self.store.make(plain), self.store.make(barred)

    def derivations(self, nt: Nonterminal, path: Dict[Nonterminal, int]) -> List[Derivation]:
        key = (nt, tuple(sorted((str(k), v) for k, v in path.items())))
        if key in self._memo:
            return self._memo[key]
        inner_path = dict(path)
        inner_path[nt] = inner_path.get(nt, 0) + 1
        results: List[Derivation] = []
        seen = set()
        for production in self.grammar.productions.get(nt, []):
            for derivation in self._expand(production, inner_path):
                image = (self.store.expand(derivation.left), self.store.expand(derivation.right))
                if image not in seen:
                    seen.add(image)
                    results.append(derivation)
        results.sort(key=lambda d: d.size)
        self._memo[key] = results
        return results

    def _expand(self, production: Production, path: Dict[Nonterminal, int]) -> Iterator[Derivation]:
        segments: List[List[Item]] = [[]]
        refs: List[PairRef] = []
        for item in production.items:
            if isinstance(item, PairRef):
                refs.append(item)
                segments.append([])
            else:
                segments[-1].append(item)
        if any(path.get(ref.pair, 0) >= self.bound for ref in refs):
            return
        pools = [self.derivations(ref.pair, path) for ref in refs]
        if any(not pool for pool in pools):
            return
        words = [self._segment(segment) for segment in segments]
        reference = tuple(pool[0] for pool in pools)
        yield self._build(production, reference, words)
        for position, pool in enumerate(pools):
            for varied in pool[1:]:
                combo = reference[:position] + (varied,) + reference[position + 1:]
                yield self._build(production, combo, words)

    def _build(self, production: Production, combo: Tuple[Derivation, ...],
               words: List[Tuple[SlpHandle, SlpHandle]]) -> Derivation:
        self.built += 1
        if self.built > self.cap:
            raise OversizedTestSetError(self.built, self.cap)
        lefts, rights = [words[0][0]], [words[0][1]]
        for child, (plain, barred) in zip(combo, words[1:]):
            lefts += [child.left, plain]
            rights += [child.right, barred]
        return Derivation(production, combo,
                          self.store.concat_all(lefts), self.store.concat_all(rights),
                          1 + sum(child.size for child in combo))


@dataclass(frozen=True)
class Agreement:
    agree: bool
    checked: int
    witness: Optional[Derivation] = None
    left: Optional[GroupWord] = None
    right: Optional[GroupWord] = None


def morphisms_agree(grammar: PairGrammar, bound: int = DEFAULT_BOUND,
                    cap: Optional[int] = None, workers: int = 1,
                    store: Optional[SlpStore] = None) -> Agreement:
    """
    Check f(w) = g(w) on the bounded-derivation test set of the grammar.

    f keeps plain letters and erases barred ones; g does the opposite and
    removes the bars.

    Args:
        grammar: the pair grammar
        bound: maximum occurrences of a nonterminal on any root-to-leaf path
        cap: maximum number of derivations built
        workers: threads used for the independent checks

    Returns:
        The agreement, with the first failing derivation in enumeration order.

    Raises:
        OversizedTestSetError: if the test set grows beyond the cap.
    """
    if bound < 1:
        raise UsageError(f"bound must be at least 1, got {bound}")
    cap = get_test_set_cap() if cap is None else cap
    store = store if store is not None else SlpStore(get_expansion_limit())
    builder = _TestSetBuilder(grammar, bound, cap, store)
    test_set = builder.derivations(grammar.start, {})
    logger.info(f"Test set: {len(test_set)} word(s) from {builder.built} derivation(s)")

    def check(derivation: Derivation) -> bool:
        return store.equal(derivation.left, derivation.right)

    if workers > 1 and len(test_set) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(check, test_set))
    else:
        results = [check(d) for d in test_set]

    for derivation, ok in zip(test_set, results):
        if not ok:
            left, right = store.expand(derivation.left), store.expand(derivation.right)
            logger.info(f"Projections differ on {format_word(derivation.word())}: "
                        f"{left} vs {right}")
            return Agreement(False, len(test_set), derivation, left, right)
    return Agreement(True, len(test_set))


def search_witness(m: Transducer, m2: Transducer, b: Dta, max_depth: int,
                   workers: int = 1,
                   max_trees: Optional[int] = None) -> Optional[Tuple[Tree, GroupWord, GroupWord]]:
    """
    First tree of L(b) with depth < max_depth, in enumeration order, on which
    the translations differ.

    Trees are streamed by increasing depth and the search stops at the first
    difference, or after `max_trees` trees when a budget is given.
    """
    trees = itertools.islice(enum_trees(b, b.start, max_depth), max_trees)

    def compare(t: Tree) -> Optional[Tuple[GroupWord, GroupWord]]:
        left, right = evaluate(m, t), evaluate(m2, t)
        return None if left == right else (left, right)

    def found(t: Tree, outcome: Tuple[GroupWord, GroupWord]) -> Tuple[Tree, GroupWord, GroupWord]:
        logger.debug(f"Witness {t}: {outcome[0]} vs {outcome[1]}")
        return t, outcome[0], outcome[1]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            while True:
                chunk = list(itertools.islice(trees, SEARCH_CHUNK))
                if not chunk:
                    return None
                for t, outcome in zip(chunk, executor.map(compare, chunk)):
                    if outcome is not None:
                        return found(t, outcome)
    for t in trees:
        outcome = compare(t)
        if outcome is not None:
            return found(t, outcome)
    return None


def _inequivalent_by_search(m: Transducer, m2: Transducer, b: Dta, config: CheckConfig,
                            reason: str) -> Verdict:
    found = search_witness(m, m2, b, config.search_depth, config.workers, config.search_trees)
    if found is None:
        note = (f"{reason}; witness search exceeded depth {config.search_depth} "
                f"or {config.search_trees} tree(s)")
        logger.warning(note)
        return Verdict(Outcome.INEQUIVALENT, note=note)
    tree, left, right = found
    return Verdict(Outcome.INEQUIVALENT, tree, left, right, note=reason)


def decide_equiv(m: Transducer, m2: Transducer, b: Dta,
                 config: Optional[CheckConfig] = None) -> Verdict:
    """
    Decide whether m and m2 agree on every tree accepted by b.

    Args:
        m: first transducer
        m2: second transducer, over the same alphabets
        b: domain automaton
        config: bound, search depth and resource limits

    Returns:
        The verdict; inequivalent verdicts carry a witness whenever one is found.
    """
    config = config or CheckConfig.from_env()
    if m.input_alphabet != m2.input_alphabet:
        raise UsageError("Transducers have different input alphabets")
    reduced = dta_reduce(b)
    if reduced is None:
        return Verdict(Outcome.EMPTY_DOMAIN, note="the domain automaton accepts no tree")

    first = order_transducer(m, reduced)
    second = order_transducer(m2, reduced)
    assert first is not None and second is not None
    t1, t2 = first.transducer, second.transducer

    if t1.axiom.state is None and t2.axiom.state is None:
        left = gc.concat(t1.axiom.prefix, t1.axiom.suffix)
        right = gc.concat(t2.axiom.prefix, t2.axiom.suffix)
        if left == right:
            return Verdict(Outcome.EQUIVALENT, note="both translations are constant")
        witness = min_trees(reduced)[reduced.start]
        return Verdict(Outcome.INEQUIVALENT, witness, left, right,
                       note="different constant translations")

    if (t1.axiom.state is None) != (t2.axiom.state is None):
        return _inequivalent_by_search(
            m, m2, reduced, config, "a constant translation cannot match a non-trivial one"
        )

    co = coreachable_pairs(t1, t2, reduced)
    if not co.same_ordered:
        return _inequivalent_by_search(m, m2, reduced, config,
                                       f"ordered forms are not same-ordered ({co.mismatch})")

    grammar = build_pair_grammar(t1, t2, reduced)
    store = SlpStore(config.expansion_limit)
    agreement = morphisms_agree(grammar, config.bound, config.test_set_cap, config.workers, store)
    if agreement.agree:
        return Verdict(Outcome.EQUIVALENT,
                       note=f"projections agree on {agreement.checked} test word(s)")

    fillers = min_trees(reduced)
    tree = agreement.witness.to_tree(fillers, fillers[reduced.start])
    left, right = evaluate(m, tree), evaluate(m2, tree)
    if left == right:
        raise InvariantViolation(f"Grammar witness {tree} does not separate the transducers")
    return Verdict(Outcome.INEQUIVALENT, tree, left, right,
                   note=f"witness word {format_word(agreement.witness.word())}")
