"""
Ranked trees, top-down deterministic domain automata (DTAs) and linear tree
transducers with output in the free group, together with their semantics.
"""
import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from . import group_core as gc
from .errors import (EvaluationDepthError, InvalidInputError, OffDomainError,
                     ParseError, UsageError)
from .group_core import Alphabet, GroupWord

logger = logging.getLogger(__name__)

# Type aliases for clarity
State = str
DtaState = str
Symbol = str

DEFAULT_EVAL_DEPTH = 400


class RankedAlphabet:
    """Finite ranked alphabet; declaration order is the tie-break order everywhere."""

    def __init__(self, symbols: Mapping[Symbol, int]):
        self._ranks: Dict[Symbol, int] = dict(symbols)
        for symbol, rank in self._ranks.items():
            if rank < 0:
                raise InvalidInputError(f"Symbol {symbol} has negative rank {rank}")
        self._order = {symbol: i for i, symbol in enumerate(self._ranks)}

    def rank(self, symbol: Symbol) -> int:
        try:
            return self._ranks[symbol]
        except KeyError:
            raise InvalidInputError(f"Unknown input symbol {symbol!r}") from None

    def index(self, symbol: Symbol) -> int:
        return self._order[symbol]

    def items(self):
        return self._ranks.items()

    def __contains__(self, symbol: object) -> bool:
        return symbol in self._ranks

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._ranks)

    def __len__(self) -> int:
        return len(self._ranks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RankedAlphabet):
            return NotImplemented
        return list(self._ranks.items()) == list(other._ranks.items())

    def __repr__(self) -> str:
        return f"RankedAlphabet({self._ranks!r})"

    @property
    def max_rank(self) -> int:
        return max(self._ranks.values(), default=0)


@dataclass(frozen=True)
class Tree:
    symbol: Symbol
    children: Tuple["Tree", ...] = ()

    @cached_property
    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(child.depth for child in self.children)

    def __str__(self) -> str:
        if not self.children:
            return self.symbol
        return f"{self.symbol}({','.join(str(child) for child in self.children)})"


@dataclass(frozen=True)
class Dta:
    """
    Top-down deterministic tree automaton.

    Attributes:
        states: declared states, in order
        delta: partial transition map (h, f) -> child states
        start: initial state h0
        alphabet: the ranked input alphabet
    """
    states: Tuple[DtaState, ...]
    delta: Dict[Tuple[DtaState, Symbol], Tuple[DtaState, ...]]
    start: DtaState
    alphabet: RankedAlphabet

    def __post_init__(self):
        known = set(self.states)
        if self.start not in known:
            raise InvalidInputError(f"DTA start state {self.start} is not declared")
        for (h, symbol), targets in self.delta.items():
            if h not in known:
                raise InvalidInputError(f"Transition from undeclared state {h}")
            if len(targets) != self.alphabet.rank(symbol):
                raise InvalidInputError(
                    f"Transition {h} {symbol} has {len(targets)} targets, "
                    f"rank is {self.alphabet.rank(symbol)}"
                )
            for target in targets:
                if target not in known:
                    raise InvalidInputError(f"Transition {h} {symbol} targets undeclared {target}")

    def transition(self, h: DtaState, symbol: Symbol) -> Optional[Tuple[DtaState, ...]]:
        return self.delta.get((h, symbol))


@dataclass(frozen=True)
class Call:
    """State call q(x_child), child 1-based."""
    state: State
    child: int

    def __str__(self) -> str:
        return f"{self.state}:{self.child}"


@dataclass(frozen=True)
class Rule:
    """
    q(f(x1..xm)) -> words[0] calls[0] words[1] ... calls[n-1] words[n], or Bottom.
    """
    state: State
    symbol: Symbol
    words: Tuple[GroupWord, ...] = (gc.EPSILON,)
    calls: Tuple[Call, ...] = ()
    bottom: bool = False

    def __post_init__(self):
        if self.bottom:
            if self.calls or self.words:
                raise InvalidInputError(f"Bottom rule {self.state} {self.symbol} carries a body")
            return
        if len(self.words) != len(self.calls) + 1:
            raise InvalidInputError(
                f"Rule {self.state} {self.symbol} needs {len(self.calls) + 1} words, "
                f"got {len(self.words)}"
            )
        children = [call.child for call in self.calls]
        if len(set(children)) != len(children):
            raise InvalidInputError(
                f"Rule {self.state} {self.symbol} reads a child twice: {children}"
            )

    @classmethod
    def bottom_rule(cls, state: State, symbol: Symbol) -> "Rule":
        return cls(state, symbol, words=(), calls=(), bottom=True)

    @property
    def sigma(self) -> Tuple[int, ...]:
        return tuple(call.child for call in self.calls)

    def body(self) -> str:
        if self.bottom:
            return "BOTTOM"
        parts = [str(self.words[0])]
        for call, word in zip(self.calls, self.words[1:]):
            parts.append(str(call))
            parts.append(str(word))
        return " ".join(parts)

    def __str__(self) -> str:
        return f"{self.state}({self.symbol}) -> {self.body()}"


@dataclass(frozen=True)
class Axiom:
    """Either the constant u0 (state is None) or u0 · q0(x0) · u1."""
    prefix: GroupWord = gc.EPSILON
    state: Optional[State] = None
    suffix: GroupWord = gc.EPSILON

    @property
    def is_constant(self) -> bool:
        return self.state is None

    def __str__(self) -> str:
        if self.state is None:
            return str(gc.concat(self.prefix, self.suffix))
        return f"{self.prefix} {self.state} {self.suffix}"


@dataclass(frozen=True)
class Transducer:
    """
    Total deterministic linear tree transducer with output in the free group.

    Exactly one rule exists for every (state, input symbol) pair.
    """
    input_alphabet: RankedAlphabet
    output_alphabet: Alphabet
    states: Tuple[State, ...]
    axiom: Axiom
    rules: Dict[Tuple[State, Symbol], Rule] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise InvalidInputError(f"Duplicate states in {self.states}")
        if self.axiom.state is not None and self.axiom.state not in known:
            raise InvalidInputError(f"Axiom state {self.axiom.state} is not declared")
        self.output_alphabet.validate(self.axiom.prefix)
        self.output_alphabet.validate(self.axiom.suffix)
        for q in self.states:
            for symbol in self.input_alphabet:
                if (q, symbol) not in self.rules:
                    raise InvalidInputError(f"Missing rule for state {q} on symbol {symbol}")
        for (q, symbol), rule in self.rules.items():
            if q not in known:
                raise InvalidInputError(f"Rule for undeclared state {q}")
            if (rule.state, rule.symbol) != (q, symbol):
                raise InvalidInputError(f"Rule {rule} filed under ({q}, {symbol})")
            rank = self.input_alphabet.rank(symbol)
            for call in rule.calls:
                if not 1 <= call.child <= rank:
                    raise InvalidInputError(
                        f"Rule {rule} reads child {call.child} of a rank-{rank} symbol"
                    )
                if call.state not in known:
                    raise InvalidInputError(f"Rule {rule} calls undeclared state {call.state}")
            for word in rule.words:
                self.output_alphabet.validate(word)

    def rule(self, q: State, symbol: Symbol) -> Rule:
        return self.rules[(q, symbol)]

    def rules_of(self, q: State) -> List[Rule]:
        return [self.rules[(q, symbol)] for symbol in self.input_alphabet]

    def ordered_rules(self) -> List[Rule]:
        """All rules, by state declaration order then symbol order."""
        return [rule for q in self.states for rule in self.rules_of(q)]


@dataclass(frozen=True)
class CompatibleMap:
    """Assignment of transducer states to DTA states."""
    assignment: Dict[State, DtaState] = field(default_factory=dict)

    def __getitem__(self, q: State) -> DtaState:
        return self.assignment[q]

    def __contains__(self, q: object) -> bool:
        return q in self.assignment

    def get(self, q: State) -> Optional[DtaState]:
        return self.assignment.get(q)

    def restrict(self, states: Sequence[State]) -> "CompatibleMap":
        return CompatibleMap({q: self.assignment[q] for q in states if q in self.assignment})

    @classmethod
    def infer(cls, m: Transducer, b: Dta) -> "CompatibleMap":
        """
        Recover the compatible map forced by the rules, by traversal from the axiom.

        Only states reachable along defined DTA transitions are assigned.

        Raises:
            UsageError: if some state is forced onto two different DTA states.
        """
        assignment: Dict[State, DtaState] = {}
        if m.axiom.state is None:
            return cls(assignment)
        assignment[m.axiom.state] = b.start
        queue = [m.axiom.state]
        while queue:
            q = queue.pop()
            h = assignment[q]
            for rule in m.rules_of(q):
                targets = b.transition(h, rule.symbol)
                if targets is None or rule.bottom:
                    continue
                for call in rule.calls:
                    wanted = targets[call.child - 1]
                    current = assignment.get(call.state)
                    if current is None:
                        assignment[call.state] = wanted
                        queue.append(call.state)
                    elif current != wanted:
                        raise UsageError(
                            f"State {call.state} would need DTA states {current} and {wanted}"
                        )
        return cls(assignment)


def check_compatible(m: Transducer, b: Dta, iota: CompatibleMap) -> List[str]:
    """
    Check the three compatibility conditions.

    Returns:
        A list of human-readable violations; empty when iota is compatible.
    """
    violations: List[str] = []
    if not m.states:
        return violations
    for q in m.states:
        if q not in iota:
            violations.append(f"state {q} has no DTA state")
        elif iota[q] not in b.states:
            violations.append(f"state {q} mapped to unknown DTA state {iota[q]}")
    if violations:
        return violations

    if m.axiom.state is not None and iota[m.axiom.state] != b.start:
        violations.append(f"axiom state {m.axiom.state} is not mapped to {b.start}")

    for rule in m.ordered_rules():
        h = iota[rule.state]
        targets = b.transition(h, rule.symbol)
        if targets is None:
            if not rule.bottom:
                violations.append(f"rule {rule} must be BOTTOM: no transition {h} {rule.symbol}")
            continue
        if rule.bottom:
            violations.append(f"rule {rule} is BOTTOM on defined transition {h} {rule.symbol}")
            continue
        for call in rule.calls:
            if iota[call.state] != targets[call.child - 1]:
                violations.append(
                    f"rule {rule}: {call.state} mapped to {iota[call.state]}, "
                    f"child {call.child} is read in {targets[call.child - 1]}"
                )
    return violations


def dta_reduce(b: Dta) -> Optional[Dta]:
    """
    Remove empty and unreachable states.

    Returns:
        An equivalent DTA in which every state has a nonempty domain, or None
        when the language is empty.
    """
    nonempty: Set[DtaState] = set()
    changed = True
    while changed:
        changed = False
        for (h, _), targets in b.delta.items():
            if h not in nonempty and all(t in nonempty for t in targets):
                nonempty.add(h)
                changed = True

    if b.start not in nonempty:
        logger.info(f"DTA language is empty: start state {b.start} has no finite tree")
        return None

    live_delta = {
        key: targets for key, targets in b.delta.items()
        if key[0] in nonempty and all(t in nonempty for t in targets)
    }
    reachable = {b.start}
    queue = [b.start]
    while queue:
        h = queue.pop()
        for symbol in b.alphabet:
            for target in live_delta.get((h, symbol), ()):
                if target not in reachable:
                    reachable.add(target)
                    queue.append(target)

    states = tuple(h for h in b.states if h in reachable)
    delta = {key: targets for key, targets in live_delta.items() if key[0] in reachable}
    removed = len(b.states) - len(states)
    if removed:
        logger.info(f"DTA reduction removed {removed} state(s)")
    return Dta(states, delta, b.start, b.alphabet)


def dom_member(b: Dta, h: DtaState, t: Tree) -> bool:
    """True iff t is accepted from state h."""
    stack = [(h, t)]
    while stack:
        state, node = stack.pop()
        targets = b.transition(state, node.symbol)
        if targets is None or len(targets) != len(node.children):
            return False
        stack.extend(zip(targets, node.children))
    return True


def min_trees(b: Dta) -> Dict[DtaState, Tree]:
    """
    A minimal-depth tree for every nonempty state.

    Ties go to the first symbol in declaration order; the children are
    themselves minimal trees, so the choice is deterministic.
    """
    found: Dict[DtaState, Tree] = {}
    while True:
        fresh: Dict[DtaState, Tree] = {}
        for h in b.states:
            if h in found:
                continue
            for symbol in b.alphabet:
                targets = b.transition(h, symbol)
                if targets is not None and all(t in found for t in targets):
                    fresh[h] = Tree(symbol, tuple(found[t] for t in targets))
                    break
        if not fresh:
            return found
        found.update(fresh)


def min_tree(b: Dta, h: DtaState) -> Tree:
    """
    Raises:
        UsageError: if dom(h) is empty.
    """
    trees = min_trees(b)
    if h not in trees:
        raise UsageError(f"DTA state {h} accepts no tree")
    return trees[h]


def enum_trees(b: Dta, h: DtaState, max_depth: int) -> Iterator[Tree]:
    """
    Stream the trees of dom(h) with depth < max_depth.

    Trees come by increasing depth, then symbol declaration order, then the
    product order of their children. Only the shallower layers are kept in
    memory; the deepest one is generated as it is consumed.
    """
    exact: Dict[Tuple[DtaState, int], List[Tree]] = {}

    def at_most(state: DtaState, depth: int) -> List[Tree]:
        return [t for d in range(depth + 1) for t in exact_depth(state, d)]

    def exact_depth(state: DtaState, depth: int) -> List[Tree]:
        key = (state, depth)
        if key not in exact:
            exact[key] = list(stream_depth(state, depth))
        return exact[key]

    def stream_depth(state: DtaState, depth: int) -> Iterator[Tree]:
        for symbol in b.alphabet:
            targets = b.transition(state, symbol)
            if targets is None:
                continue
            if not targets:
                if depth == 0:
                    yield Tree(symbol)
                continue
            if depth == 0:
                continue
            pools = [at_most(t, depth - 1) for t in targets]
            for children in itertools.product(*pools):
                if max(child.depth for child in children) == depth - 1:
                    yield Tree(symbol, tuple(children))

    for depth in range(max_depth):
        yield from stream_depth(h, depth)


def evaluate_state(m: Transducer, q: State, t: Tree,
                   max_depth: int = DEFAULT_EVAL_DEPTH) -> GroupWord:
    """
    Semantics of state q on input t.

    Raises:
        OffDomainError: if a Bottom rule is reached.
        EvaluationDepthError: if t is deeper than max_depth.
    """

    def run(state: State, node: Tree, level: int) -> GroupWord:
        if level > max_depth:
            raise EvaluationDepthError(f"Evaluation exceeded depth {max_depth} at {node.symbol}")
        rule = m.rule(state, node.symbol)
        if rule.bottom:
            raise OffDomainError(state, node)
        result = rule.words[0]
        for call, word in zip(rule.calls, rule.words[1:]):
            result = gc.concat(result, run(call.state, node.children[call.child - 1], level + 1))
            result = gc.concat(result, word)
        return result

    if len(t.children) != m.input_alphabet.rank(t.symbol):
        raise InvalidInputError(f"Tree {t} does not respect the rank of {t.symbol}")
    return run(q, t, 0)


def evaluate(m: Transducer, t: Tree, max_depth: int = DEFAULT_EVAL_DEPTH) -> GroupWord:
    """The translation of m on t."""
    if m.axiom.state is None:
        return gc.concat(m.axiom.prefix, m.axiom.suffix)
    inner = evaluate_state(m, m.axiom.state, t, max_depth)
    return gc.concat(gc.concat(m.axiom.prefix, inner), m.axiom.suffix)


_TREE_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([(),]))")


def parse_tree(text: str, alphabet: Optional[RankedAlphabet] = None) -> Tree:
    """
    Parse the tree literal syntax, e.g. `f(g(k),k)`.

    Args:
        text: the literal
        alphabet: when given, symbols and ranks are validated against it

    Raises:
        ParseError: on malformed input or rank mismatch.
    """
    tokens: List[str] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        match = _TREE_TOKEN.match(stripped, pos)
        if not match:
            raise ParseError("unexpected character", "<tree>", token=stripped[pos:].strip()[:1])
        tokens.append(match.group(1) or match.group(2))
        pos = match.end()
    if not tokens:
        raise ParseError("empty tree literal", "<tree>")

    index = 0

    def parse_node() -> Tree:
        nonlocal index
        if index >= len(tokens):
            raise ParseError("tree literal ends early", "<tree>")
        symbol = tokens[index]
        if symbol in "(),":
            raise ParseError("expected a symbol", "<tree>", token=symbol)
        index += 1
        children: List[Tree] = []
        if index < len(tokens) and tokens[index] == "(":
            index += 1
            if index < len(tokens) and tokens[index] == ")":
                index += 1
            else:
                while True:
                    children.append(parse_node())
                    if index >= len(tokens):
                        raise ParseError("missing ')'", "<tree>")
                    if tokens[index] == ",":
                        index += 1
                        continue
                    if tokens[index] == ")":
                        index += 1
                        break
                    raise ParseError("expected ',' or ')'", "<tree>", token=tokens[index])
        if alphabet is not None:
            if symbol not in alphabet:
                raise ParseError("unknown input symbol", "<tree>", token=symbol)
            if alphabet.rank(symbol) != len(children):
                raise ParseError(
                    f"symbol has rank {alphabet.rank(symbol)}, got {len(children)} children",
                    "<tree>", token=symbol,
                )
        return Tree(symbol, tuple(children))

    tree = parse_node()
    if index != len(tokens):
        raise ParseError("trailing input", "<tree>", token=tokens[index])
    return tree
