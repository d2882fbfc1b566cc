"""
Normalization of transducers relative to a domain automaton.

The pipeline builds a product with the DTA so that a compatible map exists,
inlines states with a single output, and reorders every periodic span of
state calls so that the input children are read in ascending order.
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import group_core as gc
from .errors import InvalidInputError, InvariantViolation, UsageError
from .group_core import GroupWord
from .periodicity_domain import (AbstractLang, Periodic, Singleton, alpha_star, analyze,
                                 leq, lift, periodic)
from .tree_model import (Axiom, Call, CompatibleMap, Dta, DtaState, Rule, State, Transducer,
                         Tree, check_compatible, dta_reduce, evaluate_state, min_trees)

logger = logging.getLogger(__name__)

__all__ = [
    "Normalized", "PeriodicDecomposition", "WitnessProvider", "check_compatible",
    "is_ordered", "make_compatible", "order_transducer", "periodic_decompose",
    "periodic_intervals", "permute_interval", "prune_unreachable", "remove_trivial",
    "reorder_rule",
]

PRODUCT_SEPARATOR = "@"


def make_compatible(m: Transducer, b: Dta) -> Tuple[Transducer, CompatibleMap]:
    """
    Product of m with the DTA b, restricted to reachable pairs.

    A product state keeps the plain name q when q is paired with a single DTA
    state, and is named q@h otherwise.

    Args:
        m: total transducer
        b: reduced DTA with nonempty language

    Returns:
        The product transducer and its compatible map.

    Raises:
        InvalidInputError: if m has a Bottom rule on an input the DTA accepts.
    """
    if m.axiom.state is None:
        constant = Transducer(m.input_alphabet, m.output_alphabet, (), m.axiom, {})
        return constant, CompatibleMap({})

    start = (m.axiom.state, b.start)
    pairs: List[Tuple[State, DtaState]] = [start]
    seen = {start}
    index = 0
    while index < len(pairs):
        q, h = pairs[index]
        index += 1
        for symbol in m.input_alphabet:
            targets = b.transition(h, symbol)
            rule = m.rule(q, symbol)
            if targets is None:
                continue
            if rule.bottom:
                raise InvalidInputError(
                    f"Rule {rule} is BOTTOM but DTA state {h} accepts symbol {symbol}"
                )
            for call in rule.calls:
                pair = (call.state, targets[call.child - 1])
                if pair not in seen:
                    seen.add(pair)
                    pairs.append(pair)

    # declaration order of m, product pairs of one state in discovery order
    declared = {q: i for i, q in enumerate(m.states)}
    pairs.sort(key=lambda pair: declared[pair[0]])

    partners: Dict[State, int] = {}
    for q, _ in pairs:
        partners[q] = partners.get(q, 0) + 1

    def name(pair: Tuple[State, DtaState]) -> State:
        q, h = pair
        return q if partners[q] == 1 else f"{q}{PRODUCT_SEPARATOR}{h}"

    rules: Dict[Tuple[State, str], Rule] = {}
    for pair in pairs:
        q, h = pair
        for symbol in m.input_alphabet:
            targets = b.transition(h, symbol)
            if targets is None:
                rules[(name(pair), symbol)] = Rule.bottom_rule(name(pair), symbol)
                continue
            rule = m.rule(q, symbol)
            calls = tuple(
                Call(name((call.state, targets[call.child - 1])), call.child)
                for call in rule.calls
            )
            rules[(name(pair), symbol)] = Rule(name(pair), symbol, rule.words, calls)

    states = tuple(name(pair) for pair in pairs)
    axiom = Axiom(m.axiom.prefix, name(start), m.axiom.suffix)
    product = Transducer(m.input_alphabet, m.output_alphabet, states, axiom, rules)
    iota = CompatibleMap({name(pair): pair[1] for pair in pairs})

    violations = check_compatible(product, b, iota)
    if violations:
        raise InvariantViolation(f"Product map is not compatible: {violations[0]}")
    logger.info(f"Product construction: {len(m.states)} state(s) became {len(states)}")
    return product, iota


def _merge_calls(words: Sequence[GroupWord], calls: Sequence[Call],
                 inline: Dict[State, GroupWord]) -> Tuple[Tuple[GroupWord, ...], Tuple[Call, ...]]:
    """Replace calls to inlined states by their word and merge the adjacent words."""
    new_words = [words[0]]
    new_calls: List[Call] = []
    for call, word in zip(calls, words[1:]):
        if call.state in inline:
            new_words[-1] = gc.concat(gc.concat(new_words[-1], inline[call.state]), word)
        else:
            new_calls.append(call)
            new_words.append(word)
    return tuple(new_words), tuple(new_calls)


def prune_unreachable(m: Transducer, b: Dta, iota: CompatibleMap) -> Transducer:
    """Drop states no longer reachable from the axiom along defined transitions."""
    if m.axiom.state is None:
        return replace(m, states=(), rules={})
    reachable = {m.axiom.state}
    queue = [m.axiom.state]
    while queue:
        q = queue.pop()
        for rule in m.rules_of(q):
            if rule.bottom or b.transition(iota[q], rule.symbol) is None:
                continue
            for call in rule.calls:
                if call.state not in reachable:
                    reachable.add(call.state)
                    queue.append(call.state)
    states = tuple(q for q in m.states if q in reachable)
    if len(states) == len(m.states):
        return m
    logger.debug(f"Pruned {len(m.states) - len(states)} unreachable state(s)")
    rules = {key: rule for key, rule in m.rules.items() if key[0] in reachable}
    return replace(m, states=states, rules=rules)


def remove_trivial(m: Transducer, b: Dta, iota: CompatibleMap,
                   analysis: Dict[State, AbstractLang]) -> Transducer:
    """
    Inline every state whose output language is a single word.

    Calls to trivial states become constant words; states that are then
    unreachable are dropped. A trivial axiom state yields a constant transducer.
    """
    inline = {q: value.word for q, value in analysis.items() if isinstance(value, Singleton)}
    if not inline:
        return m
    axiom = m.axiom
    if axiom.state in inline:
        word = gc.concat(gc.concat(axiom.prefix, inline[axiom.state]), axiom.suffix)
        logger.info(f"Axiom state {axiom.state} is trivial; transducer is the constant {word}")
        return Transducer(m.input_alphabet, m.output_alphabet, (), Axiom(word), {})

    rules: Dict[Tuple[State, str], Rule] = {}
    for (q, symbol), rule in m.rules.items():
        if q in inline:
            continue
        if rule.bottom:
            rules[(q, symbol)] = rule
            continue
        words, calls = _merge_calls(rule.words, rule.calls, inline)
        rules[(q, symbol)] = Rule(q, symbol, words, calls)
    states = tuple(q for q in m.states if q not in inline)
    logger.info(f"Inlined {len(inline)} trivial state(s)")
    stripped = Transducer(m.input_alphabet, m.output_alphabet, states, axiom, rules)
    return prune_unreachable(stripped, b, iota)


class WitnessProvider:
    """Deterministic sample outputs: each state evaluated on a minimal tree of its domain."""

    def __init__(self, m: Transducer, b: Dta, iota: CompatibleMap):
        self.m = m
        self.iota = iota
        self._trees = min_trees(b)
        self._words: Dict[State, GroupWord] = {}

    def tree(self, q: State) -> Tree:
        return self._trees[self.iota[q]]

    def word(self, q: State) -> GroupWord:
        if q not in self._words:
            self._words[q] = evaluate_state(self.m, q, self.tree(q))
        return self._words[q]


@dataclass(frozen=True)
class PeriodicDecomposition:
    """
    Per-factor cosets of a periodic span q_1 u_1 q_2 ... u_{n-1} q_n.

    Every factor satisfies L(q_k) ⊆ reps[k]·<periods[k]>, the last period is
    the span's period, and periods[k] = (u_k reps[k+1]) periods[k+1] (u_k reps[k+1])⁻.
    """
    calls: Tuple[Call, ...]
    inner: Tuple[GroupWord, ...]
    reps: Tuple[GroupWord, ...]
    periods: Tuple[GroupWord, ...]
    rep: GroupWord
    period: GroupWord
    prefixes: Tuple[GroupWord, ...]
    suffixes: Tuple[GroupWord, ...]

    def connectors(self) -> Tuple[GroupWord, ...]:
        """c_k = u_k v_{k+1} ... u_{n-1} v_n, with c_n = ε."""
        result = [gc.EPSILON]
        for k in range(len(self.calls) - 2, -1, -1):
            step = gc.concat(self.inner[k], self.reps[k + 1])
            result.append(gc.concat(step, result[-1]))
        return tuple(reversed(result))


def span_value(calls: Sequence[Call], inner: Sequence[GroupWord],
               analysis: Dict[State, AbstractLang]) -> AbstractLang:
    value = analysis[calls[0].state]
    for call, word in zip(calls[1:], inner):
        value = alpha_star(alpha_star(value, lift(word)), analysis[call.state])
    return value


def periodic_decompose(calls: Sequence[Call], inner: Sequence[GroupWord],
                       analysis: Dict[State, AbstractLang],
                       witnesses: WitnessProvider) -> Optional[PeriodicDecomposition]:
    """
    Decompose a span of state calls whose output set lies in one coset.

    Args:
        calls: the state calls q_1 .. q_n of the span
        inner: the n-1 words between consecutive calls
        analysis: abstraction of every state
        witnesses: sample outputs used to pin the per-factor representatives

    Returns:
        The decomposition, or None when the span is not periodic.

    Raises:
        InvariantViolation: if a computed coset does not cover its factor.
    """
    if len(inner) != len(calls) - 1 or not calls:
        raise UsageError(f"Span of {len(calls)} call(s) needs {len(calls) - 1} inner word(s)")
    value = span_value(calls, inner, analysis)
    if not isinstance(value, Periodic):
        return None
    v, p = value.rep, value.period
    n = len(calls)
    samples = [witnesses.word(call.state) for call in calls]

    prefixes = [gc.EPSILON]
    for k in range(1, n):
        prefixes.append(gc.concat_all([prefixes[-1], samples[k - 1], inner[k - 1]]))
    suffixes = [gc.EPSILON] * n
    for k in range(n - 2, -1, -1):
        suffixes[k] = gc.concat_all([inner[k], samples[k + 1], suffixes[k + 1]])

    reps: List[GroupWord] = [gc.EPSILON] * n
    periods: List[GroupWord] = [gc.EPSILON] * n
    periods[n - 1] = p
    for k in range(n - 1, -1, -1):
        if k < n - 1:
            periods[k] = gc.conjugate(periods[k + 1], gc.concat(inner[k], reps[k + 1]))
        raw = gc.concat_all([gc.invert(prefixes[k]), v, gc.invert(suffixes[k])])
        # a shorter member of the same coset keeps the recurrence and the residue intact
        reps[k] = gc.canonical_coset(raw, periods[k]).rep

    for k, call in enumerate(calls):
        if not leq(analysis[call.state], periodic(reps[k], periods[k])):
            raise InvariantViolation(
                f"Factor {call} is not covered by {reps[k]}<{periods[k]}>"
            )
    residue = [gc.invert(v), reps[0]]
    for k in range(1, n):
        residue.extend([inner[k - 1], reps[k]])
    if not gc.in_cyclic_subgroup(gc.concat_all(residue), p):
        raise InvariantViolation(f"Span representatives do not recombine into {v}<{p}>")

    return PeriodicDecomposition(
        tuple(calls), tuple(inner), tuple(reps), tuple(periods), v, p,
        tuple(prefixes), tuple(suffixes),
    )


def periodic_intervals(rule: Rule, analysis: Dict[State, AbstractLang]) -> List[Tuple[int, int]]:
    """
    Maximal periodic intervals [i, j] of call positions with at least two calls.

    Scans greedily from the left, extending while the abstract product stays
    periodic.
    """
    intervals: List[Tuple[int, int]] = []
    if rule.bottom:
        return intervals
    calls = rule.calls
    i = 0
    while i < len(calls):
        value = analysis[calls[i].state]
        j = i
        while isinstance(value, Periodic) and j + 1 < len(calls):
            extended = alpha_star(alpha_star(value, lift(rule.words[j + 1])),
                                  analysis[calls[j + 1].state])
            if not isinstance(extended, Periodic):
                break
            value = extended
            j += 1
        if j > i:
            intervals.append((i, j))
            if j + 1 < len(calls):
                _assert_disjoint(rule, j, analysis)
        i = j + 1
    return intervals


def _assert_disjoint(rule: Rule, j: int, analysis: Dict[State, AbstractLang]) -> None:
    left, right = rule.calls[j].state, rule.calls[j + 1].state
    if isinstance(analysis[left], Singleton) or isinstance(analysis[right], Singleton):
        return
    pair = span_value(rule.calls[j:j + 2], rule.words[j + 1:j + 2], analysis)
    if isinstance(pair, Periodic):
        raise InvariantViolation(f"Overlapping periodic intervals in rule {rule} at call {j}")


def permute_interval(rule: Rule, start: int, end: int, order: Sequence[int],
                     decomposition: PeriodicDecomposition) -> Rule:
    """
    Permute the calls start..end of a periodic span.

    Each call q_k is carried as c_k⁻ v_k⁻ q_k(x) c_k, which lies in the span's
    cyclic subgroup; the span becomes v_1 c_1 followed by the carried calls in
    the new order.

    Args:
        rule: the rule containing the span
        start: position of the first call of the span
        end: position of the last call of the span
        order: permutation of range(end - start + 1), the new call order
        decomposition: decomposition of exactly this span
    """
    size = end - start + 1
    if sorted(order) != list(range(size)) or len(decomposition.calls) != size:
        raise UsageError(f"Order {list(order)} does not permute a span of {size} call(s)")
    connectors = decomposition.connectors()
    reps = decomposition.reps
    head = gc.concat(reps[0], connectors[0])

    words = list(rule.words[:start + 1])
    words[start] = gc.concat(words[start], head)
    calls = list(rule.calls[:start])
    previous = None
    for k in order:
        entry = gc.concat(gc.invert(connectors[k]), gc.invert(reps[k]))
        if previous is None:
            words[-1] = gc.concat(words[-1], entry)
        else:
            words.append(gc.concat(connectors[previous], entry))
        calls.append(decomposition.calls[k])
        previous = k
    words.append(gc.concat(connectors[previous], rule.words[end + 1]))
    words.extend(rule.words[end + 2:])
    calls.extend(rule.calls[end + 1:])
    return Rule(rule.state, rule.symbol, tuple(words), tuple(calls))


def reorder_rule(rule: Rule, analysis: Dict[State, AbstractLang],
                 witnesses: WitnessProvider) -> Rule:
    """Sort the calls of every maximal periodic interval by child index."""
    for start, end in periodic_intervals(rule, analysis):
        children = rule.sigma[start:end + 1]
        order = sorted(range(len(children)), key=lambda k: children[k])
        if order == list(range(len(children))):
            continue
        decomposition = periodic_decompose(
            rule.calls[start:end + 1], rule.words[start + 1:end + 1], analysis, witnesses
        )
        if decomposition is None:
            raise InvariantViolation(f"Interval {start}..{end} of {rule} is not periodic")
        rule = permute_interval(rule, start, end, order, decomposition)
        logger.debug(f"Reordered calls {start}..{end}: {rule}")
    return rule


def is_ordered(m: Transducer, analysis: Dict[State, AbstractLang]) -> bool:
    """True iff every maximal periodic interval reads its children in ascending order."""
    for rule in m.ordered_rules():
        for start, end in periodic_intervals(rule, analysis):
            children = rule.sigma[start:end + 1]
            if list(children) != sorted(children):
                return False
    return True


@dataclass(frozen=True)
class Normalized:
    """An ordered, trivial-free transducer with everything computed along the way."""
    transducer: Transducer
    iota: CompatibleMap
    dta: Dta
    analysis: Dict[State, AbstractLang]


def order_transducer(m: Transducer, b: Dta) -> Optional[Normalized]:
    """
    Equivalent ordered transducer without trivial states.

    Returns:
        The normalized transducer, or None when the DTA accepts no tree.
    """
    reduced = dta_reduce(b)
    if reduced is None:
        logger.info("Empty domain: nothing to normalize")
        return None
    product, iota = make_compatible(m, reduced)
    if product.axiom.state is None:
        return Normalized(product, iota, reduced, {})

    first = analyze(product, reduced, iota)
    stripped = remove_trivial(product, reduced, iota, first)
    if stripped.axiom.state is None:
        return Normalized(stripped, CompatibleMap({}), reduced, {})
    iota = iota.restrict(stripped.states)
    analysis = analyze(stripped, reduced, iota)

    witnesses = WitnessProvider(stripped, reduced, iota)
    rules = dict(stripped.rules)
    changed = 0
    for key, rule in stripped.rules.items():
        reordered = reorder_rule(rule, analysis, witnesses)
        if reordered != rule:
            rules[key] = reordered
            changed += 1
    ordered = replace(stripped, rules=rules)
    if not is_ordered(ordered, analysis):
        raise InvariantViolation("Reordering left an unordered periodic interval")
    logger.info(f"Normalized transducer: {len(ordered.states)} state(s), "
                f"{changed} rule(s) reordered")
    return Normalized(ordered, iota, reduced, analysis)
