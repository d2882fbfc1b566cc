"""
The periodicity lattice over the free group and the fixpoint analysis that
abstracts the output language of every transducer state.

Elements are Empty, a singleton {g}, a canonical coset g<p> with p primitive,
or Top (the whole group). Join and product follow exact case tables, so the
abstraction of a union (product) is the join (product) of the abstractions.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional, Tuple, Union

from . import group_core as gc
from .errors import UsageError
from .group_core import Coset, GroupWord
from .tree_model import (CompatibleMap, Dta, DtaState, State, Transducer, check_compatible,
                         min_trees)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmptyLang:
    def __str__(self) -> str:
        return "EMPTY"


@dataclass(frozen=True)
class Singleton:
    word: GroupWord

    def __str__(self) -> str:
        return f"SINGLETON word={self.word}"


@dataclass(frozen=True)
class Periodic:
    coset: Coset

    @property
    def rep(self) -> GroupWord:
        return self.coset.rep

    @property
    def period(self) -> GroupWord:
        return self.coset.period

    def __str__(self) -> str:
        return f"PERIODIC rep={self.coset.rep} period={self.coset.period}"


@dataclass(frozen=True)
class TopLang:
    def __str__(self) -> str:
        return "TOP"


AbstractLang = Union[EmptyLang, Singleton, Periodic, TopLang]

EMPTY = EmptyLang()
TOP = TopLang()


def periodic(g: GroupWord, p: GroupWord) -> Periodic:
    return Periodic(gc.canonical_coset(g, p))


def alpha_of(words: Iterable[GroupWord]) -> AbstractLang:
    """
    Abstraction of a finite set of words.

    Computed directly from the set: the candidate period comes from the
    quotient of the least element with any other element, and every other
    quotient must lie in the same cyclic subgroup.
    """
    distinct = sorted(set(words), key=lambda w: (len(w), gc.word_key(w)))
    if not distinct:
        return EMPTY
    if len(distinct) == 1:
        return Singleton(distinct[0])
    base = distinct[0]
    base_inv = gc.invert(base)
    period = gc.primitive_root(gc.concat(base_inv, distinct[1]))
    for w in distinct[2:]:
        if not gc.in_cyclic_subgroup(gc.concat(base_inv, w), period):
            return TOP
    return periodic(base, period)


def alpha_join(x: AbstractLang, y: AbstractLang) -> AbstractLang:
    """Least upper bound."""
    if isinstance(x, EmptyLang):
        return y
    if isinstance(y, EmptyLang):
        return x
    if isinstance(x, TopLang) or isinstance(y, TopLang):
        return TOP
    if isinstance(x, Singleton) and isinstance(y, Singleton):
        if x.word == y.word:
            return x
        quotient = gc.concat(gc.invert(x.word), y.word)
        return periodic(x.word, gc.primitive_root(quotient))
    if isinstance(x, Singleton):
        x, y = y, x
    if isinstance(y, Singleton):
        return x if x.coset.contains(y.word) else TOP
    # both periodic: canonical forms make equal cosets structurally equal
    return x if x == y else TOP


def alpha_star(x: AbstractLang, y: AbstractLang) -> AbstractLang:
    """Abstract product: the abstraction of the elementwise concatenation."""
    if isinstance(x, EmptyLang) or isinstance(y, EmptyLang):
        return EMPTY
    if isinstance(x, TopLang) or isinstance(y, TopLang):
        return TOP
    if isinstance(x, Singleton) and isinstance(y, Singleton):
        return Singleton(gc.concat(x.word, y.word))
    if isinstance(x, Singleton):
        return periodic(gc.concat(x.word, y.rep), y.period)
    if isinstance(y, Singleton):
        shifted = gc.concat(gc.concat(gc.invert(y.word), x.period), y.word)
        return periodic(gc.concat(x.rep, y.word), shifted)
    # g1<p1> g2<p2> = g1 g2 <g2⁻ p1 g2> <p2>, periodic only when both subgroups agree
    shifted = gc.concat(gc.concat(gc.invert(y.rep), x.period), y.rep)
    if gc.in_cyclic_subgroup(shifted, y.period):
        return periodic(gc.concat(x.rep, y.rep), y.period)
    return TOP


def lift(word: GroupWord) -> Singleton:
    return Singleton(word)


def leq(x: AbstractLang, y: AbstractLang) -> bool:
    """Partial order of the lattice, consistent with set inclusion."""
    if isinstance(x, EmptyLang) or isinstance(y, TopLang):
        return True
    if isinstance(x, TopLang) or isinstance(y, EmptyLang):
        return False
    if isinstance(x, Singleton):
        if isinstance(y, Singleton):
            return x.word == y.word
        return y.coset.contains(x.word)
    if isinstance(y, Singleton):
        return False
    return x == y


def _rule_value(rule, values: Dict[State, AbstractLang]) -> AbstractLang:
    result: AbstractLang = lift(rule.words[0])
    for call, word in zip(rule.calls, rule.words[1:]):
        result = alpha_star(result, values[call.state])
        result = alpha_star(result, lift(word))
    return result


def analyze_iterates(m: Transducer, b: Dta,
                     iota: CompatibleMap) -> Iterator[Dict[State, AbstractLang]]:
    """
    Yield X^(0), X^(1), ... of the synchronous iteration, up to the fixpoint.

    X^(i)[q] abstracts the outputs of q on trees of depth < i. A rule only
    contributes once every child, read or not, admits a tree of depth < i - 1,
    so the iteration may pause for a few rounds before the last rules open.

    Raises:
        UsageError: if iota is not compatible.
    """
    violations = check_compatible(m, b, iota)
    if violations:
        raise UsageError(f"Map is not compatible: {violations[0]}")

    min_depth = {h: t.depth for h, t in min_trees(b).items()}
    opened = max(min_depth.values(), default=0) + 2

    def enabled(targets: Tuple[DtaState, ...], round_no: int) -> bool:
        return all(t in min_depth and min_depth[t] < round_no - 1 for t in targets)

    current: Dict[State, AbstractLang] = {q: EMPTY for q in m.states}
    yield dict(current)
    cap = 3 * len(m.states) + opened
    for round_no in range(1, cap + 1):
        following: Dict[State, AbstractLang] = {}
        for q in m.states:
            value: AbstractLang = EMPTY
            h = iota[q]
            for rule in m.rules_of(q):
                targets = b.transition(h, rule.symbol)
                if rule.bottom or targets is None or not enabled(targets, round_no):
                    continue
                value = alpha_join(value, _rule_value(rule, current))
            following[q] = value
        if following == current and round_no >= opened:
            logger.debug(f"Analysis stable after {round_no - 1} round(s)")
            return
        current = following
        yield dict(current)
    logger.warning(f"Analysis did not stabilise within {cap} rounds")


def analyze(m: Transducer, b: Dta, iota: CompatibleMap) -> Dict[State, AbstractLang]:
    """
    Least solution of the per-state constraint system.

    Args:
        m: transducer with compatible map iota
        b: reduced DTA
        iota: compatible map of m relative to b

    Returns:
        Map from every state to the abstraction of its output language.
    """
    result: Optional[Dict[State, AbstractLang]] = None
    for result in analyze_iterates(m, b, iota):
        pass
    assert result is not None
    logger.info(f"Analysed {len(result)} state(s): "
                f"{sum(isinstance(v, Periodic) for v in result.values())} periodic, "
                f"{sum(isinstance(v, Singleton) for v in result.values())} trivial")
    return result


def is_trivial(value: AbstractLang) -> bool:
    return isinstance(value, Singleton)
