"""
Random instances, mutation operators and the brute-force oracle used for
differential testing of the decision procedure.
"""
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from tqdm import tqdm

from . import group_core as gc
from .errors import OversizedTestSetError
from .group_core import Alphabet, GroupWord, SignedLetter
from .normalizer import (WitnessProvider, make_compatible, periodic_decompose,
                         permute_interval, span_value)
from .pair_checker import CheckConfig, Outcome, Verdict, decide_equiv, search_witness
from .periodicity_domain import Periodic, Singleton, analyze
from .tree_model import (Axiom, Call, CompatibleMap, Dta, RankedAlphabet, Rule, Transducer,
                         dta_reduce)

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_DEPTH = 4
SYMBOL_NAMES = ("k", "f", "g", "h", "e", "j")
GENERATOR_NAMES = "abcdefgh"
MAX_DTA_RETRIES = 20


@dataclass(frozen=True)
class GenParams:
    """Shape of a random instance; generation is a pure function of these fields."""
    seed: int = 0
    max_states: int = 5
    max_rank: int = 2
    input_symbols: int = 3
    output_generators: int = 2
    max_word_length: int = 4
    dta_states: int = 2
    periodic_bias: float = 0.3

    def __post_init__(self):
        for name in ("max_states", "max_rank", "input_symbols", "output_generators",
                     "max_word_length", "dta_states"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.input_symbols > len(SYMBOL_NAMES):
            raise ValueError(f"At most {len(SYMBOL_NAMES)} input symbols are supported")
        if self.output_generators > len(GENERATOR_NAMES):
            raise ValueError(f"At most {len(GENERATOR_NAMES)} output generators are supported")
        if not 0.0 <= self.periodic_bias <= 1.0:
            raise ValueError(f"periodic_bias must lie in [0, 1], got {self.periodic_bias}")


def random_word(rng: random.Random, generators: Tuple[str, ...], max_length: int) -> GroupWord:
    length = rng.randint(0, max_length)
    return gc.reduce(SignedLetter(rng.choice(generators), rng.random() < 0.7)
                     for _ in range(length))


def _random_dta(rng: random.Random, params: GenParams, alphabet: RankedAlphabet) -> Dta:
    states = tuple(f"h{i}" for i in range(rng.randint(1, params.dta_states)))
    leaves = [symbol for symbol in alphabet if alphabet.rank(symbol) == 0]
    for _ in range(MAX_DTA_RETRIES):
        delta = {}
        for h in states:
            for symbol in alphabet:
                if rng.random() < 0.75:
                    delta[(h, symbol)] = tuple(rng.choice(states)
                                               for _ in range(alphabet.rank(symbol)))
        candidate = dta_reduce(Dta(states, delta, states[0], alphabet))
        if candidate is not None:
            return candidate
    logger.warning(f"No nonempty DTA after {MAX_DTA_RETRIES} attempts; adding leaf transitions")
    for h in states:
        delta[(h, leaves[0])] = ()
    return dta_reduce(Dta(states, delta, states[0], alphabet))


def gen_instance(params: GenParams) -> Tuple[Transducer, Dta]:
    """
    A random reduced DTA and a transducer compatible with it.

    About `periodic_bias` of the states only emit powers of one shared base
    word and only call each other, so their output languages are periodic.
    """
    rng = random.Random(params.seed)
    ranks = {SYMBOL_NAMES[0]: 0}
    for name in SYMBOL_NAMES[1:params.input_symbols]:
        ranks[name] = rng.randint(0, params.max_rank)
    alphabet = RankedAlphabet(ranks)
    generators = tuple(GENERATOR_NAMES[:params.output_generators])
    output = Alphabet(generators)
    dta = _random_dta(rng, params, alphabet)

    states = tuple(f"q{i}" for i in range(rng.randint(1, params.max_states)))
    periodic_states = [q for q in states if rng.random() < params.periodic_bias]
    base = random_word(rng, generators, 2)
    if base.is_identity:
        base = GroupWord((SignedLetter(generators[0]),))

    rules: Dict[Tuple[str, str], Rule] = {}
    for q in states:
        is_periodic = q in periodic_states
        for symbol in alphabet:
            rank = alphabet.rank(symbol)
            children = rng.sample(range(1, rank + 1), rng.randint(0, rank))
            pool = periodic_states if is_periodic else states
            calls = tuple(Call(rng.choice(pool), child) for child in children)
            if is_periodic:
                words = tuple(gc.power(base, rng.randint(0, 2)) for _ in range(len(calls) + 1))
            else:
                words = tuple(random_word(rng, generators, params.max_word_length)
                              for _ in range(len(calls) + 1))
            rules[(q, symbol)] = Rule(q, symbol, words, calls)

    axiom = Axiom(random_word(rng, generators, 2), states[0], random_word(rng, generators, 2))
    raw = Transducer(alphabet, output, states, axiom, rules)
    transducer, _ = make_compatible(raw, dta)
    logger.debug(f"Instance seed={params.seed}: {len(transducer.states)} state(s), "
                 f"{len(dta.states)} DTA state(s)")
    return transducer, dta


def _live_rules(m: Transducer, b: Dta, iota: CompatibleMap) -> List[Rule]:
    return [rule for rule in m.ordered_rules()
            if not rule.bottom and b.transition(iota[rule.state], rule.symbol) is not None]


def _replace_rule(m: Transducer, rule: Rule) -> Transducer:
    rules = dict(m.rules)
    rules[(rule.state, rule.symbol)] = rule
    return replace(m, rules=rules)


def _insert_identity(m: Transducer, rule: Rule, rng: random.Random) -> Transducer:
    index = rng.randrange(len(rule.words))
    word = rule.words[index]
    position = rng.randint(0, len(word))
    w = random_word(rng, m.output_alphabet.generators, 2)
    raw = word.letters[:position] + w.letters + gc.invert(w).letters + word.letters[position:]
    words = list(rule.words)
    words[index] = gc.reduce(raw)
    return _replace_rule(m, replace(rule, words=tuple(words)))


def _permute_span(m: Transducer, b: Dta, iota: CompatibleMap, analysis,
                  rule: Rule, start: int, end: int, rng: random.Random) -> Transducer:
    witnesses = WitnessProvider(m, b, iota)
    decomposition = periodic_decompose(rule.calls[start:end + 1],
                                       rule.words[start + 1:end + 1], analysis, witnesses)
    order = list(range(end - start + 1))
    while order == sorted(order):
        rng.shuffle(order)
    return _replace_rule(m, permute_interval(rule, start, end, order, decomposition))


def _shift_around(m: Transducer, rule: Rule, position: int, value: GroupWord,
                  rng: random.Random) -> Transducer:
    shift = GroupWord()
    while shift.is_identity:
        shift = random_word(rng, m.output_alphabet.generators, 2)
    words = list(rule.words)
    words[position] = gc.concat(words[position], shift)
    # u c q(x) v⁻ c⁻ v u' = u q(x) u' when q always outputs v
    back = gc.concat_all([gc.invert(value), gc.invert(shift), value])
    words[position + 1] = gc.concat(back, words[position + 1])
    return _replace_rule(m, replace(rule, words=tuple(words)))


def _duplicate_state(m: Transducer, rule: Rule, position: int) -> Transducer:
    original = rule.calls[position].state
    clone = f"{original}_copy"
    suffix = 1
    while clone in m.states:
        suffix += 1
        clone = f"{original}_copy{suffix}"
    rules = dict(m.rules)
    for symbol in m.input_alphabet:
        source = m.rule(original, symbol)
        if source.bottom:
            rules[(clone, symbol)] = Rule.bottom_rule(clone, symbol)
        else:
            rules[(clone, symbol)] = Rule(clone, symbol, source.words, source.calls)
    calls = list(rule.calls)
    calls[position] = Call(clone, calls[position].child)
    rules[(rule.state, rule.symbol)] = replace(rule, calls=tuple(calls))
    return replace(m, states=m.states + (clone,), rules=rules)


def mutate_preserving(m: Transducer, b: Dta, seed: int) -> Transducer:
    """
    A transducer equivalent to m relative to b, by construction.

    One of: insert w·w⁻ into a rule word, permute a periodic span with
    recomputed connectors, shift a constant across a call to a single-output
    state, or route one call through a fresh copy of its state. Returns m
    unchanged when no site applies.
    """
    rng = random.Random(seed)
    if m.axiom.state is None:
        return m
    iota = CompatibleMap.infer(m, b)
    live = _live_rules(m, b, iota)
    if not live:
        return m
    analysis = analyze(m, b, iota)

    spans = []
    shifts = []
    for rule in live:
        for start in range(len(rule.calls)):
            value = analysis[rule.calls[start].state]
            if isinstance(value, Singleton):
                shifts.append((rule, start, value.word))
            for end in range(start + 1, len(rule.calls)):
                span = span_value(rule.calls[start:end + 1], rule.words[start + 1:end + 1],
                                  analysis)
                if isinstance(span, Periodic):
                    spans.append((rule, start, end))
    calls = [(rule, i) for rule in live for i in range(len(rule.calls))]

    kinds = ["insert"]
    if spans:
        kinds.append("permute")
    if shifts:
        kinds.append("shift")
    if calls:
        kinds.append("duplicate")
    kind = rng.choice(kinds)
    logger.debug(f"Preserving mutation {kind} (seed {seed})")
    if kind == "permute":
        rule, start, end = rng.choice(spans)
        return _permute_span(m, b, iota, analysis, rule, start, end, rng)
    if kind == "shift":
        rule, position, value = rng.choice(shifts)
        return _shift_around(m, rule, position, value, rng)
    if kind == "duplicate":
        rule, position = rng.choice(calls)
        return _duplicate_state(m, rule, position)
    return _insert_identity(m, rng.choice(live), rng)


def mutate_breaking(m: Transducer, seed: int) -> Transducer:
    """Append one generator to one rule word (or to the axiom of a constant transducer)."""
    rng = random.Random(seed)
    letter = GroupWord((SignedLetter(rng.choice(m.output_alphabet.generators)),))
    candidates = [rule for rule in m.ordered_rules() if not rule.bottom]
    if not candidates:
        axiom = replace(m.axiom, prefix=gc.concat(m.axiom.prefix, letter))
        return replace(m, axiom=axiom)
    rule = rng.choice(candidates)
    index = rng.randrange(len(rule.words))
    words = list(rule.words)
    words[index] = gc.concat(words[index], letter)
    logger.debug(f"Breaking mutation on {rule.state}({rule.symbol}) word {index}")
    return _replace_rule(m, replace(rule, words=tuple(words)))


def brute_force_equiv(m: Transducer, m2: Transducer, b: Dta,
                      max_depth: int = DEFAULT_ORACLE_DEPTH, workers: int = 1) -> Verdict:
    """
    Compare both translations on every tree of L(b) with depth < max_depth.

    "Equivalent" here only means no witness below the horizon; the verdict
    records the horizon in `depth_bounded`.
    """
    reduced = dta_reduce(b)
    if reduced is None:
        return Verdict(Outcome.EMPTY_DOMAIN, note="the domain automaton accepts no tree")
    found = search_witness(m, m2, reduced, max_depth, workers)
    if found is None:
        return Verdict(Outcome.EQUIVALENT, depth_bounded=max_depth,
                       note=f"no witness of depth < {max_depth}")
    tree, left, right = found
    return Verdict(Outcome.INEQUIVALENT, tree, left, right, depth_bounded=max_depth)


def verdicts_consistent(decided: Verdict, oracle: Verdict) -> bool:
    """
    Whether a decision agrees with a depth-bounded oracle.

    The only tolerated difference is a decided inequivalence whose witness is
    at or beyond the oracle's horizon (or was not found at all).
    """
    if decided.outcome == oracle.outcome:
        return True
    if decided.outcome == Outcome.INEQUIVALENT and oracle.outcome == Outcome.EQUIVALENT:
        if decided.witness is None:
            return True
        horizon = oracle.depth_bounded
        return horizon is not None and decided.witness.depth >= horizon
    return False


@dataclass
class DifferentialReport:
    instances: int = 0
    checks: int = 0
    agreements: int = 0
    skipped: int = 0
    disagreements: List[str] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        """An oversized test set leaves a pair unchecked, so any skip fails the run."""
        return self.checks == self.agreements and self.skipped == 0


def run_differential(count: int = 200, template: Optional[GenParams] = None,
                     depth: int = DEFAULT_ORACLE_DEPTH,
                     config: Optional[CheckConfig] = None,
                     progress: bool = True) -> DifferentialReport:
    """
    Run decide_equiv against the oracle on seeded instances and their mutations.

    Args:
        count: number of instances, seeded template.seed .. template.seed + count - 1
        template: instance shape
        depth: oracle horizon
        config: decision procedure settings
        progress: show a tqdm progress bar

    Returns:
        Agreement statistics with one line per disagreement. Checks whose
        test set outgrows the cap are counted as skipped.
    """
    template = template or GenParams()
    config = config or CheckConfig.from_env()
    report = DifferentialReport()
    with tqdm(total=count, desc="Differential", disable=not progress) as pbar:
        for offset in range(count):
            seed = template.seed + offset
            m, b = gen_instance(replace(template, seed=seed))
            report.instances += 1
            variants = (("preserving", mutate_preserving(m, b, seed)),
                        ("breaking", mutate_breaking(m, seed)))
            for label, variant in variants:
                try:
                    decided = decide_equiv(m, variant, b, config)
                except OversizedTestSetError as e:
                    message = f"seed {seed} ({label}): unchecked, {e}"
                    logger.error(message)
                    report.skipped += 1
                    report.disagreements.append(message)
                    continue
                oracle = brute_force_equiv(m, variant, b, depth, config.workers)
                report.checks += 1
                if verdicts_consistent(decided, oracle):
                    report.agreements += 1
                else:
                    message = (f"seed {seed} ({label}): decided {decided.outcome.value}, "
                               f"oracle {oracle.outcome.value}"
                               f"{f' at {oracle.witness}' if oracle.witness else ''}")
                    logger.error(message)
                    report.disagreements.append(message)
            pbar.update(1)
    logger.info(f"Differential run: {report.agreements}/{report.checks} agreements "
                f"over {report.instances} instance(s)")
    return report
