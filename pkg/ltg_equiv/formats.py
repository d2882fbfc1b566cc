"""
Line-oriented text formats for transducers and domain automata.

Transducer files:

    alphabet f:2 g:1 k:0
    output a b
    axiom _ q0 _
    rule q0 f -> _ q1:2 b q2:1 _
    rule q0 g -> BOTTOM

DTA files:

    alphabet f:2 g:1 k:0        (optional when the ranks come from elsewhere)
    dta start h0
    delta h0 f -> h1 h1
    delta h1 k ->

`#` starts a comment. Words use the literal syntax of `group_core`; inside a
rule body a missing word is ε and adjacent words are concatenated.
"""
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import group_core as gc
from .errors import InvalidInputError, ParseError
from .group_core import Alphabet, GroupWord
from .tree_model import Axiom, Call, Dta, RankedAlphabet, Rule, Transducer

logger = logging.getLogger(__name__)

NAME = r"[A-Za-z_][A-Za-z0-9_@]*"
name_regex = re.compile(rf"^{NAME}$")
call_regex = re.compile(rf"^({NAME}):(\d+)$")
rank_regex = re.compile(rf"^({NAME}):(\d+)$")
rule_regex = re.compile(rf"^rule\s+({NAME})\s+({NAME})\s*->\s*(.*)$")
delta_regex = re.compile(rf"^delta\s+({NAME})\s+({NAME})\s*->\s*(.*)$")
BOTTOM = "BOTTOM"


def _lines(text: str):
    """Yield (line number, content) for non-blank lines with comments stripped."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _parse_alphabet(tokens: List[str], source: str, number: int) -> RankedAlphabet:
    ranks: Dict[str, int] = {}
    for token in tokens:
        match = rank_regex.match(token)
        if not match:
            raise ParseError("expected symbol:rank", source, number, token)
        symbol, rank = match.group(1), int(match.group(2))
        if symbol in ranks:
            raise ParseError("duplicate input symbol", source, number, token)
        ranks[symbol] = rank
    if not ranks:
        raise ParseError("empty input alphabet", source, number)
    return RankedAlphabet(ranks)


def _parse_word(token: str, output: Optional[Alphabet], source: str, number: int) -> GroupWord:
    try:
        return gc.parse_word(token, output)
    except InvalidInputError as e:
        raise ParseError(str(e), source, number, token) from None


def _parse_body(body: str, output: Alphabet, source: str,
                number: int) -> Tuple[Tuple[GroupWord, ...], Tuple[Call, ...]]:
    words: List[GroupWord] = [gc.EPSILON]
    calls: List[Call] = []
    for token in body.split():
        match = call_regex.match(token)
        if match:
            calls.append(Call(match.group(1), int(match.group(2))))
            words.append(gc.EPSILON)
        else:
            words[-1] = gc.concat(words[-1], _parse_word(token, output, source, number))
    return tuple(words), tuple(calls)


def parse_transducer(text: str, source: str = "<input>") -> Transducer:
    """
    Parse a transducer description.

    Args:
        text: file contents
        source: name used in error messages

    Returns:
        The validated transducer.

    Raises:
        ParseError: with the offending line and token.
    """
    alphabet: Optional[RankedAlphabet] = None
    output: Optional[Alphabet] = None
    axiom: Optional[Axiom] = None
    states: List[str] = []
    rules: Dict[Tuple[str, str], Rule] = {}

    for number, line in _lines(text):
        keyword, _, rest = line.partition(" ")
        tokens = rest.split()
        if keyword == "alphabet":
            alphabet = _parse_alphabet(tokens, source, number)
        elif keyword == "output":
            try:
                output = Alphabet(tuple(tokens))
            except InvalidInputError as e:
                raise ParseError(str(e), source, number) from None
        elif keyword == "axiom":
            if output is None:
                raise ParseError("'output' must precede the axiom", source, number)
            if len(tokens) == 1:
                axiom = Axiom(_parse_word(tokens[0], output, source, number))
            elif len(tokens) == 3:
                if not name_regex.match(tokens[1]):
                    raise ParseError("invalid state name", source, number, tokens[1])
                axiom = Axiom(_parse_word(tokens[0], output, source, number), tokens[1],
                              _parse_word(tokens[2], output, source, number))
            else:
                raise ParseError("axiom needs 'u0' or 'u0 q u1'", source, number)
        elif keyword == "rule":
            match = rule_regex.match(line)
            if not match:
                raise ParseError("expected 'rule q f -> body'", source, number)
            if alphabet is None or output is None:
                raise ParseError("'alphabet' and 'output' must precede rules", source, number)
            state, symbol, body = match.groups()
            if symbol not in alphabet:
                raise ParseError("unknown input symbol", source, number, symbol)
            if (state, symbol) in rules:
                raise ParseError("duplicate rule", source, number, f"{state} {symbol}")
            if state not in states:
                states.append(state)
            try:
                if body.strip() == BOTTOM:
                    rules[(state, symbol)] = Rule.bottom_rule(state, symbol)
                else:
                    words, calls = _parse_body(body, output, source, number)
                    rules[(state, symbol)] = Rule(state, symbol, words, calls)
            except InvalidInputError as e:
                raise ParseError(str(e), source, number) from None
        else:
            raise ParseError("unknown keyword", source, number, keyword)

    if alphabet is None:
        raise ParseError("missing 'alphabet' line", source)
    if output is None:
        raise ParseError("missing 'output' line", source)
    if axiom is None:
        raise ParseError("missing 'axiom' line", source)
    try:
        transducer = Transducer(alphabet, output, tuple(states), axiom, rules)
    except InvalidInputError as e:
        raise ParseError(str(e), source) from None
    logger.debug(f"Parsed {source}: {len(states)} state(s), {len(rules)} rule(s)")
    return transducer


def parse_dta(text: str, alphabet: Optional[RankedAlphabet] = None,
              source: str = "<input>") -> Dta:
    """
    Parse a DTA description. An `alphabet` line in the file wins over the argument.

    Raises:
        ParseError: with the offending line and token.
    """
    start: Optional[str] = None
    states: List[str] = []
    entries: List[Tuple[int, str, str, Tuple[str, ...]]] = []

    for number, line in _lines(text):
        keyword, _, rest = line.partition(" ")
        tokens = rest.split()
        if keyword == "alphabet":
            alphabet = _parse_alphabet(tokens, source, number)
        elif keyword == "dta":
            if len(tokens) != 2 or tokens[0] != "start" or not name_regex.match(tokens[1]):
                raise ParseError("expected 'dta start h0'", source, number)
            start = tokens[1]
            if start not in states:
                states.insert(0, start)
        elif keyword == "delta":
            match = delta_regex.match(line)
            if not match:
                raise ParseError("expected 'delta h f -> h1 ... hm'", source, number)
            h, symbol, targets = match.group(1), match.group(2), tuple(match.group(3).split())
            for name in (h,) + targets:
                if not name_regex.match(name):
                    raise ParseError("invalid state name", source, number, name)
                if name not in states:
                    states.append(name)
            entries.append((number, h, symbol, targets))
        else:
            raise ParseError("unknown keyword", source, number, keyword)

    if start is None:
        raise ParseError("missing 'dta start' line", source)
    if alphabet is None:
        raise ParseError("no alphabet line and no alphabet supplied", source)
    delta: Dict[Tuple[str, str], Tuple[str, ...]] = {}
    for number, h, symbol, targets in entries:
        if symbol not in alphabet:
            raise ParseError("unknown input symbol", source, number, symbol)
        if alphabet.rank(symbol) != len(targets):
            raise ParseError(f"symbol has rank {alphabet.rank(symbol)}", source, number, symbol)
        if (h, symbol) in delta:
            raise ParseError("duplicate transition", source, number, f"{h} {symbol}")
        delta[(h, symbol)] = targets
    return Dta(tuple(states), delta, start, alphabet)


def _read(path: Path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", str(path)) from None


def parse_transducer_file(path: Path) -> Transducer:
    return parse_transducer(_read(path), str(path))


def parse_dta_file(path: Path, alphabet: Optional[RankedAlphabet] = None) -> Dta:
    return parse_dta(_read(path), alphabet, str(path))


def _alphabet_line(alphabet: RankedAlphabet) -> str:
    return "alphabet " + " ".join(f"{symbol}:{rank}" for symbol, rank in alphabet.items())


def write_transducer(m: Transducer) -> str:
    """Serialize a transducer; the output re-parses to an equal transducer."""
    lines = [
        _alphabet_line(m.input_alphabet),
        "output " + " ".join(m.output_alphabet.generators),
    ]
    if m.axiom.state is None:
        lines.append(f"axiom {gc.concat(m.axiom.prefix, m.axiom.suffix)}")
    else:
        lines.append(f"axiom {m.axiom.prefix} {m.axiom.state} {m.axiom.suffix}")
    for rule in m.ordered_rules():
        lines.append(f"rule {rule.state} {rule.symbol} -> {rule.body()}")
    return "\n".join(lines) + "\n"


def write_dta(b: Dta) -> str:
    lines = [_alphabet_line(b.alphabet), f"dta start {b.start}"]
    for h in b.states:
        for symbol in b.alphabet:
            targets = b.transition(h, symbol)
            if targets is not None:
                lines.append(f"delta {h} {symbol} -> {' '.join(targets)}".rstrip())
    return "\n".join(lines) + "\n"
