"""
Exact arithmetic in the free group over a finite alphabet.

Elements are reduced words: tuples of signed letters with no adjacent
mutually inverse pair. All values are immutable and all functions pure.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

from .errors import GroupDomainError, InvalidInputError

logger = logging.getLogger(__name__)

EMPTY_TOKEN = "_"
INVERSE_MARK = "-"


class SignedLetter(NamedTuple):
    """A generator or its formal inverse."""
    gen: str
    positive: bool = True

    def inverse(self) -> "SignedLetter":
        return SignedLetter(self.gen, not self.positive)

    def cancels(self, other: "SignedLetter") -> bool:
        return self.gen == other.gen and self.positive != other.positive

    def __str__(self) -> str:
        return self.gen if self.positive else self.gen + INVERSE_MARK


def letter_key(letter: SignedLetter) -> Tuple[int, str]:
    """Sign-then-symbol order: positive letters sort before inverses."""
    return (0 if letter.positive else 1, letter.gen)


@dataclass(frozen=True)
class Alphabet:
    """Declared, ordered set of single-letter generators."""
    generators: Tuple[str, ...]

    def __post_init__(self):
        for gen in self.generators:
            if len(gen) != 1 or not gen.isascii() or not gen.isalpha():
                raise InvalidInputError(f"Generator must be one ASCII letter: {gen!r}")
        if len(set(self.generators)) != len(self.generators):
            raise InvalidInputError(f"Duplicate generators in {self.generators}")

    def __contains__(self, gen: object) -> bool:
        return gen in self.generators

    def __iter__(self):
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    def validate(self, letters: Iterable[SignedLetter]) -> None:
        for letter in letters:
            if letter.gen not in self.generators:
                raise InvalidInputError(
                    f"Letter {letter} is outside the alphabet {' '.join(self.generators)}"
                )


@dataclass(frozen=True)
class GroupWord:
    """A reduced word; the empty tuple is the neutral element ε."""
    letters: Tuple[SignedLetter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, index):
        return self.letters[index]

    def __str__(self) -> str:
        if not self.letters:
            return EMPTY_TOKEN
        return "".join(str(letter) for letter in self.letters)

    def __repr__(self) -> str:
        return f"GroupWord({str(self)!r})"

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return concat(self, other)

    def __invert__(self) -> "GroupWord":
        return invert(self)

    def __pow__(self, exponent: int) -> "GroupWord":
        return power(self, exponent)


EPSILON = GroupWord()


def word_key(word: GroupWord) -> Tuple[Tuple[int, str], ...]:
    return tuple(letter_key(letter) for letter in word.letters)


def is_reduced(letters: Sequence[SignedLetter]) -> bool:
    return all(not letters[i].cancels(letters[i + 1]) for i in range(len(letters) - 1))


def reduce(raw: Iterable[SignedLetter], alphabet: Optional[Alphabet] = None) -> GroupWord:
    """
    Reduce a sequence of signed letters with a single left-to-right stack pass.

    Args:
        raw: letters, possibly containing cancelling pairs
        alphabet: when given, every letter is validated against it

    Returns:
        The unique reduced word equal to the input in the free group.
    """
    stack = []
    for letter in raw:
        if alphabet is not None and letter.gen not in alphabet:
            raise InvalidInputError(
                f"Letter {letter} is outside the alphabet {' '.join(alphabet.generators)}"
            )
        if stack and stack[-1].cancels(letter):
            stack.pop()
        else:
            stack.append(letter)
    return GroupWord(tuple(stack))


def concat(w1: GroupWord, w2: GroupWord) -> GroupWord:
    """Product of two reduced words: cancel the maximal inverse overlap, then join."""
    left, right = w1.letters, w2.letters
    k = 0
    limit = min(len(left), len(right))
    while k < limit and left[len(left) - 1 - k].cancels(right[k]):
        k += 1
    if k == 0:
        if not left:
            return w2
        if not right:
            return w1
    return GroupWord(left[:len(left) - k] + right[k:])


def concat_all(words: Iterable[GroupWord]) -> GroupWord:
    result = EPSILON
    for word in words:
        result = concat(result, word)
    return result


def invert(w: GroupWord) -> GroupWord:
    return GroupWord(tuple(letter.inverse() for letter in reversed(w.letters)))


def power(w: GroupWord, exponent: int) -> GroupWord:
    """w^k for any integer k (square-and-multiply)."""
    if exponent < 0:
        return power(invert(w), -exponent)
    result = EPSILON
    base = w
    while exponent:
        if exponent & 1:
            result = concat(result, base)
        exponent >>= 1
        if exponent:
            base = concat(base, base)
    return result


def conjugate(w: GroupWord, by: GroupWord) -> GroupWord:
    """by · w · by⁻"""
    return concat(concat(by, w), invert(by))


def cyclic_reduce(w: GroupWord) -> Tuple[GroupWord, GroupWord]:
    """
    Split w as r⁻ · s · r with s cyclically reduced and r maximal.

    Returns:
        The pair (r, s).
    """
    letters = w.letters
    n = len(letters)
    k = 0
    while k < n - 1 - k and letters[k].cancels(letters[n - 1 - k]):
        k += 1
    return GroupWord(letters[n - k:]), GroupWord(letters[k:n - k])


def _string_period(letters: Sequence[SignedLetter]) -> int:
    """Smallest period of the sequence via the KMP failure function."""
    n = len(letters)
    failure = [0] * (n + 1)
    failure[0] = -1
    k = -1
    for i in range(n):
        while k >= 0 and letters[k] != letters[i]:
            k = failure[k]
        k += 1
        failure[i + 1] = k
    return n - failure[n]


def primitive_root(w: GroupWord) -> GroupWord:
    """
    The primitive element p with w = p^k for some k >= 1.

    Raises:
        GroupDomainError: if w is the neutral element.
    """
    if w.is_identity:
        raise GroupDomainError("The neutral element has no primitive root")
    r, s = cyclic_reduce(w)
    period = _string_period(s.letters)
    if len(s) % period == 0:
        s = GroupWord(s.letters[:period])
    return concat(concat(invert(r), s), r)


def solve_power(w: GroupWord, p: GroupWord) -> Optional[int]:
    """
    The exponent k with w = p^k, or None when w is not a power of p.

    Raises:
        GroupDomainError: if p is the neutral element.
    """
    if p.is_identity:
        raise GroupDomainError("Powers of the neutral element are not unique")
    if w.is_identity:
        return 0
    r, s = cyclic_reduce(p)
    # r w r⁻ must be s^k, which is a plain repetition since s is cyclically reduced
    core = conjugate(w, r)
    if len(core) % len(s):
        return None
    k = len(core) // len(s)
    if core.letters == s.letters * k:
        return k
    if core.letters == invert(s).letters * k:
        return -k
    return None


def in_cyclic_subgroup(w: GroupWord, p: GroupWord) -> bool:
    return solve_power(w, p) is not None


@dataclass(frozen=True)
class Coset:
    """The left coset rep·⟨period⟩ in canonical form."""
    rep: GroupWord
    period: GroupWord

    def contains(self, g: GroupWord) -> bool:
        return in_cyclic_subgroup(concat(invert(self.rep), g), self.period)

    def __str__(self) -> str:
        return f"{self.rep}<{self.period}>"


def canonical_period(p: GroupWord) -> GroupWord:
    """Primitive root of p, oriented as the smaller of root and inverse root."""
    root = primitive_root(p)
    flipped = invert(root)
    return flipped if word_key(flipped) < word_key(root) else root


def canonical_coset(g: GroupWord, p: GroupWord) -> Coset:
    """
    Canonical description of the coset g·⟨p⟩.

    The period is the oriented primitive root of p; the representative is the
    shortest word of the form g·period^k, ties broken by sign-then-symbol order.

    Raises:
        GroupDomainError: if p is the neutral element.
    """
    if p.is_identity:
        raise GroupDomainError("A coset needs a non-trivial period")
    period = canonical_period(p)
    r, core = cyclic_reduce(period)
    # |g·p^k| >= |k|·|core| - |g| - 2|r|, and only candidates no longer than g matter
    bound = (2 * len(g) + 2 * len(r)) // len(core) + 1
    candidate = concat(g, power(period, -bound))
    best = candidate
    for _ in range(2 * bound):
        candidate = concat(candidate, period)
        if (len(candidate), word_key(candidate)) < (len(best), word_key(best)):
            best = candidate
    return Coset(best, period)


def parse_word(token: str, alphabet: Optional[Alphabet] = None) -> GroupWord:
    """
    Parse the word literal syntax: `ab-c` is a·b⁻·c and `_` is ε.

    The parsed letters are reduced, so `aa-` denotes ε.
    """
    if token == EMPTY_TOKEN:
        return EPSILON
    if not token:
        raise InvalidInputError("Empty word literal; use '_' for the neutral element")
    letters = []
    i = 0
    while i < len(token):
        char = token[i]
        if not (char.isascii() and char.isalpha()):
            raise InvalidInputError(f"Unexpected character {char!r} in word {token!r}")
        positive = True
        if i + 1 < len(token) and token[i + 1] == INVERSE_MARK:
            positive = False
            i += 1
        letters.append(SignedLetter(char, positive))
        i += 1
    return reduce(letters, alphabet)
