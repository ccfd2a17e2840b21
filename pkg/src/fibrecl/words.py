"""
Words in a free group over a finite signed alphabet.

A letter packs a generator index and a sign into one small int:
2*i is the generator x_i, 2*i + 1 is its inverse. Inverting a letter flips the low bit.
"""

import logging
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

from fibrecl.utils import UnknownGeneratorError, WordSyntaxError

logger = logging.getLogger("words")

FACTOR_PATTERN = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)(?:\^(?P<exp>-?\d+))?$")
IDENTITY_TOKEN = "1"


def letter(index: int, sign: int = 1) -> int:
    return 2 * index + (0 if sign > 0 else 1)


def generator_of(code: int) -> int:
    return code >> 1


def sign_of(code: int) -> int:
    return -1 if code & 1 else 1


def inverse_letters(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(code ^ 1 for code in reversed(letters))


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for code in letters:
        if stack and stack[-1] == code ^ 1:
            stack.pop()
        else:
            stack.append(code)
    return tuple(stack)


def cyclic_split(letters: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    Split a freely reduced letter tuple u as prefix . core . prefix^-1.
    Returns (core, prefix).
    """
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == letters[j] ^ 1:
        i += 1
        j -= 1
    return letters[i : j + 1], letters[:i]


def min_rotation(letters: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Lexicographically least rotation and the offset it starts at."""
    if not letters:
        return letters, 0
    best, offset = letters, 0
    for i in range(1, len(letters)):
        candidate = letters[i:] + letters[:i]
        if candidate < best:
            best, offset = candidate, i
    return best, offset


@dataclass(frozen=True)
class Generator:
    name: str
    index: int


@dataclass(frozen=True)
class Word:
    """
    Freely reduced word. Construction always reduces; use Word.trusted() for
    letter tuples that are already reduced.
    """

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", free_reduce(self.letters))

    @classmethod
    def trusted(cls, letters: tuple[int, ...]) -> "Word":
        word = object.__new__(cls)
        object.__setattr__(word, "letters", letters)
        return word

    @classmethod
    def identity(cls) -> "Word":
        return cls.trusted(())

    @classmethod
    def of(cls, *codes: int) -> "Word":
        return cls(tuple(codes))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __lt__(self, other: "Word") -> bool:
        return (len(self.letters), self.letters) < (len(other.letters), other.letters)

    def __le__(self, other: "Word") -> bool:
        return self == other or self < other

    def __mul__(self, other: "Word") -> "Word":
        a, b = self.letters, other.letters
        overlap = 0
        limit = min(len(a), len(b))
        while overlap < limit and a[len(a) - 1 - overlap] == b[overlap] ^ 1:
            overlap += 1
        return Word.trusted(a[: len(a) - overlap] + b[overlap:])

    def inverse(self) -> "Word":
        return Word.trusted(inverse_letters(self.letters))

    def conjugate(self, by: "Word") -> "Word":
        """by^-1 . self . by"""
        return by.inverse() * self * by

    def power(self, exponent: int) -> "Word":
        if exponent == 0 or not self.letters:
            return Word.identity()
        if exponent < 0:
            return self.inverse().power(-exponent)
        core, prefix = cyclic_split(self.letters)
        return Word.trusted(prefix + core * exponent + inverse_letters(prefix))

    def cyclic_reduce(self) -> tuple["Word", "Word"]:
        """
        Returns (core, prefix) with core cyclically reduced and
        core == prefix^-1 . self . prefix.
        """
        core, prefix = cyclic_split(self.letters)
        return Word.trusted(core), Word.trusted(prefix)

    @property
    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != self.letters[-1] ^ 1

    def rotations(self) -> list["Word"]:
        n = len(self.letters)
        return [Word.trusted(self.letters[i:] + self.letters[:i]) for i in range(max(n, 1))]

    def shift(self, offset: int) -> "Word":
        """Re-index every generator by offset (embedding into a larger alphabet)."""
        return Word.trusted(tuple(code + 2 * offset for code in self.letters))

    def substitute(self, images: dict[int, "Word"]) -> "Word":
        """Apply a map generator index -> Word; unmapped generators are kept."""
        result: list[int] = []
        for code in self.letters:
            image = images.get(code >> 1)
            if image is None:
                result.append(code)
            elif code & 1:
                result.extend(inverse_letters(image.letters))
            else:
                result.extend(image.letters)
        return Word(tuple(result))

    def exponent_sums(self, size: int) -> list[int]:
        sums = [0] * size
        for code in self.letters:
            sums[code >> 1] += -1 if code & 1 else 1
        return sums

    def generators_used(self) -> set[int]:
        return {code >> 1 for code in self.letters}


def commutator(a: Word, b: Word) -> Word:
    """[a, b] = a b a^-1 b^-1"""
    return a * b * a.inverse() * b.inverse()


def enumerate_words(size: int, max_length: int, min_length: int = 0) -> Iterator[Word]:
    """All freely reduced words over `size` generators, in shortlex order."""
    layer: list[tuple[int, ...]] = [()]
    for length in range(max_length + 1):
        if length >= min_length:
            for letters in layer:
                yield Word.trusted(letters)
        if length == max_length:
            break
        layer = [
            letters + (code,)
            for letters in layer
            for code in range(2 * size)
            if not letters or letters[-1] != code ^ 1
        ]


class Alphabet:
    """
    Generator names of one presentation, with the text syntax for words:
    whitespace separated factors `gen`, `gen^-1`, `gen^k`; `1` is the identity.
    """

    def __init__(self, names: Sequence[str]):
        seen = set()
        for name in names:
            if not name.isidentifier():
                raise WordSyntaxError(f"Invalid generator name: {name!r}")
            if name in seen:
                raise WordSyntaxError(f"Duplicate generator name: {name!r}")
            seen.add(name)
        self.names: tuple[str, ...] = tuple(names)
        self.index: dict[str, int] = {name: i for i, name in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({' '.join(self.names)})"

    def generators(self) -> list[Generator]:
        return [Generator(name, i) for i, name in enumerate(self.names)]

    def generator(self, name: str) -> Word:
        if name not in self.index:
            raise UnknownGeneratorError(f"Unknown generator {name!r} in {self}")
        return Word.trusted((letter(self.index[name]),))

    def parse(self, text: str, column_offset: int = 0) -> Word:
        raw: list[int] = []
        for match in re.finditer(r"\S+", text):
            token = match.group(0)
            column = column_offset + match.start() + 1
            if token == IDENTITY_TOKEN:
                continue
            factor = FACTOR_PATTERN.match(token)
            if factor is None:
                error = WordSyntaxError(f"Malformed factor {token!r} at column {column}")
                error.column = column
                raise error
            name = factor.group("name")
            if name not in self.index:
                error = UnknownGeneratorError(f"Unknown generator {name!r} at column {column}")
                error.column = column
                raise error
            exponent = int(factor.group("exp")) if factor.group("exp") is not None else 1
            if exponent == 0:
                error = WordSyntaxError(f"Zero exponent in {token!r} at column {column}")
                error.column = column
                raise error
            code = letter(self.index[name], 1 if exponent > 0 else -1)
            raw.extend([code] * abs(exponent))
        return Word(tuple(raw))

    def format(self, word: Word) -> str:
        if not word:
            return IDENTITY_TOKEN
        factors = []
        run_code, run_length = word.letters[0], 0
        for code in word.letters + (-1,):
            if code == run_code:
                run_length += 1
                continue
            exponent = sign_of(run_code) * run_length
            name = self.names[generator_of(run_code)]
            factors.append(name if exponent == 1 else f"{name}^{exponent}")
            run_code, run_length = code, 1
        return " ".join(factors)
