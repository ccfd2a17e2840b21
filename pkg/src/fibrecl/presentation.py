"""
Finite presentations <X | R>, their symmetrized closures and combinators.

File format (UTF-8):

    # comment
    name: Z2            (optional)
    gens: x y
    rel: x y x^-1 y^-1  (zero or more)
"""

import logging
from collections.abc import Iterable, Sequence
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from fibrecl.utils import (
    EmptyRelatorError,
    FibreclError,
    NoRelatorsError,
    PresentationSyntaxError,
    UnknownGeneratorError,
)
from fibrecl.words import Alphabet, Word, commutator, letter

logger = logging.getLogger("presentation")

SMALL_CANCELLATION_BOUND = Fraction(1, 6)


class Presentation:
    def __init__(
        self, generators: Sequence[str], relators: Iterable[Word], name: str | None = None
    ):
        self.alphabet = Alphabet(generators)
        self.name = name
        size = len(self.alphabet)
        normalized: list[Word] = []
        seen: set[Word] = set()
        for relator in relators:
            if any(code >> 1 >= size for code in relator):
                raise UnknownGeneratorError(f"Relator uses a generator outside {self.alphabet}")
            core, _ = relator.cyclic_reduce()
            if not core:
                raise EmptyRelatorError("Relator is empty after reduction")
            if core in seen:
                continue
            seen.add(core)
            normalized.append(core)
        self.relators: tuple[Word, ...] = tuple(normalized)

    def __repr__(self) -> str:
        label = f"{self.name}: " if self.name else ""
        counts = f"{len(self.alphabet)} gens, {len(self.relators)} rels"
        return f"Presentation({label}{counts}, L={self.L})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Presentation)
            and self.alphabet == other.alphabet
            and self.relators == other.relators
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.relators))

    @property
    def generators(self) -> tuple[str, ...]:
        return self.alphabet.names

    @property
    def rank(self) -> int:
        return len(self.alphabet)

    @property
    def L(self) -> int:
        return max((len(r) for r in self.relators), default=0)

    @cached_property
    def closure(self) -> "SymmetrizedClosure":
        return symmetrize(self)

    def word(self, text: str) -> Word:
        return self.alphabet.parse(text)

    def format(self, word: Word) -> str:
        return self.alphabet.format(word)

    def abelian_matrix(self) -> np.ndarray:
        """Relator exponent-sum matrix, one row per relator."""
        rows = [r.exponent_sums(self.rank) for r in self.relators]
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.rank)

    def with_relators(self, extra: Iterable[Word], name: str | None = None) -> "Presentation":
        return Presentation(self.generators, list(self.relators) + list(extra), name or self.name)

    def permuted(self, order: Sequence[int]) -> "Presentation":
        """Same group with generators listed in the given order of old indices."""
        images = {old: Word.trusted((letter(new),)) for new, old in enumerate(order)}
        names = [self.generators[old] for old in order]
        return Presentation(names, [r.substitute(images) for r in self.relators], self.name)

    @classmethod
    def from_text(cls, text: str, name: str | None = None) -> "Presentation":
        return parse_presentation(text, name)

    @classmethod
    def from_file(cls, path: Path) -> "Presentation":
        path = Path(path)
        presentation = parse_presentation(path.read_text(encoding="utf-8"))
        if presentation.name is None:
            presentation.name = path.stem
        logger.debug(f"Loaded {presentation} from {path}")
        return presentation

    def to_file(self, path: Path):
        Path(path).write_text(serialize_presentation(self), encoding="utf-8")


def parse_presentation(text: str, name: str | None = None) -> Presentation:
    alphabet: Alphabet | None = None
    relator_texts: list[tuple[int, int, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        key, sep, rest = line.partition(":")
        indent = len(key) - len(key.lstrip())
        key = key.strip()
        if not sep:
            raise PresentationSyntaxError("expected 'key: value'", number, indent + 1)
        value_column = len(key) + indent + 2
        if key == "name":
            name = rest.strip() or name
        elif key == "gens":
            if alphabet is not None:
                raise PresentationSyntaxError("duplicate 'gens' line", number, indent + 1)
            try:
                alphabet = Alphabet(rest.split())
            except FibreclError as e:
                raise PresentationSyntaxError(str(e), number, value_column) from e
        elif key == "rel":
            if alphabet is None:
                raise PresentationSyntaxError("'rel' before 'gens'", number, indent + 1)
            relator_texts.append((number, value_column, rest))
        else:
            raise PresentationSyntaxError(f"unknown key {key!r}", number, indent + 1)
    if alphabet is None:
        raise PresentationSyntaxError("missing 'gens' line", 1, 1)

    relators: list[Word] = []
    for number, column, body in relator_texts:
        try:
            relator = alphabet.parse(body, column_offset=column - 1)
        except UnknownGeneratorError as e:
            raise UnknownGeneratorError(f"line {number}: {e}") from e
        except FibreclError as e:
            raise PresentationSyntaxError(str(e), number, getattr(e, "column", column)) from e
        if not relator.cyclic_reduce()[0]:
            raise EmptyRelatorError(f"line {number}: relator is empty after reduction")
        relators.append(relator)
    return Presentation(alphabet.names, relators, name)


def serialize_presentation(presentation: Presentation) -> str:
    lines = []
    if presentation.name:
        lines.append(f"name: {presentation.name}")
    lines.append("gens: " + " ".join(presentation.generators))
    lines.extend(f"rel: {presentation.format(r)}" for r in presentation.relators)
    return "\n".join(lines) + "\n"


class SymmetrizedClosure:
    """All cyclic conjugates of the relators and their inverses, deduplicated."""

    def __init__(self, words: Iterable[Word]):
        elements: set[Word] = set()
        for word in words:
            core, _ = word.cyclic_reduce()
            if not core:
                continue
            for rotation in core.rotations():
                elements.add(rotation)
                elements.add(rotation.inverse())
        self.words: tuple[Word, ...] = tuple(sorted(elements))
        self._members = frozenset(elements)
        self._by_first: dict[int, list[Word]] = {}
        for word in self.words:
            self._by_first.setdefault(word.letters[0], []).append(word)

    def __contains__(self, word: Word) -> bool:
        return word in self._members

    def __iter__(self):
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymmetrizedClosure) and self._members == other._members

    def __hash__(self) -> int:
        return hash(self._members)

    def starting_with(self, code: int) -> list[Word]:
        return self._by_first.get(code, [])

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.words), default=0)


def symmetrize(source: "Presentation | Iterable[Word]") -> SymmetrizedClosure:
    if isinstance(source, Presentation):
        return SymmetrizedClosure(source.relators)
    return SymmetrizedClosure(source)


def _common_prefix(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def small_cancellation_lambda(presentation: Presentation) -> Fraction:
    """
    Largest |p|/|r| over pieces p of closure elements r, where a piece is a common
    prefix of two distinct closure elements. C'(1/6) iff the value is < 1/6.
    """
    if not presentation.relators:
        raise NoRelatorsError(f"{presentation} has no relators")
    ordered = sorted(w.letters for w in presentation.closure)
    best = Fraction(0)
    for i, current in enumerate(ordered):
        longest = 0
        if i > 0:
            longest = _common_prefix(current, ordered[i - 1])
        if i + 1 < len(ordered):
            longest = max(longest, _common_prefix(current, ordered[i + 1]))
        best = max(best, Fraction(longest, len(current)))
    return best


def pieces(closure: SymmetrizedClosure) -> list[tuple[Word, Word, Word]]:
    """Brute-force maximal pieces: (piece, r1, r2) for every ordered pair r1 != r2."""
    found = []
    for r1 in closure:
        for r2 in closure:
            if r1 == r2:
                continue
            length = _common_prefix(r1.letters, r2.letters)
            if length:
                found.append((Word.trusted(r1.letters[:length]), r1, r2))
    return found


def piece_ratio_bruteforce(closure: SymmetrizedClosure) -> Fraction:
    return max((Fraction(len(p), len(r1)) for p, r1, _ in pieces(closure)), default=Fraction(0))


def is_small_cancellation(
    presentation: Presentation, bound: Fraction = SMALL_CANCELLATION_BOUND
) -> bool:
    return bool(presentation.relators) and small_cancellation_lambda(presentation) < bound


def fresh_name(name: str, taken: set[str]) -> str:
    candidate = name
    while candidate in taken:
        candidate = f"{candidate}_2"
    return candidate


def direct_product_presentation(first: Presentation, second: Presentation) -> Presentation:
    """
    <X1, X2 | R1, R2, [x1, x2]>. Generators of `second` follow those of `first`,
    renamed with a `_2` suffix on clash; its letters are shifted by rank(first).
    """
    taken = set(first.generators)
    second_names = []
    for name in second.generators:
        fresh = fresh_name(name, taken)
        taken.add(fresh)
        second_names.append(fresh)
    offset = first.rank
    relators = list(first.relators)
    relators.extend(r.shift(offset) for r in second.relators)
    for i in range(first.rank):
        for j in range(second.rank):
            left, right = Word.trusted((letter(i),)), Word.trusted((letter(offset + j),))
            relators.append(commutator(left, right))
    name = None
    if first.name or second.name:
        name = f"{first.name or 'G1'} x {second.name or 'G2'}"
    return Presentation(list(first.generators) + second_names, relators, name)


def kill_generators(presentation: Presentation, names: Iterable[str]) -> Presentation:
    """Quotient by the named generators: delete them and drop relators that become trivial."""
    names = list(names)
    killed = {presentation.alphabet.index[n] for n in names if n in presentation.alphabet.index}
    unknown = [n for n in names if n not in presentation.alphabet.index]
    if unknown:
        raise UnknownGeneratorError(f"Unknown generators {unknown} in {presentation}")
    kept = [i for i in range(presentation.rank) if i not in killed]
    images = {i: Word.identity() for i in killed}
    images.update({old: Word.trusted((letter(new),)) for new, old in enumerate(kept)})
    relators = []
    for relator in presentation.relators:
        image, _ = relator.substitute(images).cyclic_reduce()
        if image:
            relators.append(image)
    return Presentation([presentation.generators[i] for i in kept], relators, presentation.name)
