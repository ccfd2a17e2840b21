"""
Relator moves on cyclic words.

A move picks a position of a cyclically reduced word, reads a nonempty prefix s of
a closure element c = s t^-1 there, and replaces s by t. Free and cyclic reduction
follow at no cost. Every van Kampen diagram of area M for a cyclically reduced word
can be shelled by M such moves, and each move grows the word by at most L - 2 letters.
"""

from collections.abc import Iterator
from dataclasses import dataclass

from fibrecl.presentation import SymmetrizedClosure
from fibrecl.words import Word, cyclic_split, free_reduce, inverse_letters, min_rotation


def canonical(letters: tuple[int, ...]) -> tuple[int, ...]:
    """Least rotation of the cyclic reduction."""
    core, _ = cyclic_split(free_reduce(letters))
    return min_rotation(core)[0]


@dataclass(frozen=True)
class Move:
    position: int
    relator: Word
    matched: int

    def replacement(self) -> tuple[int, ...]:
        return inverse_letters(self.relator.letters[self.matched :])

    def apply(self, letters: tuple[int, ...]) -> tuple[int, ...]:
        """Linear result t.u for the rotation s.u of `letters` at `position`, freely reduced."""
        rotated = letters[self.position :] + letters[: self.position]
        return free_reduce(self.replacement() + rotated[self.matched :])


def cyclic_moves(letters: tuple[int, ...], closure: SymmetrizedClosure) -> Iterator[Move]:
    n = len(letters)
    for position in range(n):
        for relator in closure.starting_with(letters[position]):
            limit = min(len(relator), n)
            matched = 0
            while matched < limit and relator.letters[matched] == letters[(position + matched) % n]:
                matched += 1
            for k in range(1, matched + 1):
                yield Move(position, relator, k)


def successors(
    letters: tuple[int, ...], closure: SymmetrizedClosure, length_cap: int | None = None
) -> Iterator[tuple[tuple[int, ...], Move]]:
    """Canonical successor states with the move producing each, first occurrence only."""
    seen: set[tuple[int, ...]] = set()
    for move in cyclic_moves(letters, closure):
        following = canonical(move.apply(letters))
        if length_cap is not None and len(following) > length_cap:
            continue
        if following in seen:
            continue
        seen.add(following)
        yield following, move
