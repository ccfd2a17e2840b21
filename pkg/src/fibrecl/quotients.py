"""
Quotient invariants used as sound filters by the word-problem oracles:
the abelianization, small permutation quotients and, for finite groups,
a closed coset table.
"""

import itertools
import logging
from functools import cached_property

import numpy as np

from fibrecl.presentation import Presentation
from fibrecl.words import Word

logger = logging.getLogger("quotients")

SENTINEL = -1
PROJECTION_DIGITS = 6


class AbelianFilter:
    """
    Exponent-sum vectors modulo the rational span of the relator rows.
    A word whose vector leaves that span is certainly nontrivial.
    """

    def __init__(self, presentation: Presentation):
        self.rank = presentation.rank
        matrix = presentation.abelian_matrix().astype(float)
        if matrix.shape[0] == 0 or not matrix.any():
            self.relation_rank = 0
            self.complement = np.eye(self.rank)
        else:
            _, singular, vt = np.linalg.svd(matrix)
            tolerance = max(matrix.shape) * np.finfo(float).eps * singular[0]
            self.relation_rank = int((singular > tolerance).sum())
            self.complement = vt[self.relation_rank :]

    @property
    def free_rank(self) -> int:
        return self.rank - self.relation_rank

    def project(self, word: Word) -> np.ndarray:
        vector = np.array(word.exponent_sums(self.rank), dtype=float)
        return self.complement @ vector

    def certifies_nontrivial(self, word: Word) -> bool:
        if not word or self.free_rank == 0:
            return False
        return bool(np.any(np.abs(self.project(word)) > 1e-9))

    def key(self, word: Word) -> tuple[float, ...]:
        if self.free_rank == 0:
            return ()
        return tuple(round(float(x), PROJECTION_DIGITS) + 0.0 for x in self.project(word))


def _compose(first: tuple[int, ...], second: tuple[int, ...]) -> tuple[int, ...]:
    """Apply first, then second."""
    return tuple(second[p] for p in first)


def _cycle_type(perm: tuple[int, ...]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        if length:
            lengths.append(length)
    return tuple(sorted(lengths))


def _invert(perm: tuple[int, ...]) -> tuple[int, ...]:
    inverse = [0] * len(perm)
    for i, p in enumerate(perm):
        inverse[p] = i
    return tuple(inverse)


class PermutationQuotients:
    """
    Homomorphisms into small symmetric groups, found by exhaustive assignment.
    A nontrivial image certifies a nontrivial element.
    """

    def __init__(
        self,
        presentation: Presentation,
        max_degree: int = 4,
        work_cap: int = 400_000,
        keep: int = 48,
    ):
        self.presentation = presentation
        self.maps: list[list[tuple[int, ...]]] = []
        if not presentation.relators:
            return
        relator_length = sum(len(r) for r in presentation.relators)
        for degree in range(2, max_degree + 1):
            perms = list(itertools.permutations(range(degree)))
            if len(perms) ** presentation.rank * relator_length > work_cap:
                logger.debug(f"Skipping degree {degree} quotients of {presentation}: over work cap")
                break
            identity = perms[0]
            for assignment in itertools.product(perms, repeat=presentation.rank):
                if all(p == identity for p in assignment):
                    continue
                images = []
                for p in assignment:
                    images.append(p)
                    images.append(_invert(p))
                if all(self._evaluate(images, r) == identity for r in presentation.relators):
                    self.maps.append(images)
                    if len(self.maps) >= keep:
                        break
            if len(self.maps) >= keep:
                break
        logger.debug(f"Found {len(self.maps)} permutation quotients of {presentation}")

    @staticmethod
    def _evaluate(images: list[tuple[int, ...]], word: Word) -> tuple[int, ...]:
        result = tuple(range(len(images[0])))
        for code in word.letters:
            result = _compose(result, images[code])
        return result

    def certifies_nontrivial(self, word: Word) -> bool:
        for images in self.maps:
            if self._evaluate(images, word) != tuple(range(len(images[0]))):
                return True
        return False

    def key(self, word: Word) -> tuple:
        return tuple(self._evaluate(images, word) for images in self.maps)

    def cycle_types(self, word: Word) -> tuple:
        """Conjugate elements have images of the same cycle type in every quotient."""
        return tuple(_cycle_type(self._evaluate(images, word)) for images in self.maps)


class CosetTable:
    """
    Todd-Coxeter enumeration of the cosets of the trivial subgroup, with a union-find
    over coset labels. If the table closes under the coset cap the group is finite and
    the table decides the word problem.
    """

    def __init__(self, presentation: Presentation, coset_cap: int = 4000):
        self.presentation = presentation
        self.directions = 2 * presentation.rank
        self.relators: list[tuple[int, ...]] = [r.letters for r in presentation.relators]
        for i in range(presentation.rank):
            self.relators.append((2 * i, 2 * i + 1))
            self.relators.append((2 * i + 1, 2 * i))
        self.labels: list[int] = []
        self.neighbors: list[list[int]] = []
        self.table: list[list[int]] | None = None
        self.complete = bool(presentation.relators) and self._enumerate(coset_cap)
        if self.complete:
            self._compress()
            logger.info(f"Coset table for {presentation} closed with {self.order} cosets")

    @property
    def order(self) -> int | None:
        return len(self.table) if self.table is not None else None

    def _find(self, c: int) -> int:
        root = c
        while self.labels[root] != root:
            root = self.labels[root]
        while self.labels[c] != root:
            self.labels[c], c = root, self.labels[c]
        return root

    def _add_coset(self) -> int:
        c = len(self.labels)
        self.labels.append(c)
        self.neighbors.append([SENTINEL] * self.directions)
        return c

    def _unify(self, c1: int, c2: int):
        to_unify = [(c1, c2)]
        while to_unify:
            c1, c2 = to_unify.pop()
            c1, c2 = self._find(c1), self._find(c2)
            if c1 == c2:
                continue
            c1, c2 = min(c1, c2), max(c1, c2)
            self.labels[c2] = c1
            for d in range(self.directions):
                n1 = self.neighbors[c1][d]
                n2 = self.neighbors[c2][d]
                if n1 == SENTINEL:
                    self.neighbors[c1][d] = n2
                elif n2 != SENTINEL:
                    to_unify.append((n1, n2))

    def _step(self, c: int, d: int) -> int:
        c = self._find(c)
        if self.neighbors[c][d] == SENTINEL:
            self.neighbors[c][d] = self._add_coset()
        return self._find(self.neighbors[c][d])

    def _follow(self, c: int, letters: tuple[int, ...]) -> int:
        c = self._find(c)
        for d in reversed(letters):
            c = self._step(c, d)
        return c

    def _enumerate(self, coset_cap: int) -> bool:
        start = self._add_coset()
        to_visit = start
        while to_visit < len(self.labels):
            c = self._find(to_visit)
            if c == to_visit:
                for relator in self.relators:
                    self._unify(self._follow(c, relator), c)
            to_visit += 1
            if len(self.labels) > coset_cap:
                logger.debug(f"Coset enumeration of {self.presentation} passed cap {coset_cap}")
                return False
        return True

    def _compress(self):
        live = [c for c in range(len(self.labels)) if self._find(c) == c]
        lookup = {c: i for i, c in enumerate(live)}
        self.table = [
            [lookup[self._find(self.neighbors[c][d])] for d in range(self.directions)]
            for c in live
        ]

    def trace(self, word: Word) -> int:
        coset = 0
        for d in reversed(word.letters):
            coset = self.table[coset][d]
        return coset

    def is_trivial(self, word: Word) -> bool:
        return self.trace(word) == 0


class ElementInvariants:
    """Bundle of equality invariants for bucketing group elements."""

    def __init__(self, presentation: Presentation, max_degree: int = 4, coset_cap: int = 4000):
        self.presentation = presentation
        self.max_degree = max_degree
        self.coset_cap = coset_cap

    @cached_property
    def abelian(self) -> AbelianFilter:
        return AbelianFilter(self.presentation)

    @cached_property
    def quotients(self) -> PermutationQuotients:
        return PermutationQuotients(self.presentation, self.max_degree)

    @cached_property
    def cosets(self) -> CosetTable:
        return CosetTable(self.presentation, self.coset_cap)

    def certifies_nontrivial(self, word: Word) -> bool:
        return self.abelian.certifies_nontrivial(word) or self.quotients.certifies_nontrivial(word)

    def certifies_not_conjugate(self, u: Word, v: Word) -> bool:
        """Abelian images or quotient cycle types differ."""
        if self.abelian.certifies_nontrivial(u * v.inverse()):
            return True
        return self.quotients.cycle_types(u) != self.quotients.cycle_types(v)

    def key(self, word: Word) -> tuple:
        if self.cosets.complete:
            return ("coset", self.cosets.trace(word))
        return (self.abelian.key(word), self.quotients.key(word))
