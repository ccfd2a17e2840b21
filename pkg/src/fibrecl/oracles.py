"""
Word-problem oracles.

Every oracle answers Trivial, Nontrivial or Unknown. Trivial and Nontrivial are
always sound; Unknown means the oracle's budget ran out before it could decide.
"""

import logging
import threading
from abc import ABC, abstractmethod
from collections.abc import Hashable
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from fibrecl.presentation import (
    SMALL_CANCELLATION_BOUND,
    Presentation,
    direct_product_presentation,
    is_small_cancellation,
    kill_generators,
    small_cancellation_lambda,
)
from fibrecl.quotients import ElementInvariants
from fibrecl.rewriting import canonical, cyclic_moves
from fibrecl.utils import AlphabetClashError, InvalidCapsError, NotSmallCancellationError
from fibrecl.words import Word, cyclic_split, free_reduce, inverse_letters, letter

logger = logging.getLogger("oracles")


class Verdict(Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    UNKNOWN = "unknown"


class Membership(Enum):
    MEMBER = "member"
    NONMEMBER = "nonmember"
    UNKNOWN = "unknown"


class OrderKind(Enum):
    FINITE = "finite"
    INFINITE_UP_TO_BOUND = "infinite_up_to_bound"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Order:
    kind: OrderKind
    value: int | None = None

    @classmethod
    def finite(cls, k: int) -> "Order":
        return cls(OrderKind.FINITE, k)

    @classmethod
    def infinite(cls, bound: int) -> "Order":
        return cls(OrderKind.INFINITE_UP_TO_BOUND, bound)

    @classmethod
    def unknown(cls) -> "Order":
        return cls(OrderKind.UNKNOWN)

    @property
    def is_finite(self) -> bool:
        return self.kind is OrderKind.FINITE

    @property
    def is_infinite(self) -> bool:
        return self.kind is OrderKind.INFINITE_UP_TO_BOUND

    def __str__(self) -> str:
        if self.is_finite:
            return f"Finite({self.value})"
        if self.is_infinite:
            return f"InfiniteUpToBound({self.value})"
        return "Unknown"

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value}


@dataclass(frozen=True)
class OracleBudget:
    """
    radius: length cap on intermediate words of the move search
            (None: |w| + move_cap * (L - 2), the shelling bound)
    move_cap: relator applications per search
    state_cap: distinct words visited per search
    coset_cap: cosets before enumeration gives up
    quotient_degree: largest symmetric group searched for quotients
    exponent_cap: largest power tried in cyclic membership tests
    """

    radius: int | None = None
    move_cap: int = 8
    state_cap: int = 50_000
    coset_cap: int = 4000
    quotient_degree: int = 4
    exponent_cap: int = 64

    def __post_init__(self):
        for field in ("move_cap", "state_cap", "coset_cap", "quotient_degree", "exponent_cap"):
            if getattr(self, field) < 0:
                raise InvalidCapsError(f"{field} must be non-negative")
        if self.radius is not None and self.radius < 0:
            raise InvalidCapsError("radius must be non-negative")


@dataclass
class OracleStats:
    queries: int = 0
    nodes_explored: int = 0
    unknowns: int = 0
    # max Area(w)/|w| over areas certified through this oracle; an observation, not a proof
    iso_constant: Fraction = Fraction(0)

    def observe_area(self, length: int, area: int):
        if length > 0:
            self.iso_constant = max(self.iso_constant, Fraction(area, length))

    def to_dict(self) -> dict:
        return {
            "queries": self.queries,
            "nodes_explored": self.nodes_explored,
            "unknowns": self.unknowns,
            "iso_constant": str(self.iso_constant),
            "iso_constant_kind": "empirical",
        }


class WordProblemOracle(ABC):
    kind = "abstract"

    def __init__(self, presentation: Presentation, budget: OracleBudget | None = None):
        self.presentation = presentation
        self.budget = budget or OracleBudget()
        self.stats = OracleStats()
        self._lock = threading.Lock()
        self._memo: dict[tuple[int, ...], Verdict] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.presentation})"

    def query(self, word: Word) -> Verdict:
        key = canonical(word.letters)
        with self._lock:
            self.stats.queries += 1
            cached = self._memo.get(key)
        if cached is not None:
            return cached
        verdict = self._decide(Word.trusted(key))
        with self._lock:
            self._memo[key] = verdict
            if verdict is Verdict.UNKNOWN:
                self.stats.unknowns += 1
        return verdict

    @abstractmethod
    def _decide(self, word: Word) -> Verdict:
        """
        Decide a cyclically reduced word
        """
        raise NotImplementedError("This method should be overridden by child class")

    def equal(self, u: Word, v: Word) -> Verdict:
        return self.query(u * v.inverse())

    @cached_property
    def invariants(self) -> ElementInvariants:
        return ElementInvariants(
            self.presentation, self.budget.quotient_degree, self.budget.coset_cap
        )

    def signature(self, word: Word) -> Hashable:
        """
        Equal elements have equal signatures.
        """
        return self.invariants.key(word)

    def explored(self, count: int):
        with self._lock:
            self.stats.nodes_explored += count

    def observe_area(self, length: int, area: int):
        with self._lock:
            self.stats.observe_area(length, area)

    def describe(self) -> dict:
        return {
            "oracle": self.kind,
            "presentation": self.presentation.name,
            **self.stats.to_dict(),
        }


class FreeOracle(WordProblemOracle):
    kind = "free"

    def _decide(self, word: Word) -> Verdict:
        return Verdict.NONTRIVIAL if word else Verdict.TRIVIAL

    def signature(self, word: Word) -> Hashable:
        return word.letters


class DehnReducer:
    def __init__(self, presentation: Presentation):
        self.lam = small_cancellation_lambda(presentation)
        if self.lam >= SMALL_CANCELLATION_BOUND:
            msg = f"{presentation} is not C'(1/6): lambda = {self.lam}"
            logger.error(msg)
            raise NotSmallCancellationError(msg)
        logger.debug(f"Dehn reduction enabled for {presentation}: lambda = {self.lam}")
        closure = presentation.closure
        # a replaceable subword of r is longer than |r| / 2, so it starts with this many letters
        self.window = min(len(r) // 2 + 1 for r in closure)
        self.index: dict[tuple[int, ...], list[Word]] = {}
        for relator in closure:
            self.index.setdefault(relator.letters[: self.window], []).append(relator)

    def _find(self, letters: tuple[int, ...]) -> tuple[int, Word, int] | None:
        w = self.window
        for start in range(len(letters) - w + 1):
            for relator in self.index.get(letters[start : start + w], ()):
                limit = min(len(relator), len(letters) - start)
                matched = w
                while matched < limit and relator.letters[matched] == letters[start + matched]:
                    matched += 1
                if 2 * matched > len(relator):
                    return start, relator, matched
        return None

    def reduce(self, word: Word) -> tuple[Word, int]:
        """Fixed point of Dehn's algorithm and the number of replacements made."""
        letters = word.letters
        steps = 0
        while True:
            found = self._find(letters)
            if found is None:
                return Word.trusted(letters), steps
            start, relator, matched = found
            letters = free_reduce(
                letters[:start]
                + inverse_letters(relator.letters[matched:])
                + letters[start + matched :]
            )
            steps += 1


@lru_cache(maxsize=64)
def dehn_reducer(presentation: Presentation) -> DehnReducer:
    return DehnReducer(presentation)


def dehn_reduce(presentation: Presentation, word: Word) -> Word:
    return dehn_reducer(presentation).reduce(word)[0]


class DehnOracle(WordProblemOracle):
    kind = "dehn"

    def __init__(self, presentation: Presentation, budget: OracleBudget | None = None):
        super().__init__(presentation, budget)
        self.reducer = dehn_reducer(presentation)

    def _decide(self, word: Word) -> Verdict:
        reduced, steps = self.reducer.reduce(word)
        self.explored(steps)
        return Verdict.NONTRIVIAL if reduced else Verdict.TRIVIAL


class BallOracle(WordProblemOracle):
    """
    Generic oracle: quotient filters for Nontrivial, a bounded breadth-first search of
    relator moves for Trivial. A closed coset table settles finite groups outright.
    """

    kind = "ball"

    def __init__(
        self,
        presentation: Presentation,
        radius: int | None = None,
        move_cap: int | None = None,
        budget: OracleBudget | None = None,
    ):
        budget = budget or OracleBudget()
        if radius is not None:
            budget = replace(budget, radius=radius)
        if move_cap is not None:
            budget = replace(budget, move_cap=move_cap)
        super().__init__(presentation, budget)

    def _decide(self, word: Word) -> Verdict:
        if not word:
            return Verdict.TRIVIAL
        if not self.presentation.relators:
            return Verdict.NONTRIVIAL
        invariants = self.invariants
        if invariants.abelian.certifies_nontrivial(word):
            return Verdict.NONTRIVIAL
        cosets = invariants.cosets
        if cosets.complete:
            return Verdict.TRIVIAL if cosets.is_trivial(word) else Verdict.NONTRIVIAL
        if invariants.quotients.certifies_nontrivial(word):
            return Verdict.NONTRIVIAL
        return self._search(word)

    def _search(self, word: Word) -> Verdict:
        start = word.letters
        closure = self.presentation.closure
        radius = self.budget.radius
        if radius is None:
            radius = len(start) + self.budget.move_cap * max(self.presentation.L - 2, 0)
        if len(start) > radius:
            return Verdict.UNKNOWN
        seen = {start}
        frontier = [start]
        clipped = False
        explored = 0
        for _ in range(self.budget.move_cap):
            following_frontier = []
            for state in frontier:
                explored += 1
                for move in cyclic_moves(state, closure):
                    following = canonical(move.apply(state))
                    if not following:
                        self.explored(explored)
                        return Verdict.TRIVIAL
                    if len(following) > radius:
                        clipped = True
                        continue
                    if following in seen:
                        continue
                    if len(seen) >= self.budget.state_cap:
                        self.explored(explored)
                        return Verdict.UNKNOWN
                    seen.add(following)
                    following_frontier.append(following)
            frontier = following_frontier
            if not frontier:
                break
        self.explored(explored)
        if not frontier and not clipped:
            logger.debug(f"Reachable space of {len(seen)} words closed without the identity")
            return Verdict.NONTRIVIAL
        return Verdict.UNKNOWN


@dataclass(frozen=True)
class HNNStructure:
    """
    G = Gamma *_H with identity gluing: a stable letter t commuting with each associated word.
    """

    stable: int
    base: Presentation
    associated: tuple[Word, ...]
    base_index: tuple[int, ...]

    def to_base(self, letters: tuple[int, ...]) -> Word:
        return _reindex(letters, self.base_index)


def _reindex(letters: tuple[int, ...], index: tuple[int, ...]) -> Word:
    return Word.trusted(tuple(2 * index[c >> 1] + (c & 1) for c in letters))


def detect_trivial_hnn(presentation: Presentation) -> HNNStructure | None:
    """
    Look for a generator t occurring in relators only as t h t^-1 h^-1 (up to rotation and
    inversion) with h free of t. Later generators are tried first.
    """
    for t in reversed(range(presentation.rank)):
        associated: list[Word] = []
        base_relators: list[Word] = []
        for relator in presentation.relators:
            positions = [i for i, c in enumerate(relator.letters) if c >> 1 == t]
            if not positions:
                base_relators.append(relator)
                continue
            if len(positions) != 2:
                break
            if relator.letters[positions[0]] != relator.letters[positions[1]] ^ 1:
                break
            plus = positions[0] if relator.letters[positions[0]] == letter(t) else positions[1]
            rotated = relator.letters[plus:] + relator.letters[:plus]
            j = next(i for i in range(1, len(rotated)) if rotated[i] >> 1 == t)
            h, rest = rotated[1:j], rotated[j + 1 :]
            if not h or rest != inverse_letters(h):
                break
            associated.append(h)
        else:
            base_index = [0] * presentation.rank
            kept = [i for i in range(presentation.rank) if i != t]
            for new, old in enumerate(kept):
                base_index[old] = new
            index = tuple(base_index)
            base = Presentation(
                [presentation.generators[i] for i in kept],
                [_reindex(r.letters, index) for r in base_relators],
                f"{presentation.name or 'G'} base",
            )
            associated_words = tuple(_reindex(h, index) for h in associated)
            logger.debug(
                f"{presentation} is a trivial HNN extension with stable letter "
                f"{presentation.generators[t]} over {base}"
            )
            return HNNStructure(t, base, associated_words, index)
    return None


class BrittonOracle(WordProblemOracle):
    """
    Britton's lemma for trivial HNN extensions: pinch t^e g t^-e whenever g lies in the
    associated subgroup, recursing into an oracle for the base.
    """

    kind = "britton"

    def __init__(
        self,
        presentation: Presentation,
        budget: OracleBudget | None = None,
        structure: HNNStructure | None = None,
    ):
        super().__init__(presentation, budget)
        self.structure = structure or detect_trivial_hnn(presentation)
        if self.structure is None:
            raise ValueError(f"{presentation} is not a recognizable trivial HNN extension")
        self.base_oracle = oracle_for(self.structure.base, self.budget)
        self.base_is_free = not self.structure.base.relators

    def membership(self, g: Word) -> Membership:
        """Is the base word g in the subgroup generated by the associated words?"""
        if not g:
            return Membership.MEMBER
        verdict = self.base_oracle.query(g)
        if verdict is Verdict.TRIVIAL:
            return Membership.MEMBER
        associated = self.structure.associated
        if not associated:
            return Membership.NONMEMBER if verdict is Verdict.NONTRIVIAL else Membership.UNKNOWN
        if len(associated) == 1:
            return self._cyclic_membership(g, associated[0])
        if self.base_is_free and all(len(h) == 1 for h in associated):
            allowed = {h.letters[0] >> 1 for h in associated}
            return Membership.MEMBER if g.generators_used() <= allowed else Membership.NONMEMBER
        return self._abelian_exclusion(g)

    def _cyclic_membership(self, g: Word, h: Word) -> Membership:
        if self.base_is_free:
            core, _ = cyclic_split(h.letters)
            bound = len(g) // len(core)
            for k in range(1, bound + 1):
                if h.power(k) == g or h.power(-k) == g:
                    return Membership.MEMBER
            return Membership.NONMEMBER
        abelian = self.base_oracle.invariants.abelian
        pg, ph = abelian.project(g), abelian.project(h)
        if np.any(np.abs(ph) > 1e-9):
            pivot = int(np.argmax(np.abs(ph)))
            ratio = pg[pivot] / ph[pivot]
            k = round(ratio)
            if abs(ratio - k) > 1e-9 or np.any(np.abs(pg - k * ph) > 1e-9):
                return Membership.NONMEMBER
            verdict = self.base_oracle.equal(g, h.power(k))
            if verdict is Verdict.UNKNOWN:
                return Membership.UNKNOWN
            return Membership.MEMBER if verdict is Verdict.TRIVIAL else Membership.NONMEMBER
        for k in range(1, self.budget.exponent_cap + 1):
            for exponent in (k, -k):
                if self.base_oracle.equal(g, h.power(exponent)) is Verdict.TRIVIAL:
                    return Membership.MEMBER
        return Membership.UNKNOWN

    def _abelian_exclusion(self, g: Word) -> Membership:
        abelian = self.base_oracle.invariants.abelian
        span = np.array([abelian.project(h) for h in self.structure.associated])
        if span.size == 0 or abelian.free_rank == 0:
            return Membership.UNKNOWN
        extended = np.vstack([span, abelian.project(g)])
        if np.linalg.matrix_rank(extended) > np.linalg.matrix_rank(span):
            return Membership.NONMEMBER
        return Membership.UNKNOWN

    def _decide(self, word: Word) -> Verdict:
        t = self.structure.stable
        letters = word.letters
        while True:
            positions = [i for i, c in enumerate(letters) if c >> 1 == t]
            if not positions:
                return self.base_oracle.query(self.structure.to_base(letters))
            undecided = False
            for a, b in zip(positions, positions[1:]):
                if letters[a] != letters[b] ^ 1:
                    continue
                found = self.membership(self.structure.to_base(letters[a + 1 : b]))
                if found is Membership.MEMBER:
                    self.explored(1)
                    letters = free_reduce(letters[:a] + letters[a + 1 : b] + letters[b + 1 :])
                    break
                if found is Membership.UNKNOWN:
                    undecided = True
            else:
                return Verdict.UNKNOWN if undecided else Verdict.NONTRIVIAL


class TietzeOracle(WordProblemOracle):
    """
    Generators killed by single-letter relators are deleted from the word, and an oracle
    for the smaller presentation decides the rest.
    """

    kind = "tietze"

    def __init__(self, presentation: Presentation, budget: OracleBudget | None = None):
        super().__init__(presentation, budget)
        killed = sorted({r.letters[0] >> 1 for r in presentation.relators if len(r) == 1})
        self.killed = frozenset(killed)
        self.reduced = kill_generators(presentation, [presentation.generators[i] for i in killed])
        index = [0] * presentation.rank
        kept = [i for i in range(presentation.rank) if i not in self.killed]
        for new, old in enumerate(kept):
            index[old] = new
        self.index = tuple(index)
        self.inner = oracle_for(self.reduced, self.budget)

    def image(self, word: Word) -> Word:
        kept = (c for c in word if c >> 1 not in self.killed)
        return Word(tuple(2 * self.index[c >> 1] + (c & 1) for c in kept))

    def _decide(self, word: Word) -> Verdict:
        return self.inner.query(self.image(word))

    def signature(self, word: Word) -> Hashable:
        return self.inner.signature(self.image(word))

    def describe(self) -> dict:
        info = super().describe()
        info["inner"] = self.inner.describe()
        return info


class ProductOracle(WordProblemOracle):
    """
    Oracle for G1 x G2 over the alphabet X1 followed by X2; words are projected to each factor.
    """

    kind = "product"

    def __init__(
        self,
        first: WordProblemOracle,
        second: WordProblemOracle,
        allow_rename: bool = False,
    ):
        clash = set(first.presentation.generators) & set(second.presentation.generators)
        if clash and not allow_rename:
            msg = f"Generator names {sorted(clash)} occur in both factors"
            logger.error(msg)
            raise AlphabetClashError(msg)
        super().__init__(
            direct_product_presentation(first.presentation, second.presentation), first.budget
        )
        self.first = first
        self.second = second
        self.offset = first.presentation.rank

    @classmethod
    def square(cls, oracle: WordProblemOracle) -> "ProductOracle":
        """G x G, the second copy renamed with a suffix."""
        return cls(oracle, oracle, allow_rename=True)

    def project(self, word: Word) -> tuple[Word, Word]:
        boundary = 2 * self.offset
        left = tuple(c for c in word.letters if c < boundary)
        right = tuple(c - boundary for c in word.letters if c >= boundary)
        return Word(left), Word(right)

    def _decide(self, word: Word) -> Verdict:
        left, right = self.project(word)
        verdicts = (self.first.query(left), self.second.query(right))
        if all(v is Verdict.TRIVIAL for v in verdicts):
            return Verdict.TRIVIAL
        if Verdict.NONTRIVIAL in verdicts:
            return Verdict.NONTRIVIAL
        return Verdict.UNKNOWN

    def signature(self, word: Word) -> Hashable:
        left, right = self.project(word)
        return (self.first.signature(left), self.second.signature(right))

    def describe(self) -> dict:
        info = super().describe()
        info["factors"] = [self.first.describe(), self.second.describe()]
        return info


def ball_oracle(presentation: Presentation, radius: int | None, move_cap: int) -> BallOracle:
    if (radius is not None and radius < 0) or move_cap < 0:
        raise InvalidCapsError("radius and move_cap must be non-negative")
    return BallOracle(presentation, radius, move_cap)


def product_oracle(first: WordProblemOracle, second: WordProblemOracle) -> ProductOracle:
    return ProductOracle(first, second)


def order_of(word: Word, oracle: WordProblemOracle, cutoff: int) -> Order:
    """
    Least k <= cutoff with word^k certified trivial. Any Unknown power makes the answer Unknown,
    since a smaller power might have been trivial.
    """
    if cutoff < 1:
        raise InvalidCapsError("cutoff must be at least 1")
    if not word:
        return Order.finite(1)
    undecided = False
    for k in range(1, cutoff + 1):
        verdict = oracle.query(word.power(k))
        if verdict is Verdict.TRIVIAL:
            return Order.unknown() if undecided else Order.finite(k)
        if verdict is Verdict.UNKNOWN:
            undecided = True
    return Order.unknown() if undecided else Order.infinite(cutoff)


def oracle_for(
    presentation: Presentation, budget: OracleBudget | None = None
) -> WordProblemOracle:
    """
    Strongest applicable oracle, tried in order: free reduction, deletion of generators
    killed by single-letter relators, Dehn's algorithm, Britton's lemma for trivial HNN
    extensions, the generic ball search.
    """
    if not presentation.relators:
        oracle = FreeOracle(presentation, budget)
    elif any(len(r) == 1 for r in presentation.relators):
        oracle = TietzeOracle(presentation, budget)
    elif is_small_cancellation(presentation):
        oracle = DehnOracle(presentation, budget)
    else:
        structure = detect_trivial_hnn(presentation)
        if structure is not None:
            oracle = BrittonOracle(presentation, budget, structure)
        else:
            oracle = BallOracle(presentation, budget=budget)
    logger.info(f"Using {oracle.kind} oracle for {presentation}")
    return oracle
