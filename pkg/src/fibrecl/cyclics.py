"""
Geometry of cyclic subgroups: Cayley balls, geodesic lengths, translation numbers,
uniformly quasigeodesic / monotone cyclics estimates and primitive roots.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import networkx as nx

from fibrecl.oracles import FreeOracle, Verdict, WordProblemOracle
from fibrecl.utils import InvalidCapsError, RootNotFoundError
from fibrecl.words import Word, letter

logger = logging.getLogger("cyclics")


class BallIndex:
    """
    Ball of the Cayley graph around the identity, built breadth first. Candidates are
    bucketed by oracle signature and deduplicated by oracle equality, so representatives
    are shortlex-least geodesic words. `certified_radius` is the largest radius up to
    which the ball is known to be exact.

    By default the generating set is the presentation's alphabet. Other generating sets
    are given as words in that alphabet; `spelling()` then returns geodesics over them.
    """

    def __init__(
        self,
        oracle: WordProblemOracle,
        radius: int,
        element_cap: int = 20_000,
        generators: Sequence[Word] | None = None,
        labels: Sequence[str] | None = None,
    ):
        if radius < 0 or element_cap < 1:
            raise InvalidCapsError("radius must be non-negative and element_cap positive")
        self.oracle = oracle
        self.presentation = oracle.presentation
        self.radius = radius
        self.element_cap = element_cap
        self.letter_steps = generators is None
        if generators is None:
            generators = [Word.trusted((letter(i),)) for i in range(self.presentation.rank)]
            labels = list(self.presentation.generators)
        elif labels is None:
            labels = [f"g{i}" for i in range(len(generators))]
        self.steps: list[Word] = []
        self.step_labels: list[str] = []
        for generator, label in zip(generators, labels):
            self.steps.extend([generator, generator.inverse()])
            self.step_labels.extend([label, f"{label}^-1"])
        self.elements: list[Word] = []
        self.lengths: list[int] = []
        self.spellings: list[tuple[int, ...]] = []
        self.graph = nx.DiGraph()
        self.unknown_comparisons = 0
        self.truncated = False
        self.certified_radius = 0
        self._buckets: dict = {}
        self._build()

    @property
    def complete(self) -> bool:
        return self.certified_radius == self.radius

    @property
    def dedup_method(self) -> str:
        return f"{self.oracle.kind} oracle signature + equality"

    def __len__(self) -> int:
        return len(self.elements)

    def _add(self, word: Word, length: int, spelling: tuple[int, ...]) -> int:
        index = len(self.elements)
        self.elements.append(word)
        self.lengths.append(length)
        self.spellings.append(spelling)
        self._buckets.setdefault(self.oracle.signature(word), []).append(index)
        self.graph.add_node(index, word=self.presentation.format(word), length=length)
        return index

    def _match(self, word: Word) -> tuple[int | None, bool]:
        """Index of an element equal to word, and whether every comparison was decided."""
        decided = True
        for index in self._buckets.get(self.oracle.signature(word), ()):
            verdict = self.oracle.equal(word, self.elements[index])
            if verdict is Verdict.TRIVIAL:
                return index, decided
            if verdict is Verdict.UNKNOWN:
                decided = False
        return None, decided

    def _build(self):
        self._add(Word.identity(), 0, ())
        layer = [0]
        certified = True
        for length in range(1, self.radius + 1):
            following_layer = []
            exact = True
            for source in layer:
                spelled = self.spellings[source]
                for code, step in enumerate(self.steps):
                    if spelled and spelled[-1] == code ^ 1:
                        continue
                    candidate = self.elements[source] * step
                    if self.letter_steps and len(candidate) < length:
                        continue
                    found, decided = self._match(candidate)
                    if not decided:
                        self.unknown_comparisons += 1
                        exact = False
                    if found is None:
                        if len(self.elements) >= self.element_cap:
                            self.truncated = True
                            logger.warning(
                                f"Ball of {self.presentation} truncated at {self.element_cap} "
                                f"elements in layer {length}"
                            )
                            return
                        found = self._add(candidate, length, spelled + (code,))
                        following_layer.append(found)
                    self.graph.add_edge(source, found, label=self.step_labels[code])
            certified = certified and exact
            if certified:
                self.certified_radius = length
            layer = following_layer
            if not layer:
                if certified:
                    self.certified_radius = self.radius
                break
        logger.debug(
            f"Ball of radius {self.radius} in {self.presentation}: {len(self.elements)} elements, "
            f"certified to {self.certified_radius}"
        )

    def find(self, word: Word) -> int | None:
        found, _ = self._match(word)
        return found

    def spelling(self, index: int) -> Word:
        """Geodesic representative over the generating set, as a word in its step codes."""
        return Word.trusted(self.spellings[index])

    def write_graphml(self, path: Path):
        nx.write_graphml(self.graph, path, named_key_ids=True)


@lru_cache(maxsize=32)
def ball_for(oracle: WordProblemOracle, radius: int, element_cap: int = 20_000) -> BallIndex:
    return BallIndex(oracle, radius, element_cap)


def geodesic_length(
    word: Word, ball: BallIndex, oracle: WordProblemOracle | None = None
) -> int | None:
    """
    Certified word-metric length, or None (Unknown) when the ball cannot certify it.
    Free reduction is geodesic in a free group.
    """
    oracle = oracle or ball.oracle
    if isinstance(oracle, FreeOracle):
        return len(word)
    if not word:
        return 0
    found = ball.find(word)
    if found is not None and ball.lengths[found] <= ball.certified_radius:
        return ball.lengths[found]
    return None


@dataclass
class CyclicGeometryReport:
    kind: str
    value: Fraction | None
    witness: dict | None = None
    torsion_witness: dict | None = None
    uncertified: int = 0
    radius: int = 0
    power_cap: int = 0
    ball_complete: bool = True
    samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "report": self.kind,
            "value": None if self.value is None else str(self.value),
            "value_float": None if self.value is None else float(self.value),
            "witness": self.witness,
            "torsion_witness": self.torsion_witness,
            "uncertified": self.uncertified,
            "samples": self.samples,
            "radius": self.radius,
            "power_cap": self.power_cap,
            "ball_complete": self.ball_complete,
            **self.extra,
        }


@dataclass(frozen=True)
class TranslationBound:
    value: Fraction | None
    n: int | None
    uncertified: int


def translation_number_bound(word: Word, max_n: int, ball: BallIndex) -> TranslationBound:
    """min over 1 <= n <= max_n of |g^n| / n, over the powers whose length is certified."""
    if max_n < 1:
        raise InvalidCapsError("max_n must be at least 1")
    if ball.oracle.query(word) is Verdict.TRIVIAL:
        return TranslationBound(Fraction(0), 1, 0)
    best: Fraction | None = None
    best_n = None
    uncertified = 0
    for n in range(1, max_n + 1):
        length = geodesic_length(word.power(n), ball)
        if length is None:
            uncertified += 1
            continue
        ratio = Fraction(length, n)
        if best is None or ratio < best:
            best, best_n = ratio, n
    return TranslationBound(best, best_n, uncertified)


def _power_lengths(
    word: Word, power_cap: int, ball: BallIndex
) -> tuple[list[int | None], int | None]:
    """Certified |g^n| for n = 1..power_cap, and the least n with g^n trivial if one shows up."""
    lengths: list[int | None] = []
    torsion = None
    for n in range(1, power_cap + 1):
        power = word.power(n)
        if ball.oracle.query(power) is Verdict.TRIVIAL:
            torsion = n
            lengths.append(0)
            break
        lengths.append(geodesic_length(power, ball))
    return lengths, torsion


def _check_caps(ball_radius: int, power_cap: int):
    if ball_radius < 1 or power_cap < 1:
        raise InvalidCapsError("ball_radius and power_cap must be at least 1")


def uqc_estimate(
    oracle: WordProblemOracle, ball_radius: int, power_cap: int, element_cap: int = 20_000
) -> CyclicGeometryReport:
    """lambda_hat = min |g^n| / n over nontrivial ball elements and 1 <= n <= power_cap."""
    _check_caps(ball_radius, power_cap)
    ball = ball_for(oracle, ball_radius, element_cap)
    presentation = oracle.presentation
    report = CyclicGeometryReport(
        "uqc", None, radius=ball_radius, power_cap=power_cap, ball_complete=ball.complete
    )
    for g in ball.elements[1:]:
        lengths, torsion = _power_lengths(g, power_cap, ball)
        if torsion is not None and report.torsion_witness is None:
            report.torsion_witness = {"g": presentation.format(g), "order": torsion}
        for n, length in enumerate(lengths, start=1):
            if torsion is not None:
                break
            if length is None:
                report.uncertified += 1
                continue
            report.samples += 1
            ratio = Fraction(length, n)
            if report.value is None or ratio < report.value:
                report.value = ratio
                report.witness = {"g": presentation.format(g), "n": n, "power_length": length}
    if report.torsion_witness is not None:
        logger.info(f"Torsion in {presentation} excludes uniformly quasigeodesic cyclics")
        report.extra["lambda_positive"] = False
    return report


def umc_estimate(
    oracle: WordProblemOracle, ball_radius: int, power_cap: int, element_cap: int = 20_000
) -> CyclicGeometryReport:
    """k_hat = max |g^i| / |g^p| over ball elements and 0 < i < p <= power_cap."""
    _check_caps(ball_radius, power_cap)
    ball = ball_for(oracle, ball_radius, element_cap)
    presentation = oracle.presentation
    report = CyclicGeometryReport(
        "umc", None, radius=ball_radius, power_cap=power_cap, ball_complete=ball.complete
    )
    for g in ball.elements[1:]:
        lengths, torsion = _power_lengths(g, power_cap, ball)
        if torsion is not None and report.torsion_witness is None:
            report.torsion_witness = {"g": presentation.format(g), "order": torsion}
        for p in range(2, len(lengths) + 1):
            top = lengths[p - 1]
            if top is None or top == 0:
                if top is None:
                    report.uncertified += 1
                continue
            for i in range(1, p):
                below = lengths[i - 1]
                if below is None:
                    continue
                report.samples += 1
                ratio = Fraction(below, top)
                if report.value is None or ratio > report.value:
                    report.value = ratio
                    report.witness = {
                        "g": presentation.format(g),
                        "i": i,
                        "p": p,
                        "length_i": below,
                        "length_p": top,
                    }
    return report


def tau_report(
    oracle: WordProblemOracle, ball_radius: int, power_cap: int, element_cap: int = 20_000
) -> CyclicGeometryReport:
    """Translation-number upper bounds for every nontrivial ball element; value is the least."""
    _check_caps(ball_radius, power_cap)
    ball = ball_for(oracle, ball_radius, element_cap)
    presentation = oracle.presentation
    report = CyclicGeometryReport(
        "tau", None, radius=ball_radius, power_cap=power_cap, ball_complete=ball.complete
    )
    bounds = {}
    for g in ball.elements[1:]:
        bound = translation_number_bound(g, power_cap, ball)
        report.uncertified += bound.uncertified
        if bound.value is None:
            continue
        report.samples += 1
        bounds[presentation.format(g)] = {"tau_upper": str(bound.value), "n": bound.n}
        if report.value is None or bound.value < report.value:
            report.value = bound.value
            report.witness = {"g": presentation.format(g), "n": bound.n}
    report.extra["tau_upper"] = bounds
    return report


@dataclass(frozen=True)
class RootResult:
    root: Word
    exponent: int
    exhaustive: bool


def primitive_root(
    word: Word, oracle: WordProblemOracle, length_cap: int, exp_cap: int
) -> RootResult:
    """
    Shortest y (shortlex among ball representatives) with y^e = g for some 2 <= e <= exp_cap,
    the largest such e for that y. Falls back to (g, 1).
    """
    if len(word) > length_cap:
        raise RootNotFoundError(f"Word of length {len(word)} exceeds length cap {length_cap}")
    if exp_cap < 1:
        raise InvalidCapsError("exp_cap must be at least 1")
    ball = ball_for(oracle, length_cap)
    for y in ball.elements[1:]:
        for e in range(exp_cap, 1, -1):
            if oracle.equal(y.power(e), word) is Verdict.TRIVIAL:
                logger.debug(f"Root of {oracle.presentation.format(word)} found with exponent {e}")
                return RootResult(y, e, ball.complete)
    return RootResult(word, 1, ball.complete)
