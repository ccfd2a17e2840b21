"""
Fibre systems: G = <X | R>, a set A of generators normally generating N, the quotient
Q = <X | R u A>, and the fibre product P < G x G generated by (a, 1) and (x, x).

Elements of G x G are words over X followed by a renamed copy of X. Words over the
P-generators use one letter per generator, in the order (a, 1) for a in A, then (x, x).
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import NamedTuple

from fibrecl.area import AreaCaps, AreaDecomposition, AreaExhausted, area, verify_decomposition
from fibrecl.cyclics import BallIndex, geodesic_length
from fibrecl.oracles import OracleBudget, ProductOracle, Verdict, oracle_for
from fibrecl.presentation import Presentation
from fibrecl.tables import Exactness, Sample
from fibrecl.utils import CertificateError, InvalidCapsError, NonMemberError, UnknownGeneratorError
from fibrecl.words import Word, letter

logger = logging.getLogger("fibre")


@dataclass(frozen=True)
class FibreCaps:
    """
    p_radius: radius of the ball over P-generators used for P-lengths
    element_cap: elements per ball
    area: caps for Q-area certificates
    """

    p_radius: int = 6
    element_cap: int = 20_000
    area: AreaCaps = field(default_factory=AreaCaps)

    def __post_init__(self):
        if self.p_radius < 0 or self.element_cap < 1:
            raise InvalidCapsError("p_radius must be non-negative and element_cap positive")

    def to_dict(self) -> dict:
        return {
            "p_radius": self.p_radius,
            "element_cap": self.element_cap,
            "area": self.area.to_dict(),
        }


@dataclass(frozen=True)
class PGenerator:
    kind: str
    index: int

    def label(self, presentation: Presentation) -> str:
        name = presentation.generators[self.index]
        return f"({name},{name})" if self.kind == "diagonal" else f"({name},1)"


class FibreSystem:
    def __init__(self, g: Presentation, a_names: Iterable[str], budget: OracleBudget | None = None):
        a_names = list(a_names)
        unknown = [name for name in a_names if name not in g.alphabet.index]
        if unknown:
            msg = f"Normal generators {unknown} are not generators of {g}"
            logger.error(msg)
            raise UnknownGeneratorError(msg)
        self.G = g
        self.A: tuple[int, ...] = tuple(sorted({g.alphabet.index[name] for name in a_names}))
        killed = [Word.trusted((letter(i),)) for i in self.A]
        self.Q = g.with_relators(killed, name=f"{g.name or 'G'}/<<{','.join(a_names)}>>")
        self.p_generators: tuple[PGenerator, ...] = tuple(
            [PGenerator("left", i) for i in self.A]
            + [PGenerator("diagonal", i) for i in range(g.rank)]
        )
        self.budget = budget or OracleBudget()
        self.oracle_g = oracle_for(g, self.budget)
        self.oracle_q = oracle_for(self.Q, self.budget)
        self.oracle_gg = ProductOracle.square(self.oracle_g)
        self.GG = self.oracle_gg.presentation
        self.L = self.Q.L
        self._balls: dict[tuple, BallIndex] = {}
        self._diagonal = {
            gen.index: k for k, gen in enumerate(self.p_generators) if gen.kind == "diagonal"
        }
        self._left = {gen.index: k for k, gen in enumerate(self.p_generators) if gen.kind == "left"}
        logger.info(
            f"Fibre system over {g} with A = {self.a_names}: "
            f"{len(self.p_generators)} P-generators, L = {self.L}"
        )

    @property
    def a_names(self) -> list[str]:
        return [self.G.generators[i] for i in self.A]

    @property
    def p_labels(self) -> list[str]:
        return [gen.label(self.G) for gen in self.p_generators]

    def pair(self, g1: Word, g2: Word) -> Word:
        """(g1, g2) as a word over the G x G alphabet."""
        return g1 * g2.shift(self.G.rank)

    def project(self, pair_word: Word) -> tuple[Word, Word]:
        return self.oracle_gg.project(pair_word)

    def transcribe(self, p_word: Word) -> Word:
        """P-generator word to G x G word: (x,x) -> x x', (a,1) -> a."""
        images = [self.p_image(gen) for gen in self.p_generators]
        letters: list[int] = []
        for code in p_word:
            image = images[code >> 1]
            letters.extend(image.inverse().letters if code & 1 else image.letters)
        return Word(tuple(letters))

    def p_image(self, gen: PGenerator) -> Word:
        x = Word.trusted((letter(gen.index),))
        if gen.kind == "diagonal":
            return self.pair(x, x)
        return x

    def diagonal(self, word: Word) -> Word:
        """P-word for (word, word), spelled with the diagonal generators."""
        return Word.trusted(tuple(2 * self._diagonal[c >> 1] + (c & 1) for c in word))

    def left(self, code: int) -> Word:
        """P-word for (a, 1) or its inverse, for a letter code of a generator in A."""
        return Word.trusted((2 * self._left[code >> 1] + (code & 1),))

    def format_p(self, p_word: Word) -> str:
        if not p_word:
            return "1"
        labels = self.p_labels
        return " ".join(labels[c >> 1] + ("^-1" if c & 1 else "") for c in p_word)

    def describe(self) -> dict:
        return {
            "G": self.G.name,
            "A": self.a_names,
            "Q": {"name": self.Q.name, "relators": [self.Q.format(r) for r in self.Q.relators]},
            "p_generators": self.p_labels,
            "L": self.L,
            "oracles": {"G": self.oracle_g.kind, "Q": self.oracle_q.kind},
        }

    def p_ball(self, caps: FibreCaps) -> BallIndex:
        key = ("P", caps.p_radius, caps.element_cap)
        if key not in self._balls:
            self._balls[key] = BallIndex(
                self.oracle_gg,
                caps.p_radius,
                caps.element_cap,
                generators=[self.p_image(gen) for gen in self.p_generators],
                labels=self.p_labels,
            )
        return self._balls[key]

    def gg_ball(self, radius: int, caps: FibreCaps) -> BallIndex:
        key = ("GxG", radius, caps.element_cap)
        if key not in self._balls:
            self._balls[key] = BallIndex(self.oracle_gg, radius, caps.element_cap)
        return self._balls[key]

    def g_ball(self, radius: int, caps: FibreCaps) -> BallIndex:
        key = ("G", radius, caps.element_cap)
        if key not in self._balls:
            self._balls[key] = BallIndex(self.oracle_g, radius, caps.element_cap)
        return self._balls[key]


def make_fibre_system(
    g: Presentation, a_names: Iterable[str], budget: OracleBudget | None = None
) -> FibreSystem:
    return FibreSystem(g, a_names, budget)


def p_membership(g1: Word, g2: Word, system: FibreSystem) -> Verdict:
    """(g1, g2) lies in P iff g2^-1 g1 is trivial in Q."""
    return system.oracle_q.query(g2.inverse() * g1)


@dataclass(frozen=True)
class PLength:
    value: int | None
    spelling: Word | None = None

    @property
    def certified(self) -> bool:
        return self.value is not None


def p_length(g1: Word, g2: Word, system: FibreSystem, caps: FibreCaps | None = None) -> PLength:
    caps = caps or FibreCaps()
    verdict = p_membership(g1, g2, system)
    if verdict is Verdict.NONTRIVIAL:
        raise NonMemberError(f"({system.G.format(g1)}, {system.G.format(g2)}) is not in P")
    if verdict is Verdict.UNKNOWN:
        return PLength(None)
    if not g1 and not g2:
        return PLength(0, Word.identity())
    ball = system.p_ball(caps)
    found = ball.find(system.pair(g1, g2))
    if found is None or ball.lengths[found] > ball.certified_radius:
        return PLength(None)
    return PLength(ball.lengths[found], ball.spelling(found))


@dataclass(frozen=True)
class Lift:
    word: Word
    kept: AreaDecomposition
    bound: int

    @property
    def length(self) -> int:
        return len(self.word)


def lift_area_certificate(
    word: Word, decomposition: AreaDecomposition, system: FibreSystem
) -> Lift:
    """
    Turn a Q-certificate for w in N into a P-word for (w, 1): drop the factors whose relator
    is trivial in G, then spell each conjugator diagonally and each a as (a, 1).
    """
    if not verify_decomposition(word, decomposition, system.Q.closure):
        msg = f"Certificate does not verify for {system.G.format(word)} over Q"
        logger.error(msg)
        raise CertificateError(msg)
    a_codes = {letter(i, s) for i in system.A for s in (1, -1)}
    kept = []
    for factor in decomposition.factors:
        if factor.relator in system.G.closure:
            continue
        if len(factor.relator) != 1 or factor.relator.letters[0] not in a_codes:
            relator = system.Q.format(factor.relator)
            raise CertificateError(f"Factor relator {relator} is not in R or A")
        kept.append(factor)
    kept_decomposition = AreaDecomposition(tuple(kept))
    if kept_decomposition.noise > decomposition.noise:
        raise CertificateError("Deleting factors increased the noise")

    p_word = Word.identity()
    for factor in kept:
        big_theta = system.diagonal(factor.theta)
        a = system.left(factor.relator.letters[0])
        p_word = p_word * big_theta.inverse() * a * big_theta
    bound = kept_decomposition.noise + kept_decomposition.area
    if len(p_word) > bound:
        raise CertificateError(f"Lifted word of length {len(p_word)} exceeds bound {bound}")

    verdict = system.oracle_gg.equal(system.transcribe(p_word), system.pair(word, Word.identity()))
    if verdict is Verdict.NONTRIVIAL:
        raise CertificateError("Lifted P-word does not represent (w, 1)")
    if verdict is Verdict.UNKNOWN:
        logger.warning("Could not re-verify lifted P-word in G x G")
    return Lift(p_word, kept_decomposition, bound)


def p_word_for(h1: Word, h2: Word, system: FibreSystem, caps: AreaCaps | None = None) -> Word:
    """
    P-word for a member (h1, h2) of P, as (h1 h2^-1, 1)(h2, h2) with the first factor lifted
    from a Q-area certificate. Raises AreaExhausted when no certificate is found.
    """
    w = h1 * h2.inverse()
    p_word = Word.identity()
    if w:
        certificate = area(system.Q, w, caps, system.oracle_q)
        p_word = lift_area_certificate(w, certificate.decomposition, system).word
    return p_word * system.diagonal(h2)


@dataclass
class FibreSample:
    """Everything the distortion audits need for one member (g1, g2) of P."""

    g1: Word
    g2: Word
    gg_length: int | None
    p_length: int | None
    w: Word
    w_length_g: int | None
    area_q: int | None
    area_exact: bool
    gamma_p_length: int | None
    gg_exact: bool = True

    def lift_bound(self, L: int, n: int) -> int | None:
        if self.area_q is None:
            return None
        return (L + 1) * self.area_q + len(self.w) + n

    def to_dict(self, system: FibreSystem) -> dict:
        return {
            "g1": system.G.format(self.g1),
            "g2": system.G.format(self.g2),
            "gg_length": self.gg_length,
            "gg_exact": self.gg_exact,
            "p_length": self.p_length,
            "w": system.G.format(self.w),
            "w_length_g": self.w_length_g,
            "area_q": self.area_q,
            "area_exact": self.area_exact,
            "gamma_p_length": self.gamma_p_length,
        }


def fibre_sample(
    g1: Word,
    g2: Word,
    system: FibreSystem,
    caps: FibreCaps,
    gg_length: int | None = None,
    gg_exact: bool = True,
) -> FibreSample:
    w = g2.inverse() * g1
    try:
        result = area(system.Q, w, caps.area, system.oracle_q)
        area_q, area_exact = result.area, result.exact
    except AreaExhausted:
        area_q, area_exact = None, False
    g_ball = system.g_ball(max(len(w), 1), caps)
    return FibreSample(
        g1=g1,
        g2=g2,
        gg_length=gg_length,
        p_length=p_length(g1, g2, system, caps).value,
        w=w,
        w_length_g=geodesic_length(w, g_ball),
        area_q=area_q,
        area_exact=area_exact,
        gamma_p_length=p_length(w, Word.identity(), system, caps).value,
        gg_exact=gg_exact,
    )


class Member(NamedTuple):
    g1: Word
    g2: Word
    gg_length: int
    gg_exact: bool


def members(system: FibreSystem, n: int, caps: FibreCaps) -> tuple[list[Member], bool]:
    """
    P-members of G x G-length <= n, and whether the scan is complete. A length past the
    certified radius of a truncated ball is an upper bound only (gg_exact False).
    """
    ball = system.gg_ball(n, caps)
    found = []
    complete = ball.complete
    for word, length in zip(ball.elements, ball.lengths):
        g1, g2 = system.project(word)
        verdict = p_membership(g1, g2, system)
        if verdict is Verdict.TRIVIAL:
            found.append(Member(g1, g2, length, length <= ball.certified_radius))
        elif verdict is Verdict.UNKNOWN:
            complete = False
    return found, complete


def distortion(system: FibreSystem, n: int, caps: FibreCaps | None = None) -> Sample:
    """Dist(n) = max |gamma|_P over P-members with |gamma|_{G x G} <= n."""
    caps = caps or FibreCaps()
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    found, complete = members(system, n, caps)
    best, witness = 0, None
    for g1, g2, length, _ in found:
        measured = p_length(g1, g2, system, caps)
        if measured.value is None:
            complete = False
            continue
        if measured.value > best:
            best = measured.value
            witness = {
                "g1": system.G.format(g1),
                "g2": system.G.format(g2),
                "gg_length": length,
                "p_word": system.format_p(measured.spelling),
            }
    exactness = Exactness.EXACT if complete else Exactness.LOWER_BOUND
    return Sample(n, best, exactness, witness)


@dataclass(frozen=True)
class HardWitness:
    gamma: Word
    p_length: int
    exact: bool
    lift: Lift | None = None

    def to_dict(self, system: FibreSystem) -> dict:
        data = {
            "gamma": system.G.format(self.gamma),
            "p_length": self.p_length,
            "exact": self.exact,
        }
        if self.lift is not None:
            data["lift"] = {
                "p_word": system.format_p(self.lift.word),
                "length": self.lift.length,
                "bound": self.lift.bound,
                "certificate": self.lift.kept.to_dict(system.Q),
            }
        return data


def hard_distortion_witness(
    system: FibreSystem, n: int, caps: FibreCaps | None = None
) -> HardWitness:
    """
    gamma in N with |gamma|_G <= n maximizing |(gamma, 1)|_P, with a lifted Q-certificate.
    Ties go to a gamma that does not commute with the first generator in A.
    """
    caps = caps or FibreCaps()
    ball = system.g_ball(n, caps)
    exact = ball.complete
    first = Word.trusted((letter(system.A[0]),)) if system.A else None

    def commutes(gamma: Word) -> bool:
        if first is None:
            return True
        return system.oracle_g.equal(gamma * first, first * gamma) is not Verdict.NONTRIVIAL

    best = HardWitness(Word.identity(), 0, True)
    for gamma in ball.elements:
        if system.oracle_q.query(gamma) is not Verdict.TRIVIAL:
            continue
        measured = p_length(gamma, Word.identity(), system, caps)
        if measured.value is None:
            exact = False
            continue
        tie = measured.value == best.p_length > 0
        if measured.value > best.p_length or (
            tie and commutes(best.gamma) and not commutes(gamma)
        ):
            best = HardWitness(gamma, measured.value, True)
    lift = None
    if best.gamma:
        try:
            certificate = area(system.Q, best.gamma, caps.area, system.oracle_q)
            lift = lift_area_certificate(best.gamma, certificate.decomposition, system)
        except AreaExhausted as e:
            logger.warning(f"No Q-certificate for the distortion witness: {e}")
    return HardWitness(best.gamma, best.p_length, exact, lift)
