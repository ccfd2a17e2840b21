"""
Conjugacy: shortest conjugators in Cayley balls, conjugator-length samples, the staged
construction of short conjugators in fibre products, hard instances, and membership in
cyclic sub-semigroups.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from fibrecl.area import AreaExhausted
from fibrecl.cyclics import BallIndex, ball_for, primitive_root
from fibrecl.fibre import (
    FibreCaps,
    FibreSystem,
    hard_distortion_witness,
    members,
    p_membership,
    p_word_for,
)
from fibrecl.oracles import (
    FreeOracle,
    ProductOracle,
    TietzeOracle,
    Verdict,
    WordProblemOracle,
    order_of,
)
from fibrecl.rewriting import canonical
from fibrecl.tables import Exactness, Sample
from fibrecl.utils import (
    CertificateError,
    FibreclError,
    InvalidCapsError,
    NonMemberError,
    RootNotFoundError,
    ordered_map,
)
from fibrecl.words import Word, letter

logger = logging.getLogger("conjugacy")


class SearchStatus(Enum):
    FOUND = "found"
    NOT_FOUND = "not_found"
    UNKNOWN = "unknown"


class Flavor(Enum):
    G = "g"
    P = "p"
    REL = "rel"


class SemigroupStatus(Enum):
    MEMBER = "member"
    NONMEMBER = "nonmember"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ConjugatorCaps:
    """
    radius: conjugator search radius, in the generators of the group searched
    exponent_cap: largest exponent in root, order and exponent-pair scans
    root_radius: longest word whose primitive root is searched for
    quantifier: "sum" bounds |u| + |v| by n, "max" bounds max(|u|, |v|)
    fibre: caps for P-balls and Q-area certificates
    """

    radius: int = 4
    exponent_cap: int = 8
    root_radius: int = 4
    quantifier: str = "sum"
    fibre: FibreCaps = field(default_factory=FibreCaps)

    def __post_init__(self):
        if self.radius < 0 or self.exponent_cap < 1 or self.root_radius < 1:
            raise InvalidCapsError("radius must be non-negative, exponent and root caps positive")
        if self.quantifier not in ("sum", "max"):
            raise InvalidCapsError("quantifier must be 'sum' or 'max'")

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "exponent_cap": self.exponent_cap,
            "root_radius": self.root_radius,
            "quantifier": self.quantifier,
            "fibre": self.fibre.to_dict(),
        }


class ConjugatorExhausted(FibreclError):
    """The conjugator pipeline ran out of budget at `stage`."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ConjugacySearch:
    status: SearchStatus
    radius: int
    conjugator: Word | None = None
    spelling: Word | None = None

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND

    @property
    def length(self) -> int | None:
        return None if self.spelling is None else len(self.spelling)


def conjugacy_search(
    oracle: WordProblemOracle,
    u: Word,
    v: Word,
    radius: int,
    ball: BallIndex | None = None,
    element_cap: int = 20_000,
) -> ConjugacySearch:
    """
    Shortest conjugator gamma with gamma^-1 u gamma = v, first in shortlex order over the
    ball's generating set. NOT_FOUND is only returned when the ball is certified and every
    comparison was decided.
    """
    if radius < 0:
        raise InvalidCapsError("radius must be non-negative")
    if oracle.equal(u, v) is Verdict.TRIVIAL:
        return ConjugacySearch(SearchStatus.FOUND, radius, Word.identity(), Word.identity())
    ball = ball or ball_for(oracle, radius, element_cap)
    ranked = sorted(range(len(ball)), key=lambda i: (ball.lengths[i], ball.spellings[i]))
    undecided = False
    for index in ranked:
        if ball.lengths[index] > radius:
            break
        gamma = ball.elements[index]
        verdict = oracle.equal(u.conjugate(gamma), v)
        if verdict is Verdict.TRIVIAL:
            return ConjugacySearch(SearchStatus.FOUND, radius, gamma, ball.spelling(index))
        if verdict is Verdict.UNKNOWN:
            undecided = True
    if undecided or not ball.complete or ball.radius < radius:
        return ConjugacySearch(SearchStatus.UNKNOWN, radius)
    return ConjugacySearch(SearchStatus.NOT_FOUND, radius)


def certify_not_conjugate(u: Word, v: Word, oracle: WordProblemOracle) -> bool:
    """True only when u and v are certainly not conjugate."""
    if isinstance(oracle, FreeOracle):
        return canonical(u.letters) != canonical(v.letters)
    if isinstance(oracle, TietzeOracle):
        return certify_not_conjugate(oracle.image(u), oracle.image(v), oracle.inner)
    if isinstance(oracle, ProductOracle):
        (u1, u2), (v1, v2) = oracle.project(u), oracle.project(v)
        if certify_not_conjugate(u1, v1, oracle.first):
            return True
        if certify_not_conjugate(u2, v2, oracle.second):
            return True
    return oracle.invariants.certifies_not_conjugate(u, v)


def _covers_group(ball: BallIndex) -> bool:
    """The ball is the whole (finite) group."""
    cosets = ball.oracle.invariants.cosets
    return cosets.complete and ball.complete and len(ball) == cosets.order


@dataclass
class CLSample:
    n: int
    value: int
    exactness: Exactness
    flavor: Flavor
    u: str | None = None
    v: str | None = None
    conjugator: str | None = None

    def to_sample(self) -> Sample:
        witness = {"flavor": self.flavor.value}
        if self.u is not None:
            witness.update({"u": self.u, "v": self.v, "conjugator": self.conjugator})
        return Sample(self.n, self.value, self.exactness, witness)


@dataclass(frozen=True)
class _Candidate:
    word: Word
    length: int
    label: str


def _candidates(
    target: "WordProblemOracle | FibreSystem", n: int, flavor: Flavor, caps: ConjugatorCaps
) -> tuple[WordProblemOracle, list[_Candidate], bool, BallIndex]:
    """Elements measured in the flavor's metric, whether that list is complete, and the
    ball conjugators are searched in."""
    if flavor is Flavor.G:
        oracle = target if isinstance(target, WordProblemOracle) else target.oracle_g
        ball = ball_for(oracle, n, caps.fibre.element_cap)
        found = [
            _Candidate(w, length, oracle.presentation.format(w))
            for w, length in zip(ball.elements, ball.lengths)
        ]
        search = ball_for(oracle, caps.radius, caps.fibre.element_cap)
        return oracle, found, ball.complete, search
    if not isinstance(target, FibreSystem):
        raise InvalidCapsError(f"flavor {flavor.value} needs a fibre system")
    system = target
    search = system.p_ball(replace(caps.fibre, p_radius=caps.radius))
    if flavor is Flavor.P:
        ball = system.p_ball(replace(caps.fibre, p_radius=n))
        found = [
            _Candidate(w, length, system.format_p(ball.spelling(i)))
            for i, (w, length) in enumerate(zip(ball.elements, ball.lengths))
        ]
        return system.oracle_gg, found, ball.complete, search
    pairs, complete = members(system, n, caps.fibre)
    found = [
        _Candidate(
            system.pair(g1, g2), length, f"({system.G.format(g1)}, {system.G.format(g2)})"
        )
        for g1, g2, length, _ in pairs
    ]
    return system.oracle_gg, found, complete, search


def cl_table(
    target: "WordProblemOracle | FibreSystem",
    n: int,
    flavor: Flavor = Flavor.G,
    caps: ConjugatorCaps | None = None,
) -> CLSample:
    """
    max over conjugate pairs (u, v) within the length budget of the shortest conjugator.
      g: u, v and conjugators measured in G
      p: u, v and conjugators measured in P
      rel: u, v measured in G x G, conjugators in P
    """
    caps = caps or ConjugatorCaps()
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    oracle, candidates, complete, search_ball = _candidates(target, n, flavor, caps)
    pairs = [
        (first, second)
        for first, second in itertools.combinations_with_replacement(candidates, 2)
        if (
            first.length + second.length
            if caps.quantifier == "sum"
            else max(first.length, second.length)
        )
        <= n
    ]

    def measure(pair: tuple[_Candidate, _Candidate]) -> tuple[ConjugacySearch | None, Exactness]:
        first, second = pair
        if certify_not_conjugate(first.word, second.word, oracle):
            return None, Exactness.EXACT
        result = conjugacy_search(oracle, first.word, second.word, caps.radius, search_ball)
        if result.found:
            return result, Exactness.EXACT
        if result.status is SearchStatus.NOT_FOUND and _covers_group(search_ball):
            return None, Exactness.EXACT
        return None, Exactness.LOWER_BOUND

    flags = [Exactness.EXACT if complete else Exactness.LOWER_BOUND]
    sample = CLSample(n, 0, Exactness.EXACT, flavor)
    for (first, second), (result, exactness) in zip(pairs, ordered_map(measure, pairs)):
        flags.append(exactness)
        if result is not None and (sample.u is None or result.length > sample.value):
            sample.value, sample.u, sample.v = result.length, first.label, second.label
            sample.conjugator = _format_spelling(result, search_ball, oracle)
    sample.exactness = Exactness.worst(flags)
    logger.debug(f"CL_{flavor.value}({n}) = {sample.value} over {len(pairs)} pairs")
    return sample


def _format_spelling(
    result: ConjugacySearch, ball: BallIndex, oracle: WordProblemOracle
) -> str:
    if not result.spelling:
        return "1"
    if ball.letter_steps:
        return oracle.presentation.format(result.conjugator)
    return " ".join(ball.step_labels[c] for c in result.spelling)


@dataclass
class ConjugatorCertificate:
    U: tuple[Word, Word]
    V: tuple[Word, Word]
    zeta: Word
    pair: tuple[Word, Word]
    stages: list[str]
    record: dict
    verified: bool

    @property
    def length(self) -> int:
        return len(self.zeta)

    def to_dict(self, system: FibreSystem) -> dict:
        fmt = system.G.format
        return {
            "U": [fmt(w) for w in self.U],
            "V": [fmt(w) for w in self.V],
            "zeta": system.format_p(self.zeta),
            "zeta_length": self.length,
            "zeta_pair": [fmt(w) for w in self.pair],
            "stages": self.stages,
            "record": self.record,
            "verified": self.verified,
        }


def reduce_exponent(p_prime: int, omega: int | None) -> int:
    """p'' congruent to p' mod omega with |p''| <= omega / 2, when omega < 2|p'|."""
    if omega is None or omega >= 2 * abs(p_prime):
        return p_prime
    remainder = p_prime % omega
    if 2 * remainder > omega:
        remainder -= omega
    return remainder


def exponent_pairs(cap: int) -> list[tuple[int, int]]:
    """Diagonal pairs by |q|, then the rest by |q1| + |q2|."""
    diagonal = sorted(((q, q) for q in range(-cap, cap + 1)), key=lambda t: (abs(t[0]), t[0]))
    rest = sorted(
        (
            (q1, q2)
            for q1 in range(-cap, cap + 1)
            for q2 in range(-cap, cap + 1)
            if q1 != q2
        ),
        key=lambda t: (abs(t[0]) + abs(t[1]), t),
    )
    return diagonal + rest


def _root(word: Word, oracle: WordProblemOracle, caps: ConjugatorCaps) -> tuple[Word, int]:
    try:
        root = primitive_root(word, oracle, caps.root_radius, caps.exponent_cap)
    except RootNotFoundError as e:
        logger.warning(f"Root search failed, using the word itself: {e}")
        return word, 1
    return root.root, root.exponent


def _search_or_exhaust(
    stage: str, oracle: WordProblemOracle, u: Word, v: Word, caps: ConjugatorCaps
) -> Word:
    result = conjugacy_search(oracle, u, v, caps.radius, element_cap=caps.fibre.element_cap)
    if not result.found:
        fmt = oracle.presentation.format
        msg = f"no conjugator of {fmt(u)} to {fmt(v)} within radius {caps.radius}"
        logger.warning(f"Conjugator pipeline stopped at {stage}: {msg}")
        raise ConjugatorExhausted(stage, msg)
    return result.conjugator


def construct_P_conjugator(
    U: tuple[Word, Word],
    V: tuple[Word, Word],
    system: FibreSystem,
    caps: ConjugatorCaps | None = None,
) -> ConjugatorCertificate:
    """
    Build a conjugator in P from U to V in stages: diagonal conjugation when U lies in a
    factor, otherwise reduce to u2 = v2, take primitive roots y1, y2, find gamma conjugating
    u1 to v1, scan exponent pairs for (y1^q1 gamma, y2^q2) in P, normalize the exponents
    and lift the result to a P-word through a Q-area certificate.
    """
    caps = caps or ConjugatorCaps()
    for name, (g1, g2) in (("U", U), ("V", V)):
        verdict = p_membership(g1, g2, system)
        if verdict is Verdict.NONTRIVIAL:
            pair_text = f"({system.G.format(g1)}, {system.G.format(g2)})"
            raise NonMemberError(f"{name} = {pair_text} is not in P")
        if verdict is Verdict.UNKNOWN:
            raise ConjugatorExhausted("membership", f"could not decide whether {name} is in P")

    fmt = system.G.format
    oracle = system.oracle_g
    (u1, u2), (v1, v2) = U, V
    big_u, big_v = system.pair(u1, u2), system.pair(v1, v2)
    stages: list[str] = []
    record: dict = {}
    for ui, vi in ((u1, v1), (u2, v2)):
        if certify_not_conjugate(ui, vi, oracle):
            msg = f"{fmt(ui)} and {fmt(vi)} are not conjugate in G"
            logger.warning(f"Conjugator pipeline stopped at conjugacy: {msg}")
            raise ConjugatorExhausted("conjugacy", msg)

    if system.oracle_gg.equal(big_u, big_v) is Verdict.TRIVIAL:
        stages.append("equal")
        pair = (Word.identity(), Word.identity())
    elif oracle.query(u1) is Verdict.TRIVIAL or oracle.query(u2) is Verdict.TRIVIAL:
        coordinate = 1 if oracle.query(u1) is Verdict.TRIVIAL else 0
        if oracle.query(V[1 - coordinate]) is not Verdict.TRIVIAL:
            raise ConjugatorExhausted(
                "diagonal", f"{fmt(V[1 - coordinate])} is not known to be trivial like U"
            )
        gamma = _search_or_exhaust("diagonal", oracle, U[coordinate], V[coordinate], caps)
        stages.append("diagonal")
        record["gamma"] = fmt(gamma)
        pair = (gamma, gamma)
    else:
        g = _search_or_exhaust("reduce", oracle, u2, v2, caps)
        v1_reduced = v1.conjugate(g.inverse())
        stages.append("reduce")
        record["g"] = fmt(g)

        y1, e1 = _root(u1, oracle, caps)
        y2, e2 = _root(u2, oracle, caps)
        stages.append("roots")
        record.update({"y1": fmt(y1), "e1": e1, "y2": fmt(y2), "e2": e2})

        gamma = _search_or_exhaust("gamma", oracle, u1, v1_reduced, caps)
        stages.append("gamma")
        record["gamma"] = fmt(gamma)

        undecided = False
        for q1, q2 in exponent_pairs(caps.exponent_cap):
            verdict = p_membership(y1.power(q1) * gamma, y2.power(q2), system)
            if verdict is Verdict.TRIVIAL:
                break
            undecided = undecided or verdict is Verdict.UNKNOWN
        else:
            reason = "undecided memberships" if undecided else "no member"
            raise ConjugatorExhausted(
                "exponents", f"{reason} among exponent pairs up to {caps.exponent_cap}"
            )
        stages.append("exponents")
        record.update({"q1": q1, "q2": q2})

        p, r2 = divmod(q2, e2)
        p_prime = q1 - p * e1
        order = order_of(y1, system.oracle_q, caps.exponent_cap)
        omega = order.value if order.is_finite else None
        p_double = reduce_exponent(p_prime, omega)
        stages.append("normalize")
        record.update(
            {"p": p, "r2": r2, "p_prime": p_prime, "omega": omega, "p_double_prime": p_double}
        )
        if omega is not None and 2 * abs(p_double) > omega:
            raise CertificateError(f"|p''| = {abs(p_double)} exceeds omega / 2 = {omega / 2}")
        pair = (y1.power(p_double) * gamma * g, y2.power(r2) * g)

    try:
        zeta = p_word_for(pair[0], pair[1], system, caps.fibre.area)
    except AreaExhausted as e:
        raise ConjugatorExhausted("lift", str(e)) from e
    stages.append("lift")

    transcribed = system.transcribe(zeta)
    conjugates = system.oracle_gg.equal(big_u.conjugate(transcribed), big_v)
    spells = system.oracle_gg.equal(transcribed, system.pair(*pair))
    if Verdict.NONTRIVIAL in (conjugates, spells):
        msg = f"Constructed conjugator {system.format_p(zeta)} does not conjugate U to V"
        logger.error(msg)
        raise CertificateError(msg)
    verified = conjugates is Verdict.TRIVIAL and spells is Verdict.TRIVIAL
    stages.append("verify")
    logger.info(f"Conjugator of length {len(zeta)} built through stages {stages}")
    return ConjugatorCertificate(U, V, zeta, pair, stages, record, verified)


@dataclass(frozen=True)
class HardInstance:
    a: Word
    gamma: Word
    U: tuple[Word, Word]
    V: tuple[Word, Word]
    u_p_word: Word
    v_p_word: Word
    gamma_p_length: int
    exact: bool

    def to_dict(self, system: FibreSystem) -> dict:
        fmt = system.G.format
        return {
            "a": fmt(self.a),
            "gamma": fmt(self.gamma),
            "U": [fmt(w) for w in self.U],
            "V": [fmt(w) for w in self.V],
            "U_p_word": system.format_p(self.u_p_word),
            "V_p_word": system.format_p(self.v_p_word),
            "gamma_p_length": self.gamma_p_length,
            "exact": self.exact,
        }


def hard_conjugacy_instance(
    system: FibreSystem, n: int, caps: ConjugatorCaps | None = None
) -> HardInstance:
    """
    U = (a, a) and V = (gamma^-1 a gamma, a) for the hard distortion witness gamma, with
    V spelled as (gamma, gamma)^-1 (a, 1) (gamma, gamma) (a, 1)^-1 (a, a).

    The spelling has 2|gamma| + 3 letters, not 2|gamma| + 2: (1, a) is not a P-generator
    and costs two letters, (a, 1)^-1 (a, a).
    """
    caps = caps or ConjugatorCaps()
    if not system.A:
        raise InvalidCapsError("hard instances need a nonempty A")
    code = letter(system.A[0])
    a = Word.trusted((code,))
    witness = hard_distortion_witness(system, n, caps.fibre)
    gamma = witness.gamma
    u_p_word = system.diagonal(a)
    v_p_word = (
        system.left(code).conjugate(system.diagonal(gamma))
        * system.left(code).inverse()
        * system.diagonal(a)
    )
    U = (a, a)
    V = (a.conjugate(gamma), a)
    if len(v_p_word) > 2 * len(gamma) + 3:
        raise CertificateError(f"Spelling of V has length {len(v_p_word)}")
    if system.oracle_gg.equal(system.transcribe(v_p_word), system.pair(*V)) is Verdict.NONTRIVIAL:
        raise CertificateError("Spelling of V does not represent V")
    return HardInstance(a, gamma, U, V, u_p_word, v_p_word, witness.p_length, witness.exact)


def centralizer_decomposition_audit(
    instance: HardInstance, conjugator: Word, system: FibreSystem
) -> Verdict:
    """
    A conjugator c from (a, a) to (gamma^-1 a gamma, a), given as a G x G word, must be
    z (gamma, 1) with z centralizing (a, a). TRIVIAL means the check passed.
    """
    alpha = system.pair(*instance.U)
    z = conjugator * system.pair(instance.gamma, Word.identity()).inverse()
    return system.oracle_gg.equal(z * alpha, alpha * z)


@dataclass(frozen=True)
class SemigroupMembership:
    status: SemigroupStatus
    p: int | None = None

    def to_dict(self) -> dict:
        return {"status": self.status.value, "p": self.p}


def cyclic_semigroup_membership(
    x: Word, y: Word, oracle: WordProblemOracle, rho: int, rho_valid: bool = False
) -> SemigroupMembership:
    """
    Least p in 1..rho with x = y^p. NONMEMBER needs every comparison decided and a rho
    known to bound p for this instance (rho_valid).
    """
    if rho < 1:
        raise InvalidCapsError("rho must be at least 1")
    undecided = False
    for p in range(1, rho + 1):
        verdict = oracle.equal(x, y.power(p))
        if verdict is Verdict.TRIVIAL:
            return SemigroupMembership(SemigroupStatus.MEMBER, p)
        if verdict is Verdict.UNKNOWN:
            undecided = True
    if rho_valid and not undecided:
        return SemigroupMembership(SemigroupStatus.NONMEMBER)
    return SemigroupMembership(SemigroupStatus.UNKNOWN)
