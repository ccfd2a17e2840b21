"""
Presentation compilers: the Rips construction, trivial HNN extensions and the dagger
construction (G x G) *_P over the Rips fibre product of a presentation.
"""

import logging
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from fibrecl.fibre import FibreSystem
from fibrecl.oracles import dehn_reducer
from fibrecl.presentation import (
    SMALL_CANCELLATION_BOUND,
    Presentation,
    fresh_name,
    kill_generators,
    small_cancellation_lambda,
)
from fibrecl.utils import ConstructionError, stage
from fibrecl.words import Word, commutator, letter

logger = logging.getLogger("constructions")

WORD_LENGTH_CAP = 2**14
DEFAULT_WORD_LENGTH = 16
TAIL_SCHEME = "binary de Bruijn segments"


def de_bruijn(order: int) -> list[int]:
    """Binary de Bruijn sequence of the given order (Fredricksen-Kessler-Maiorana)."""
    a = [0] * (order + 1)
    sequence: list[int] = []

    def extend(t: int, p: int):
        if t > order:
            if order % p == 0:
                sequence.extend(a[1 : p + 1])
            return
        a[t] = a[t - p]
        extend(t + 1, p)
        for value in range(a[t - p] + 1, 2):
            a[t] = value
            extend(t + 1, t)

    extend(1, 1)
    return sequence


def tail_words(slots: int, word_length: int, a: int, b: int) -> tuple[list[Word], int]:
    """
    `slots` positive words over {a, b} cut from consecutive disjoint segments of one
    de Bruijn sequence, so no window of the returned order occurs twice across all tails.
    """
    order = max(1, math.ceil(math.log2(slots * word_length)))
    bits = de_bruijn(order)
    codes = (letter(a), letter(b))
    tails = [
        Word.trusted(tuple(codes[bit] for bit in bits[i * word_length : (i + 1) * word_length]))
        for i in range(slots)
    ]
    return tails, order


@dataclass
class RipsCertificate:
    source: Presentation
    output: Presentation
    kernel: tuple[str, str]
    word_length: int
    de_bruijn_order: int
    lam: Fraction
    attempts: list[tuple[int, Fraction]] = field(default_factory=list)
    retraction_ok: bool = False
    dehn_samples: int = 0
    dehn_failures: int = 0
    aspherical: str = "unchecked (classical property of the construction)"

    @property
    def expected_relators(self) -> int:
        return 4 * self.source.rank + len(self.source.relators)

    @property
    def count_ok(self) -> bool:
        return len(self.output.relators) == self.expected_relators

    @property
    def small_cancellation_ok(self) -> bool:
        return self.lam < SMALL_CANCELLATION_BOUND

    @property
    def passed(self) -> bool:
        return (
            self.count_ok
            and self.small_cancellation_ok
            and self.retraction_ok
            and self.dehn_failures == 0
        )

    def to_dict(self) -> dict:
        return {
            "source": self.source.name,
            "output": self.output.name,
            "generators": list(self.output.generators),
            "kernel": list(self.kernel),
            "relators": len(self.output.relators),
            "expected_relators": self.expected_relators,
            "count_ok": self.count_ok,
            "condition": "C'(1/6)",
            "lambda": str(self.lam),
            "small_cancellation_ok": self.small_cancellation_ok,
            "tail_scheme": TAIL_SCHEME,
            "word_length": self.word_length,
            "de_bruijn_order": self.de_bruijn_order,
            "attempts": [{"word_length": n, "lambda": str(lam)} for n, lam in self.attempts],
            "retraction_ok": self.retraction_ok,
            "dehn_samples": self.dehn_samples,
            "dehn_failures": self.dehn_failures,
            "aspherical": self.aspherical,
        }


def rips_relators(q: Presentation, word_length: int, a: int, b: int) -> tuple[list[Word], int]:
    tails, order = tail_words(4 * q.rank + len(q.relators), word_length, a, b)
    a_word, b_word = Word.trusted((letter(a),)), Word.trusted((letter(b),))
    relators: list[Word] = []
    slot = iter(tails)
    for i in range(q.rank):
        x = Word.trusted((letter(i),))
        x_inv = x.inverse()
        for outer, kernel in ((x, a_word), (x, b_word), (x_inv, a_word), (x_inv, b_word)):
            relators.append(outer * kernel * outer.inverse() * next(slot).inverse())
    for relator in q.relators:
        relators.append(relator * next(slot).inverse())
    return relators, order


def retraction_recovers(g: Presentation, killed: Sequence[str], q: Presentation) -> bool:
    """
    Deleting `killed` from g leaves exactly the generators of q and, up to normalization,
    its relators.
    """
    image = kill_generators(g, killed)
    return image.generators == q.generators and set(image.relators) == set(q.relators)


def random_null_word(
    presentation: Presentation, rng: random.Random, max_factors: int = 3, conjugator_length: int = 3
) -> Word:
    """Product of at most `max_factors` random conjugates of relators or their inverses."""
    word = Word.identity()
    for _ in range(rng.randint(1, max_factors)):
        relator = rng.choice(presentation.relators)
        if rng.random() < 0.5:
            relator = relator.inverse()
        size = rng.randint(0, conjugator_length)
        theta = Word(tuple(rng.randrange(2 * presentation.rank) for _ in range(size)))
        word = word * relator.conjugate(theta)
    return word


def dehn_reduction_audit(presentation: Presentation, samples: int = 200, seed: int = 0) -> int:
    """Number of random null products that Dehn's algorithm fails to reduce to the empty word."""
    if not presentation.relators:
        return 0
    reducer = dehn_reducer(presentation)
    rng = random.Random(seed)
    failures = 0
    for _ in range(samples):
        word = random_null_word(presentation, rng)
        residue, _ = reducer.reduce(word)
        if residue:
            failures += 1
            logger.warning(f"Dehn residue {presentation.format(residue)} for null word")
    return failures


def rips(
    q: Presentation,
    word_length: int = DEFAULT_WORD_LENGTH,
    dehn_samples: int = 200,
    seed: int = 0,
) -> tuple[Presentation, tuple[str, str], RipsCertificate]:
    """
    Rips construction over q = <X | R>: returns G = <X, a, b | T> with N = <a, b> normal and
    G/N = q. Tails double in length until the piece scan certifies C'(1/6).
    """
    if word_length < 1:
        raise ConstructionError(f"word_length must be positive, got {word_length}")
    taken = set(q.generators)
    a_name = fresh_name("a", taken)
    b_name = fresh_name("b", taken | {a_name})
    generators = list(q.generators) + [a_name, b_name]
    a, b = q.rank, q.rank + 1
    name = f"rips({q.name or 'Q'})"

    attempts: list[tuple[int, Fraction]] = []
    length = word_length
    while True:
        if length > WORD_LENGTH_CAP:
            msg = f"Rips tails for {q} exceeded the word length cap {WORD_LENGTH_CAP}"
            logger.error(msg)
            raise ConstructionError(msg)
        relators, order = rips_relators(q, length, a, b)
        g = Presentation(generators, relators, name)
        lam = small_cancellation_lambda(g)
        attempts.append((length, lam))
        logger.debug(f"Rips tails of length {length}: lambda = {lam}")
        if lam < SMALL_CANCELLATION_BOUND:
            break
        length *= 2

    certificate = RipsCertificate(
        source=q,
        output=g,
        kernel=(a_name, b_name),
        word_length=length,
        de_bruijn_order=order,
        lam=lam,
        attempts=attempts,
    )
    if not certificate.count_ok:
        expected = certificate.expected_relators
        msg = f"Rips output has {len(g.relators)} relators, expected {expected}"
        logger.error(msg)
        raise ConstructionError(msg)
    certificate.retraction_ok = retraction_recovers(g, certificate.kernel, q)
    certificate.dehn_samples = dehn_samples
    certificate.dehn_failures = dehn_reduction_audit(g, dehn_samples, seed)
    logger.info(
        f"Rips construction {g}: lambda = {lam}, word length {length}, "
        f"retraction {'ok' if certificate.retraction_ok else 'FAILED'}"
    )
    return g, certificate.kernel, certificate


def trivial_hnn(
    gamma: Presentation, h_gens: Sequence[Word], stable: str = "t", name: str | None = None
) -> Presentation:
    """<X, t | R, [t, h] for h in H>; the stable letter is renamed on clash."""
    t_name = fresh_name(stable, set(gamma.generators))
    t = Word.trusted((letter(gamma.rank),))
    extra = []
    for h in h_gens:
        if not h:
            logger.debug("Skipping trivial associated word")
            continue
        extra.append(commutator(t, h))
    hnn = Presentation(
        list(gamma.generators) + [t_name],
        list(gamma.relators) + extra,
        name or f"{gamma.name or 'G'}*{t_name}",
    )
    logger.info(f"Trivial HNN extension {hnn} with stable letter {t_name}")
    return hnn


@dataclass
class DaggerProvenance:
    rips: RipsCertificate
    product: Presentation
    p_labels: list[str]
    p_words: list[Word]
    stable: str
    output: Presentation
    audits: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "stages": [
                {"stage": "rips", **self.rips.to_dict()},
                {
                    "stage": "product",
                    "generators": len(self.product.generators),
                    "relators": len(self.product.relators),
                },
                {
                    "stage": "p_generators",
                    "generators": [
                        {"label": label, "word": self.product.format(word)}
                        for label, word in zip(self.p_labels, self.p_words)
                    ],
                },
                {
                    "stage": "hnn",
                    "stable": self.stable,
                    "generators": len(self.output.generators),
                    "relators": len(self.output.relators),
                },
            ],
            "audits": dict(self.audits),
        }


@stage("rips")
def _rips_stage(q: Presentation, word_length: int):
    return rips(q, word_length)


@stage("product")
def _product_stage(g: Presentation, kernel: Sequence[str]) -> FibreSystem:
    return FibreSystem(g, kernel)


@stage("hnn")
def _hnn_stage(system: FibreSystem, name: str) -> tuple[Presentation, list[Word]]:
    p_words = [system.p_image(gen) for gen in system.p_generators]
    return trivial_hnn(system.GG, p_words, name=name), p_words


@stage("audit")
def _dagger_audits(
    q: Presentation, system: FibreSystem, qd: Presentation, kernel: Sequence[str]
) -> dict[str, bool]:
    stable = qd.generators[-1]
    without_t = kill_generators(qd, [stable])
    second_factor = list(system.GG.generators[system.G.rank :])
    first_factor = kill_generators(without_t, second_factor)
    audits = {
        "relator_count": len(qd.relators)
        == len(system.GG.relators) + len(system.p_generators),
        "kill_t_recovers_product": without_t == system.GG,
        "kill_t_factor_kernel_recovers_q": retraction_recovers(first_factor, kernel, q),
    }
    if not audits["relator_count"]:
        raise ConstructionError(
            f"{qd} has {len(qd.relators)} relators, expected "
            f"{len(system.GG.relators)} + {len(system.p_generators)}"
        )
    return audits


def dagger(
    q: Presentation, word_length: int = DEFAULT_WORD_LENGTH
) -> tuple[Presentation, DaggerProvenance]:
    """
    Q-dagger: Rips over q, then G x G, then a trivial HNN extension whose stable letter
    commutes with every generator of the fibre product P.
    """
    g, kernel, certificate = _rips_stage(q, word_length)
    system = _product_stage(g, kernel)
    qd, p_words = _hnn_stage(system, f"dagger({q.name or 'Q'})")
    audits = _dagger_audits(q, system, qd, kernel)
    provenance = DaggerProvenance(
        rips=certificate,
        product=system.GG,
        p_labels=system.p_labels,
        p_words=p_words,
        stable=qd.generators[-1],
        output=qd,
        audits=audits,
    )
    logger.info(f"Dagger construction {qd}: audits {audits}")
    return qd, provenance
