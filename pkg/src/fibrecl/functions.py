"""
Dehn-type functions sampled one n at a time: the Dehn function, the rel-cyclics family
(delta^c, delta^z, delta^o), return of cyclics and torsion evolution.

Every sample carries an exactness flag. A value is exact only when every oracle verdict,
order computation and area search behind it was decided within its caps.
"""

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from functools import partial

from fibrecl.area import AreaCaps, AreaExhausted, area
from fibrecl.cyclics import ball_for, geodesic_length
from fibrecl.oracles import (
    BrittonOracle,
    DehnOracle,
    FreeOracle,
    Order,
    OrderKind,
    ProductOracle,
    TietzeOracle,
    Verdict,
    WordProblemOracle,
    oracle_for,
    order_of,
)
from fibrecl.presentation import Presentation
from fibrecl.rewriting import canonical
from fibrecl.tables import Exactness, FunctionTable, Sample
from fibrecl.utils import InvalidCapsError, ordered_map
from fibrecl.words import Word, cyclic_split, enumerate_words

logger = logging.getLogger("functions")

VARIANTS = ("c", "z", "o")
QUANTIFIERS = ("sum", "max")


@dataclass(frozen=True)
class FunctionCaps:
    """
    area: caps for every area search
    exponent_cap: cutoff for order and exponent scans (None: area.area_cap)
    element_cap: elements per Cayley ball
    quantifier: "sum" bounds |w| + |u| by n, "max" bounds max(|w|, |u|) by n
    """

    area: AreaCaps = field(default_factory=AreaCaps)
    exponent_cap: int | None = None
    element_cap: int = 20_000
    quantifier: str = "sum"

    def __post_init__(self):
        if self.exponent_cap is not None and self.exponent_cap < 1:
            raise InvalidCapsError("exponent_cap must be at least 1")
        if self.element_cap < 1:
            raise InvalidCapsError("element_cap must be positive")
        if self.quantifier not in QUANTIFIERS:
            raise InvalidCapsError(f"quantifier must be one of {QUANTIFIERS}")

    @property
    def cutoff(self) -> int:
        return self.exponent_cap or self.area.area_cap

    def to_dict(self) -> dict:
        return {
            "area": self.area.to_dict(),
            "exponent_cap": self.cutoff,
            "element_cap": self.element_cap,
            "quantifier": self.quantifier,
        }


def _is_proper_power(word: Word) -> bool:
    core, _ = cyclic_split(word.letters)
    n = len(core)
    return any(n % d == 0 and core == core[:d] * (n // d) for d in range(1, n))


def torsion_free(oracle: WordProblemOracle) -> bool:
    """
    True only when the group is known to be torsion-free: free groups, C'(1/6) groups
    without proper-power relators, trivial HNN extensions and direct products of such.
    """
    if isinstance(oracle, FreeOracle):
        return True
    if isinstance(oracle, TietzeOracle):
        return torsion_free(oracle.inner)
    if isinstance(oracle, DehnOracle):
        return not any(_is_proper_power(r) for r in oracle.presentation.relators)
    if isinstance(oracle, BrittonOracle):
        return torsion_free(oracle.base_oracle)
    if isinstance(oracle, ProductOracle):
        return torsion_free(oracle.first) and torsion_free(oracle.second)
    return False


def infinite_order(word: Word, oracle: WordProblemOracle, order: Order) -> bool:
    """Certified o(word) = infinity, given the result of an order scan."""
    if not order.is_infinite:
        return False
    if torsion_free(oracle):
        return True
    # a nonzero image in the free part of the abelianization has infinite order
    return oracle.invariants.abelian.certifies_nontrivial(word)


@dataclass
class _Best:
    value: int = 0
    witness: dict | None = None
    flags: list[Exactness] = field(default_factory=list)

    def offer(self, value: int, witness: dict):
        if self.witness is None or value > self.value:
            self.value, self.witness = value, witness

    def flag(self, exactness: Exactness):
        self.flags.append(exactness)

    def sample(self, n: int) -> Sample:
        return Sample(n, self.value, Exactness.worst(self.flags), self.witness)


def _area_or_bound(
    presentation: Presentation, word: Word, caps: FunctionCaps, oracle: WordProblemOracle
) -> tuple[int, Exactness]:
    try:
        result = area(presentation, word, caps.area, oracle)
    except AreaExhausted as e:
        logger.debug(f"Area of {presentation.format(word)} exhausted: {e.reason}")
        return e.lower_bound, Exactness.BUDGET_EXHAUSTED
    if not result.exact:
        return result.area, Exactness.BUDGET_EXHAUSTED
    return result.area, Exactness.EXACT


def _areas(
    presentation: Presentation,
    words: Iterable[Word],
    caps: FunctionCaps,
    oracle: WordProblemOracle,
) -> dict[tuple[int, ...], tuple[int, Exactness]]:
    """Areas keyed by canonical cyclic word, computed once each on the worker pool."""
    keys = list(dict.fromkeys(canonical(w.letters) for w in words))
    results = ordered_map(
        lambda key: _area_or_bound(presentation, Word.trusted(key), caps, oracle), keys
    )
    return dict(zip(keys, results))


def dehn_function(
    presentation: Presentation,
    n: int,
    oracle: WordProblemOracle,
    caps: FunctionCaps | None = None,
) -> Sample:
    """delta(n): largest area of a null-homotopic word of length <= n."""
    caps = caps or FunctionCaps()
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    best = _Best()
    null_words = []
    for word in enumerate_words(presentation.rank, n, 1):
        # area is invariant under cyclic permutation and every rotation class is enumerated
        if canonical(word.letters) != word.letters:
            continue
        verdict = oracle.query(word)
        if verdict is Verdict.UNKNOWN:
            best.flag(Exactness.LOWER_BOUND)
        elif verdict is Verdict.TRIVIAL:
            null_words.append(word)
    areas = _areas(presentation, null_words, caps, oracle)
    for word in null_words:
        value, exactness = areas[word.letters]
        best.flag(exactness)
        best.offer(value, {"w": presentation.format(word), "area": value})
    logger.debug(f"delta({n}) = {best.value} over {len(null_words)} null words")
    return best.sample(n)


@dataclass
class _Cyclic:
    """Per-u data shared by every w paired with u."""

    u: Word
    order: Order
    trivial: bool
    infinite: bool


def _solve_exponent(w: Word, u: Word, oracle: WordProblemOracle) -> int | None:
    """The only p that can make w u^p trivial when u has nonzero abelian image."""
    abelian = oracle.invariants.abelian
    pw, pu = abelian.project(w), abelian.project(u)
    pivot = int(abs(pu).argmax())
    ratio = -pw[pivot] / pu[pivot]
    p = round(ratio)
    if abs(ratio - p) > 1e-9 or abs(pw + p * pu).max() > 1e-9:
        return None
    return p


def _exponents(
    w: Word, cyclic: _Cyclic, variant: str, oracle: WordProblemOracle, cutoff: int
) -> tuple[list[int], Exactness]:
    """Exponents p allowed by the variant with w u^p trivial."""
    u = cyclic.u
    if cyclic.trivial:
        if variant == "z":
            return [], Exactness.EXACT
        verdict = oracle.query(w)
        if verdict is Verdict.UNKNOWN:
            return [], Exactness.BUDGET_EXHAUSTED
        return ([0] if verdict is Verdict.TRIVIAL else []), Exactness.EXACT

    if cyclic.order.is_finite:
        if variant == "z":
            return [], Exactness.EXACT
        o = cyclic.order.value
        limit = o // 2 if variant == "c" else o
        found, exactness = [], Exactness.EXACT
        for p in sorted(range(-limit, limit + 1), key=lambda p: (abs(p), p)):
            verdict = oracle.query(w * u.power(p))
            if verdict is Verdict.TRIVIAL:
                found.append(p)
            elif verdict is Verdict.UNKNOWN:
                exactness = Exactness.BUDGET_EXHAUSTED
        return found, exactness

    if not cyclic.infinite:
        return [], Exactness.BUDGET_EXHAUSTED

    # infinite order: at most one p works
    if oracle.invariants.abelian.certifies_nontrivial(u):
        p = _solve_exponent(w, u, oracle)
        if p is None:
            return [], Exactness.EXACT
        verdict = oracle.query(w * u.power(p))
        if verdict is Verdict.UNKNOWN:
            return [], Exactness.BUDGET_EXHAUSTED
        return ([p] if verdict is Verdict.TRIVIAL else []), Exactness.EXACT
    undecided = False
    for magnitude in range(cutoff + 1):
        for p in (magnitude, -magnitude) if magnitude else (0,):
            verdict = oracle.query(w * u.power(p))
            if verdict is Verdict.TRIVIAL:
                return [p], Exactness.EXACT
            if verdict is Verdict.UNKNOWN:
                undecided = True
    if undecided:
        return [], Exactness.BUDGET_EXHAUSTED
    if isinstance(oracle, FreeOracle):
        # in a free group |u^p| >= |p| * |core(u)|, so the scan covered every candidate
        core, _ = cyclic_split(u.letters)
        if len(w) // len(core) <= cutoff:
            return [], Exactness.EXACT
    return [], Exactness.LOWER_BOUND


def rel_cyclics_family(
    presentation: Presentation,
    n: int,
    oracle: WordProblemOracle,
    caps: FunctionCaps | None = None,
    variant: str = "c",
) -> Sample:
    """
    max Area(w u^p) + |p| n over words w, u within the length budget and exponents p with
    w = u^-p, where p is constrained by the variant:
      c: |p| <= o(u) / 2     z: o(u) infinite     o: |p| <= o(u)
    A trivial u only contributes p = 0.
    """
    caps = caps or FunctionCaps()
    if variant not in VARIANTS:
        raise InvalidCapsError(f"variant must be one of {VARIANTS}")
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    cutoff = caps.cutoff
    best = _Best()
    candidates: list[tuple[Word, Word, int]] = []
    for u in enumerate_words(presentation.rank, n):
        order = order_of(u, oracle, cutoff)
        if order.kind is OrderKind.UNKNOWN:
            best.flag(Exactness.BUDGET_EXHAUSTED)
            continue
        trivial = order.is_finite and order.value == 1
        cyclic = _Cyclic(u, order, trivial, infinite_order(u, oracle, order))
        w_budget = n - len(u) if caps.quantifier == "sum" else n
        for w in enumerate_words(presentation.rank, w_budget):
            exponents, exactness = _exponents(w, cyclic, variant, oracle, cutoff)
            best.flag(exactness)
            candidates.extend((w, u, p) for p in exponents)

    areas = _areas(presentation, (w * u.power(p) for w, u, p in candidates), caps, oracle)
    for w, u, p in candidates:
        value, exactness = areas[canonical((w * u.power(p)).letters)]
        best.flag(exactness)
        best.offer(
            value + abs(p) * n,
            {
                "w": presentation.format(w),
                "u": presentation.format(u),
                "p": p,
                "area": value,
            },
        )
    logger.debug(f"delta_{variant}({n}) = {best.value} over {len(candidates)} pairs")
    return best.sample(n)


def return_of_cyclics(
    presentation: Presentation,
    n: int,
    oracle: WordProblemOracle,
    caps: FunctionCaps | None = None,
) -> Sample:
    """m(n): largest p with |u|, |u^p| <= n for some u of infinite order."""
    caps = caps or FunctionCaps()
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    best = _Best()
    ball = ball_for(oracle, n, caps.element_cap)
    if not ball.complete:
        best.flag(Exactness.LOWER_BOUND)
    free = isinstance(oracle, FreeOracle)
    for u in ball.elements[1:]:
        order = order_of(u, oracle, caps.cutoff)
        if not infinite_order(u, oracle, order):
            if not order.is_finite:
                best.flag(Exactness.LOWER_BOUND)
            continue
        if free:
            # free reduction is geodesic and |u^p| grows with p
            p = 1
            while len(u.power(p + 1)) <= n:
                p += 1
            best.offer(p, {"u": presentation.format(u), "p": p})
            continue
        # the powers of u are distinct, so at most len(ball) of them fit in the ball
        limit = len(ball) if ball.complete else caps.cutoff
        if limit > caps.cutoff:
            best.flag(Exactness.LOWER_BOUND)
        for p in range(1, min(limit, caps.cutoff) + 1):
            if geodesic_length(u.power(p), ball) is not None:
                best.offer(p, {"u": presentation.format(u), "p": p})
    logger.debug(f"m({n}) = {best.value}")
    return best.sample(n)


def torsion_evolution(
    presentation: Presentation,
    n: int,
    oracle: WordProblemOracle,
    caps: FunctionCaps | None = None,
) -> Sample:
    """t(n): largest finite order of an element of length <= n. The identity has order 1."""
    caps = caps or FunctionCaps()
    if n < 0:
        raise InvalidCapsError("n must be non-negative")
    best = _Best(1, {"u": "1", "order": 1})
    ball = ball_for(oracle, n, caps.element_cap)
    if not ball.complete:
        best.flag(Exactness.LOWER_BOUND)
    for u in ball.elements[1:]:
        order = order_of(u, oracle, caps.cutoff)
        if order.is_finite:
            best.offer(order.value, {"u": presentation.format(u), "order": order.value})
        elif order.kind is OrderKind.UNKNOWN:
            best.flag(Exactness.BUDGET_EXHAUSTED)
        elif not infinite_order(u, oracle, order):
            best.flag(Exactness.LOWER_BOUND)
    logger.debug(f"t({n}) = {best.value}")
    return best.sample(n)


SampleProducer = Callable[[Presentation, int, WordProblemOracle, FunctionCaps], Sample]

PRODUCERS: dict[str, SampleProducer] = {
    "delta": dehn_function,
    "delta_c": partial(rel_cyclics_family, variant="c"),
    "delta_z": partial(rel_cyclics_family, variant="z"),
    "delta_o": partial(rel_cyclics_family, variant="o"),
    "frak_m": return_of_cyclics,
    "frak_t": torsion_evolution,
}


def function_table(
    name: str,
    presentation: Presentation,
    ns: Iterable[int],
    oracle: WordProblemOracle | None = None,
    caps: FunctionCaps | None = None,
    label: str | None = None,
) -> FunctionTable:
    """Sample one of the Dehn-type functions at every n, in increasing order."""
    if name not in PRODUCERS:
        raise ValueError(f"{name!r} is not a Dehn-type function; choose from {list(PRODUCERS)}")
    caps = caps or FunctionCaps()
    oracle = oracle or oracle_for(presentation)
    producer = PRODUCERS[name]
    values = sorted(set(ns))
    logger.info(f"Sampling {name} over {presentation} at n = {values}")
    table = FunctionTable(name, budget=caps.to_dict(), label=label or presentation.name)
    for sample in ordered_map(lambda n: producer(presentation, n, oracle, caps), values):
        table.add(sample)
    return table
