"""
Van Kampen area with certificates.

area() runs A* over cyclic words, one relator move per unit of cost, and rebuilds the
minimal product of conjugated relators in the frame of the input word. The product
is checked with verify_decomposition before it is returned.
"""

import heapq
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

from fibrecl.oracles import WordProblemOracle
from fibrecl.presentation import Presentation, SymmetrizedClosure
from fibrecl.rewriting import Move, canonical, successors
from fibrecl.utils import CertificateError, FibreclError, InvalidCapsError
from fibrecl.words import Word, cyclic_split, free_reduce, inverse_letters, min_rotation

logger = logging.getLogger("area")

NAIVE_SLACK = 4


@dataclass(frozen=True)
class AreaCaps:
    """
    length_cap: longest intermediate word (None: shelling bound |w| + depth * (L - 2))
    area_cap: largest area searched for
    state_cap: expanded states before giving up
    """

    length_cap: int | None = None
    area_cap: int = 32
    state_cap: int = 200_000

    def __post_init__(self):
        if self.length_cap is not None and self.length_cap < 1:
            raise InvalidCapsError("length_cap must be positive")
        if self.area_cap < 1 or self.state_cap < 1:
            raise InvalidCapsError("area_cap and state_cap must be positive")

    def to_dict(self) -> dict:
        return {
            "length_cap": self.length_cap,
            "area_cap": self.area_cap,
            "state_cap": self.state_cap,
        }


class AreaExhausted(FibreclError):
    """Search stopped by a cap. `lower_bound` is proven: every cheaper diagram was ruled out."""

    def __init__(self, lower_bound: int, states: int, reason: str):
        super().__init__(f"area search exhausted ({reason}): area >= {lower_bound}")
        self.lower_bound = lower_bound
        self.states = states
        self.reason = reason


@dataclass(frozen=True)
class Factor:
    theta: Word
    relator: Word

    def conjugate(self) -> Word:
        """theta^-1 . relator . theta"""
        return self.relator.conjugate(self.theta)


@dataclass(frozen=True)
class AreaDecomposition:
    factors: tuple[Factor, ...]

    @property
    def area(self) -> int:
        return len(self.factors)

    @property
    def noise(self) -> int:
        thetas = [Word.identity()] + [f.theta for f in self.factors] + [Word.identity()]
        return sum(len(a * b.inverse()) for a, b in itertools.pairwise(thetas))

    def product(self) -> Word:
        result = Word.identity()
        for factor in self.factors:
            result = result * factor.conjugate()
        return result

    def to_dict(self, presentation: Presentation) -> list[dict]:
        return [
            {"theta": presentation.format(f.theta), "relator": presentation.format(f.relator)}
            for f in self.factors
        ]


@dataclass(frozen=True)
class AreaResult:
    area: int
    decomposition: AreaDecomposition
    exact: bool
    states: int
    noise_bound: int

    @property
    def noise(self) -> int:
        return self.decomposition.noise

    @property
    def noise_bound_holds(self) -> bool:
        return self.noise <= self.noise_bound

    def to_dict(self, presentation: Presentation) -> dict:
        return {
            "area": self.area,
            "exact": self.exact,
            "states": self.states,
            "noise": self.noise,
            "noise_bound": self.noise_bound,
            "noise_bound_holds": self.noise_bound_holds,
            "certificate": self.decomposition.to_dict(presentation),
        }


def signed_area(letters: tuple[int, ...], i: int, j: int) -> int:
    """Signed area enclosed by the projection of a closed path onto the (x_i, x_j) plane."""
    x = 0
    total = 0
    for code in letters:
        generator = code >> 1
        step = -1 if code & 1 else 1
        if generator == i:
            x += step
        elif generator == j:
            total += step * x
    return total


class AreaHeuristic:
    """
    Consistent lower bound on the area of a cyclic word. One move changes each exponent
    sum by at most the largest relator sum, and each planar signed area by at most the
    largest relator signed area.
    """

    def __init__(self, presentation: Presentation):
        self.rank = presentation.rank
        matrix = presentation.abelian_matrix()
        self.sum_limits = [
            int(abs(matrix[:, i]).max()) if len(matrix) else 0 for i in range(self.rank)
        ]
        self.planes: list[tuple[int, int, int]] = []
        for i, j in itertools.combinations(range(self.rank), 2):
            if any(self.sum_limits[k] for k in (i, j)):
                continue
            limit = max(abs(signed_area(r.letters, i, j)) for r in presentation.relators)
            self.planes.append((i, j, limit))

    def __call__(self, letters: tuple[int, ...]) -> int | None:
        """None when no sequence of moves can reach the empty word."""
        sums = [0] * self.rank
        for code in letters:
            sums[code >> 1] += -1 if code & 1 else 1
        bound = 0
        for value, limit in zip(sums, self.sum_limits):
            if value == 0:
                continue
            if limit == 0:
                return None
            bound = max(bound, -(-abs(value) // limit))
        for i, j, limit in self.planes:
            enclosed = abs(signed_area(letters, i, j))
            if enclosed == 0:
                continue
            if limit == 0:
                return None
            bound = max(bound, -(-enclosed // limit))
        return bound


@lru_cache(maxsize=64)
def area_heuristic(presentation: Presentation) -> AreaHeuristic:
    return AreaHeuristic(presentation)


def _replay(word: Word, moves: list[Move]) -> AreaDecomposition:
    """
    Rebuild the product of conjugates in the frame of `word`. The current word is
    frame . state . frame^-1; each move peels one conjugate off the left, choosing the
    rotation direction that keeps consecutive conjugators closest.
    """
    core, prefix = cyclic_split(word.letters)
    state, offset = min_rotation(core)
    frame = Word(prefix + core[:offset])
    previous = Word.identity()
    factors = []
    for move in moves:
        before = Word(state[: move.position])
        after = Word(state[move.position :])
        first, second = frame * before, frame * after.inverse()
        chosen = second if len(previous * second) < len(previous * first) else first
        theta = chosen.inverse()
        factors.append(Factor(theta, move.relator))
        linear = move.apply(state)
        core, prefix = cyclic_split(linear)
        state, offset = min_rotation(core)
        frame = chosen * Word(prefix + core[:offset])
        previous = theta
    if state:
        raise CertificateError("Replayed moves do not end at the empty word")
    return AreaDecomposition(tuple(factors))


def area(
    presentation: Presentation,
    word: Word,
    caps: AreaCaps | None = None,
    oracle: WordProblemOracle | None = None,
) -> AreaResult:
    caps = caps or AreaCaps()
    start = canonical(word.letters)
    if not start:
        return AreaResult(0, AreaDecomposition(()), True, 0, len(word))
    if not presentation.relators:
        raise AreaExhausted(caps.area_cap + 1, 0, "no relators: word is not null-homotopic")
    heuristic = area_heuristic(presentation)
    h0 = heuristic(start)
    if h0 is None:
        raise AreaExhausted(caps.area_cap + 1, 0, "abelian obstruction: not null-homotopic")

    closure = presentation.closure
    growth = max(presentation.L - 2, 0)

    def length_cap(depth: int) -> int:
        if caps.length_cap is not None:
            return caps.length_cap
        return len(start) + depth * growth

    # a fixed cap below the shelling bound hides diagrams: only h0 stays proven
    pruned = False

    def proven(f: int) -> int:
        return h0 if pruned else f

    counter = itertools.count()
    best = {start: 0}
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], Move]] = {}
    heap = [(h0, 0, next(counter), start)]
    expanded = 0
    while heap:
        f, negative_depth, _, state = heapq.heappop(heap)
        g = -negative_depth
        if g > best[state]:
            continue
        if f > caps.area_cap:
            logger.debug(f"Area search passed area cap {caps.area_cap} after {expanded} states")
            raise AreaExhausted(proven(f), expanded, "area cap")
        if not state:
            break
        expanded += 1
        if expanded > caps.state_cap:
            logger.warning(f"Area search hit state cap {caps.state_cap} at bound {f}")
            raise AreaExhausted(proven(f), expanded, "state cap")
        if caps.length_cap is not None and caps.length_cap < len(start) + (g + 1) * growth:
            pruned = True
        for following, move in successors(state, closure, length_cap(g + 1)):
            depth = g + 1
            if depth >= best.get(following, depth + 1):
                continue
            h = heuristic(following)
            if h is None:
                continue
            best[following] = depth
            parent[following] = (state, move)
            heapq.heappush(heap, (depth + h, -depth, next(counter), following))
    else:
        if pruned:
            raise AreaExhausted(h0, expanded, "length_cap")
        raise AreaExhausted(caps.area_cap + 1, expanded, "search space closed")

    moves: list[Move] = []
    state = ()
    while state != start:
        state, move = parent[state]
        moves.append(move)
    moves.reverse()
    decomposition = _replay(word, moves)
    if not verify_decomposition(word, decomposition, closure):
        raise CertificateError(f"Certificate for {presentation.format(word)} failed verification")

    total = len(moves)
    exact = caps.length_cap is None or caps.length_cap >= len(start) + max(total - 1, 0) * growth
    noise_bound = total * presentation.L + len(word)
    result = AreaResult(total, decomposition, exact, expanded, noise_bound)
    if not result.noise_bound_holds:
        logger.warning(f"Certificate noise {result.noise} exceeds {noise_bound}")
    if oracle is not None and exact:
        oracle.observe_area(len(word), total)
    logger.debug(f"Area {total} for word of length {len(word)} after {expanded} states")
    return result


def verify_decomposition(
    word: Word, decomposition: AreaDecomposition, closure: SymmetrizedClosure | None = None
) -> bool:
    """
    The product of theta^-1 r theta over the factors must freely reduce to `word`;
    with a closure given, every r must also belong to it.
    """
    if closure is not None and any(f.relator not in closure for f in decomposition.factors):
        return False
    return decomposition.product() == word


def naive_area(
    presentation: Presentation,
    word: Word,
    length_cap: int | None = None,
    area_cap: int = 8,
) -> int | None:
    """
    Breadth-first relator application on linear words, with empty subwords allowed and no
    heuristic. Returns None when the area exceeds area_cap or needs longer words.
    """
    if length_cap is None:
        length_cap = len(word) + 2 * presentation.L + NAIVE_SLACK
    closure = presentation.closure
    layer = {word.letters}
    seen = set(layer)
    for depth in range(area_cap + 1):
        if () in layer:
            return depth
        following_layer = set()
        for letters in layer:
            for position in range(len(letters) + 1):
                for relator in closure:
                    for k in range(len(relator) + 1):
                        if letters[position : position + k] != relator.letters[:k]:
                            break
                        candidate = free_reduce(
                            letters[:position]
                            + inverse_letters(relator.letters[k:])
                            + letters[position + k :]
                        )
                        if len(candidate) <= length_cap and candidate not in seen:
                            seen.add(candidate)
                            following_layer.add(candidate)
        layer = following_layer
    return None
