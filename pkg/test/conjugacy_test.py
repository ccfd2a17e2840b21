#!/usr/bin/env python3
import random

import pytest
from test_base import TestBase

from fibrecl.conjugacy import (
    ConjugatorCaps,
    ConjugatorExhausted,
    Flavor,
    SearchStatus,
    SemigroupStatus,
    centralizer_decomposition_audit,
    certify_not_conjugate,
    cl_table,
    conjugacy_search,
    construct_P_conjugator,
    cyclic_semigroup_membership,
    exponent_pairs,
    hard_conjugacy_instance,
    reduce_exponent,
)
from fibrecl.constructions import rips
from fibrecl.fibre import FibreCaps, make_fibre_system
from fibrecl.oracles import Verdict, oracle_for
from fibrecl.tables import Exactness
from fibrecl.utils import InvalidCapsError, NonMemberError
from fibrecl.words import Word, enumerate_words, letter

base = TestBase()
f2 = base.presentation("f2")
z = base.presentation("z")
z3 = base.presentation("z3")
system = make_fibre_system(f2, ["x"])
x, y = f2.word("x"), f2.word("y")
one = Word.identity()


def test_conjugacy_search_in_free_group():
    oracle = oracle_for(f2)
    result = conjugacy_search(oracle, x, f2.word("y x y^-1"), 2)
    assert result.status is SearchStatus.FOUND
    assert result.length == 1
    assert f2.format(result.conjugator) == "y^-1"
    assert conjugacy_search(oracle, x, x, 2).length == 0
    assert conjugacy_search(oracle, x, y, 2).status is SearchStatus.NOT_FOUND
    with pytest.raises(InvalidCapsError):
        conjugacy_search(oracle, x, y, -1)


def test_certify_not_conjugate():
    oracle = oracle_for(f2)
    assert certify_not_conjugate(x, y, oracle)
    assert certify_not_conjugate(x, x.inverse(), oracle)
    assert not certify_not_conjugate(x, f2.word("y x y^-1"), oracle)
    assert not certify_not_conjugate(f2.word("x y"), f2.word("y x"), oracle)


def test_conjugator_length_in_free_group():
    summed = cl_table(oracle_for(f2), 2)
    assert summed.value == 0
    assert summed.exactness is Exactness.EXACT
    maxed = cl_table(oracle_for(f2), 2, caps=ConjugatorCaps(quantifier="max"))
    assert maxed.value == 1
    assert maxed.exactness is Exactness.EXACT
    # x y and y x are conjugate by a single letter
    wider = cl_table(oracle_for(f2), 4)
    assert wider.value == 1
    assert wider.to_sample().witness["flavor"] == "g"
    with pytest.raises(InvalidCapsError):
        cl_table(oracle_for(f2), 2, Flavor.P)


def test_exponent_helpers():
    assert reduce_exponent(5, 4) == 1
    assert reduce_exponent(3, 4) == -1
    assert reduce_exponent(2, 4) == 2
    assert reduce_exponent(-5, 4) == -1
    assert reduce_exponent(7, None) == 7
    pairs = exponent_pairs(1)
    assert pairs[:3] == [(0, 0), (-1, -1), (1, 1)]
    assert len(pairs) == 9
    assert pairs[3:7] == [(-1, 0), (0, -1), (0, 1), (1, 0)]


def test_diagonal_conjugator():
    certificate = construct_P_conjugator((x, one), (f2.word("y x y^-1"), one), system)
    assert certificate.stages == ["diagonal", "lift", "verify"]
    assert certificate.verified
    assert system.format_p(certificate.zeta) == "(y,y)^-1"


def test_hard_instance_and_staged_conjugator():
    instance = hard_conjugacy_instance(system, 3)
    assert instance.gamma_p_length == 3
    assert instance.exact
    assert len(instance.v_p_word) == 2 * len(instance.gamma) + 3
    certificate = construct_P_conjugator(instance.U, instance.V, system)
    assert certificate.stages == [
        "reduce",
        "roots",
        "gamma",
        "exponents",
        "normalize",
        "lift",
        "verify",
    ]
    assert certificate.verified
    assert certificate.record["q1"] == 0 and certificate.record["q2"] == 0
    assert certificate.to_dict(system)["zeta_length"] == certificate.length
    conjugator = system.transcribe(certificate.zeta)
    assert centralizer_decomposition_audit(instance, conjugator, system) is Verdict.TRIVIAL


def test_conjugator_rejects_non_members():
    with pytest.raises(NonMemberError):
        construct_P_conjugator((y, one), (y, one), system)


def test_non_conjugate_coordinates_stop_the_pipeline():
    with pytest.raises(ConjugatorExhausted) as stopped:
        construct_P_conjugator((one, x), (x, f2.word("y x y^-1")), system)
    assert stopped.value.stage == "conjugacy"


def random_p_word(rng: random.Random) -> Word:
    size = rng.randint(1, 2)
    return Word(tuple(letter(rng.randrange(3), rng.choice((1, -1))) for _ in range(size)))


def test_constructed_conjugators_against_the_shortest():
    rng = random.Random(11)
    ball = system.p_ball(FibreCaps(p_radius=4))
    checked = 0
    for n in (1, 2, 3):
        instance = hard_conjugacy_instance(system, n)
        assert construct_P_conjugator(instance.U, instance.V, system).verified
        checked += 1
    while checked < 53:
        big_u = system.transcribe(random_p_word(rng))
        if system.oracle_gg.query(big_u) is Verdict.TRIVIAL:
            continue
        big_v = big_u.conjugate(system.transcribe(random_p_word(rng)))
        U, V = system.project(big_u), system.project(big_v)
        certificate = construct_P_conjugator(U, V, system)
        assert certificate.verified
        shortest = conjugacy_search(system.oracle_gg, big_u, big_v, 4, ball=ball)
        assert shortest.found
        assert certificate.length >= shortest.length
        checked += 1


def test_normalized_exponent_over_a_torsion_quotient():
    g, kernel, _ = rips(z3)
    torsion = make_fibre_system(g, kernel)
    u, a = g.word("x"), g.word(kernel[0])
    certificate = construct_P_conjugator((u, u), (u.conjugate(a), u), torsion)
    assert "normalize" in certificate.stages
    omega = certificate.record["omega"]
    assert omega == 3
    assert 2 * abs(certificate.record["p_double_prime"]) <= omega
    assert certificate.verified


def test_cyclic_semigroup_membership():
    oracle = oracle_for(z)
    member = cyclic_semigroup_membership(z.word("x^3"), z.word("x"), oracle, 5)
    assert member.status is SemigroupStatus.MEMBER
    assert member.p == 3
    outside = cyclic_semigroup_membership(z.word("x^-1"), z.word("x"), oracle, 5, rho_valid=True)
    assert outside.status is SemigroupStatus.NONMEMBER
    unsure = cyclic_semigroup_membership(z.word("x^-1"), z.word("x"), oracle, 5)
    assert unsure.status is SemigroupStatus.UNKNOWN
    torsion = cyclic_semigroup_membership(z3.word("x^2"), z3.word("x"), oracle_for(z3), 3)
    assert torsion.to_dict() == {"status": "member", "p": 2}
    with pytest.raises(InvalidCapsError):
        cyclic_semigroup_membership(z.word("x"), z.word("x"), oracle, 0)


def test_semigroup_membership_matches_exponent_sums():
    for presentation, modulus in ((z, None), (base.presentation("z2"), None), (z3, 3)):
        oracle = oracle_for(presentation)
        rank = presentation.rank
        words = list(enumerate_words(rank, 3))
        for u in words:
            for w in words:
                sums = u.exponent_sums(rank)
                step = w.exponent_sums(rank)
                expected = None
                for p in range(1, 4):
                    diff = [s - p * t for s, t in zip(sums, step)]
                    if modulus is not None:
                        diff = [d % modulus for d in diff]
                    if not any(diff):
                        expected = p
                        break
                found = cyclic_semigroup_membership(u, w, oracle, 3, rho_valid=True)
                if expected is None:
                    assert found.status is SemigroupStatus.NONMEMBER
                else:
                    assert found.status is SemigroupStatus.MEMBER
                    assert found.p == expected


if __name__ == "__main__":
    base.run_all(globals())
