#!/usr/bin/env python3
import random
from fractions import Fraction

import pytest
from test_base import TestBase

from fibrecl.area import (
    AreaCaps,
    AreaDecomposition,
    AreaExhausted,
    Factor,
    area,
    naive_area,
    signed_area,
    verify_decomposition,
)
from fibrecl.constructions import random_null_word
from fibrecl.oracles import oracle_for
from fibrecl.utils import InvalidCapsError
from fibrecl.words import commutator

base = TestBase()
z2 = base.presentation("z2")
z3 = base.presentation("z3")
x, y = z2.word("x"), z2.word("y")


def test_commutator_area_is_quadratic():
    for n in (1, 2, 3):
        word = commutator(x.power(n), y.power(n))
        result = area(z2, word)
        assert result.area == n * n
        assert result.exact
        assert verify_decomposition(word, result.decomposition, z2.closure)


def test_certificate_reproduces_the_word():
    word = z2.word("y x^2 y x^-2 y^-2")
    result = area(z2, word)
    assert result.area == 2
    assert result.decomposition.product() == word
    assert all(f.relator in z2.closure for f in result.decomposition.factors)
    assert len(result.to_dict(z2)["certificate"]) == 2


def test_torsion_area():
    assert area(z3, z3.word("x^3")).area == 1
    assert area(z3, z3.word("x^6")).area == 2
    assert area(z3, z3.word("1")).area == 0


def test_nontrivial_words_exhaust():
    with pytest.raises(AreaExhausted) as abelian:
        area(z2, x)
    assert abelian.value.reason.startswith("abelian obstruction")
    with pytest.raises(AreaExhausted):
        area(base.presentation("f2"), base.presentation("f2").word("x y x^-1 y^-1"))


def test_area_cap_gives_a_lower_bound():
    with pytest.raises(AreaExhausted) as capped:
        area(z2, commutator(x.power(3), y.power(3)), AreaCaps(area_cap=4))
    assert capped.value.lower_bound == 9
    assert capped.value.reason == "area cap"
    with pytest.raises(InvalidCapsError):
        AreaCaps(area_cap=0)


def test_fixed_length_cap_below_shelling_bound():
    word = z2.word("x^2 y x^-2 y^-1")
    with pytest.raises(AreaExhausted) as capped:
        area(z2, word, AreaCaps(length_cap=2))
    assert capped.value.reason == "length_cap"
    assert capped.value.lower_bound == 2
    assert area(z2, word).area == 2


def test_area_feeds_the_isoperimetric_observation():
    oracle = oracle_for(z2)
    area(z2, commutator(x, y), oracle=oracle)
    assert oracle.stats.iso_constant == Fraction(1, 4)


def test_naive_area_agrees_on_small_words():
    assert naive_area(z2, commutator(x, y)) == 1
    assert naive_area(z3, z3.word("x^6")) == 2
    assert naive_area(z2, commutator(x, y), area_cap=0) is None


def test_certificates_of_random_null_words_verify():
    rng = random.Random(7)
    batches = [(z2, 500), (z3, 300), (base.presentation("x2_central"), 200)]
    checked = 0
    for presentation, count in batches:
        for _ in range(count):
            word = random_null_word(presentation, rng, max_factors=2, conjugator_length=2)
            result = area(presentation, word)
            assert result.area <= 2
            assert verify_decomposition(word, result.decomposition, presentation.closure)
            checked += 1
    assert checked == 1000


def test_signed_area_and_verification():
    assert signed_area(commutator(x, y).letters, 0, 1) == 1
    assert signed_area(commutator(y, x).letters, 0, 1) == -1
    relator = z2.relators[0]
    decomposition = AreaDecomposition((Factor(y, relator),))
    assert verify_decomposition(relator.conjugate(y), decomposition, z2.closure)
    assert not verify_decomposition(relator, decomposition, z2.closure)
    bogus = AreaDecomposition((Factor(y, x),))
    assert not verify_decomposition(x.conjugate(y), bogus, z2.closure)


if __name__ == "__main__":
    base.run_all(globals())
