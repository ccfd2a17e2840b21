#!/usr/bin/env python3
import pytest
from test_base import TestBase

from fibrecl.oracles import (
    BallOracle,
    Membership,
    OracleBudget,
    OrderKind,
    ProductOracle,
    Verdict,
    dehn_reduce,
    detect_trivial_hnn,
    oracle_for,
    order_of,
    product_oracle,
)
from fibrecl.presentation import Presentation
from fibrecl.quotients import AbelianFilter, CosetTable, PermutationQuotients
from fibrecl.utils import AlphabetClashError, InvalidCapsError, NotSmallCancellationError
from fibrecl.words import Word

base = TestBase()
z2 = base.presentation("z2")
z3 = base.presentation("z3")
f2 = base.presentation("f2")
x2_central = base.presentation("x2_central")

# cyclic ternary de Bruijn word: every piece has at most two letters
SMALL_CANCELLATION = Presentation.from_text(
    "name: SC\ngens: a b c\nrel: a^3 b a^2 c a b^2 a b c a c b a c^2 b^3 c b c^3\n"
)


def test_oracle_selection():
    assert oracle_for(f2).kind == "free"
    assert oracle_for(z3).kind == "ball"
    assert oracle_for(z2).kind == "britton"
    assert oracle_for(x2_central).kind == "britton"
    assert oracle_for(SMALL_CANCELLATION).kind == "dehn"
    killed = Presentation.from_text("gens: x y\nrel: y\nrel: x^3\n")
    assert oracle_for(killed).kind == "tietze"


def test_free_oracle():
    oracle = oracle_for(f2)
    assert oracle.query(f2.word("x y y^-1 x^-1")) is Verdict.TRIVIAL
    assert oracle.query(f2.word("x y x^-1 y^-1")) is Verdict.NONTRIVIAL
    assert oracle.equal(f2.word("x y"), f2.word("x y")) is Verdict.TRIVIAL


def test_britton_oracle_on_z2():
    oracle = oracle_for(z2)
    assert oracle.query(z2.word("x y x^-1 y^-1")) is Verdict.TRIVIAL
    assert oracle.query(z2.word("x^2 y^3 x^-2 y^-3")) is Verdict.TRIVIAL
    assert oracle.query(z2.word("x y")) is Verdict.NONTRIVIAL
    assert oracle.equal(z2.word("x y"), z2.word("y x")) is Verdict.TRIVIAL


def test_britton_membership_in_associated_subgroup():
    oracle = oracle_for(x2_central)
    assert oracle.membership(x2_central.word("x^4")) is Membership.MEMBER
    assert oracle.membership(x2_central.word("x^3")) is Membership.NONMEMBER
    assert oracle.query(x2_central.word("y x^2 y^-1 x^-2")) is Verdict.TRIVIAL
    assert oracle.query(x2_central.word("y x y^-1 x^-1")) is Verdict.NONTRIVIAL
    assert oracle.equal(x2_central.word("y x y^-1 y x y^-1"), x2_central.word("x^2")) is (
        Verdict.TRIVIAL
    )


def test_detect_trivial_hnn():
    structure = detect_trivial_hnn(z2)
    assert structure is not None
    assert z2.generators[structure.stable] == "y"
    assert structure.base.generators == ("x",)
    assert detect_trivial_hnn(z3) is None


def test_dehn_oracle():
    oracle = oracle_for(SMALL_CANCELLATION)
    relator = SMALL_CANCELLATION.relators[0]
    conjugated = relator.conjugate(SMALL_CANCELLATION.word("a b^-1"))
    assert oracle.query(conjugated * relator.inverse()) is Verdict.TRIVIAL
    assert dehn_reduce(SMALL_CANCELLATION, relator.power(2)) == Word.identity()
    assert oracle.query(SMALL_CANCELLATION.word("a b")) is Verdict.NONTRIVIAL
    with pytest.raises(NotSmallCancellationError):
        dehn_reduce(z2, z2.word("x"))


def test_ball_oracle_on_finite_group():
    oracle = oracle_for(z3)
    assert oracle.query(z3.word("x^3")) is Verdict.TRIVIAL
    assert oracle.query(z3.word("x^-6")) is Verdict.TRIVIAL
    assert oracle.query(z3.word("x")) is Verdict.NONTRIVIAL
    assert oracle.equal(z3.word("x^2"), z3.word("x^-1")) is Verdict.TRIVIAL


def test_ball_oracle_budget():
    oracle = BallOracle(z2, radius=4, move_cap=0)
    # abelian image decides nontriviality without any search
    assert oracle.query(z2.word("x")) is Verdict.NONTRIVIAL
    assert oracle.query(z2.word("x y x^-1 y^-1")) is Verdict.UNKNOWN
    assert oracle.stats.unknowns == 1
    with pytest.raises(InvalidCapsError):
        OracleBudget(move_cap=-1)


def test_product_oracle():
    with pytest.raises(AlphabetClashError):
        product_oracle(oracle_for(z3), oracle_for(z3))
    square = ProductOracle.square(oracle_for(z3))
    assert square.presentation.generators == ("x", "x_2")
    word = square.presentation.word("x^3 x_2")
    assert square.project(word) == (z3.word("x^3"), z3.word("x"))
    assert square.query(word) is Verdict.NONTRIVIAL
    assert square.query(square.presentation.word("x^3 x_2^-3")) is Verdict.TRIVIAL


def test_order_of():
    assert order_of(z3.word("x"), oracle_for(z3), 10).value == 3
    assert order_of(z3.word("1"), oracle_for(z3), 10).value == 1
    infinite = order_of(z2.word("x"), oracle_for(z2), 10)
    assert infinite.kind is OrderKind.INFINITE_UP_TO_BOUND
    assert infinite.value == 10
    with pytest.raises(InvalidCapsError):
        order_of(z2.word("x"), oracle_for(z2), 0)


def test_quotient_filters():
    abelian = AbelianFilter(z2)
    assert abelian.free_rank == 2
    assert abelian.certifies_nontrivial(z2.word("x y^-2"))
    assert not abelian.certifies_nontrivial(z2.word("x y x^-1 y^-1"))
    assert AbelianFilter(z3).free_rank == 0
    quotients = PermutationQuotients(z3)
    assert quotients.maps
    assert quotients.certifies_nontrivial(z3.word("x"))
    assert not quotients.certifies_nontrivial(z3.word("x^3"))


def test_coset_table_closes_for_finite_groups():
    table = CosetTable(z3)
    assert table.complete
    assert table.order == 3
    assert table.is_trivial(z3.word("x^3"))
    assert not table.is_trivial(z3.word("x^2"))
    assert not CosetTable(z2, coset_cap=200).complete


if __name__ == "__main__":
    base.run_all(globals())
