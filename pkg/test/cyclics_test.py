#!/usr/bin/env python3
from fractions import Fraction

import networkx as nx
import pytest
from test_base import TestBase

from fibrecl.cyclics import (
    BallIndex,
    ball_for,
    geodesic_length,
    primitive_root,
    tau_report,
    translation_number_bound,
    umc_estimate,
    uqc_estimate,
)
from fibrecl.oracles import Verdict, oracle_for
from fibrecl.utils import InvalidCapsError, RootNotFoundError

base = TestBase()
z2 = base.presentation("z2")
z3 = base.presentation("z3")
f2 = base.presentation("f2")
x2_central = base.presentation("x2_central")


def test_ball_sizes():
    # 1 + 4 + 8 elements of Z2 within distance 2
    ball = ball_for(oracle_for(z2), 2)
    assert len(ball) == 13
    assert ball.complete
    assert ball_for(oracle_for(z3), 3).elements == [
        z3.word("1"),
        z3.word("x"),
        z3.word("x^-1"),
    ]
    assert len(ball_for(oracle_for(f2), 2)) == 17


def test_ball_representatives_are_shortlex_geodesics():
    oracle = oracle_for(z2)
    ball = ball_for(oracle, 2)
    index = ball.find(z2.word("y x"))
    assert ball.elements[index] == z2.word("x y")
    assert ball.lengths[index] == 2
    assert geodesic_length(z2.word("y x y^-1"), ball) == 1
    assert geodesic_length(z2.word("x^3"), ball) is None


def test_conjugated_generators_in_x2_central():
    oracle = oracle_for(x2_central)
    ball = ball_for(oracle, 5)
    for n in (1, 2):
        word = x2_central.word(f"y^{n} x y^-{n}")
        assert geodesic_length(word, ball) == 2 * n + 1
        assert oracle.equal(word.power(2), x2_central.word("x^2")) is Verdict.TRIVIAL


def test_ball_graph():
    ball = ball_for(oracle_for(z3), 1)
    assert ball.graph.number_of_nodes() == 3
    target = base.workdir("graphs") / "z3.graphml"
    ball.write_graphml(target)
    loaded = nx.read_graphml(target)
    assert loaded.number_of_nodes() == 3


def test_ball_over_other_generators():
    oracle = oracle_for(f2)
    square = f2.word("x^2")
    ball = BallIndex(oracle, 2, generators=[square], labels=["s"])
    assert len(ball) == 5
    index = ball.find(f2.word("x^-4"))
    assert ball.lengths[index] == 2
    assert ball.step_labels[ball.spelling(index).letters[0]] == "s^-1"


def test_uqc_on_free_group():
    report = uqc_estimate(oracle_for(f2), 3, 5)
    assert report.value == 1
    assert report.torsion_witness is None
    assert report.ball_complete


def test_uqc_sees_torsion():
    report = uqc_estimate(oracle_for(z3), 2, 4)
    assert report.torsion_witness["order"] == 3
    assert report.extra["lambda_positive"] is False


def test_translation_numbers():
    ball = ball_for(oracle_for(f2), 3)
    assert translation_number_bound(f2.word("x"), 4, ball).value == 1
    bound = translation_number_bound(f2.word("x y x^-1"), 4, ball)
    assert bound.value == Fraction(3, 2)
    assert bound.n == 4
    assert translation_number_bound(f2.word("1"), 4, ball).value == 0
    with pytest.raises(InvalidCapsError):
        translation_number_bound(f2.word("x"), 0, ball)


def test_umc_detects_shrinking_powers():
    # (y x y^-1)^2 = x^2, so a power can be shorter than the element
    report = umc_estimate(oracle_for(x2_central), 3, 2)
    assert report.value >= Fraction(3, 2)
    assert report.witness["length_p"] < report.witness["length_i"]


def test_tau_report_lists_bounds():
    report = tau_report(oracle_for(f2), 2, 3)
    assert report.value == 1
    assert report.extra["tau_upper"]["x"]["tau_upper"] == "1"


def test_primitive_roots():
    oracle = oracle_for(f2)
    root = primitive_root(f2.word("x^4"), oracle, 4, 8)
    assert root.root == f2.word("x")
    assert root.exponent == 4
    unrooted = primitive_root(f2.word("x y"), oracle, 4, 8)
    assert unrooted.exponent == 1
    with pytest.raises(RootNotFoundError):
        primitive_root(f2.word("x^5"), oracle, 4, 8)


if __name__ == "__main__":
    base.run_all(globals())
