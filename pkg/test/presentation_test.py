#!/usr/bin/env python3
from fractions import Fraction

import pytest
from test_base import TestBase

from fibrecl.presentation import (
    Presentation,
    direct_product_presentation,
    is_small_cancellation,
    kill_generators,
    parse_presentation,
    piece_ratio_bruteforce,
    serialize_presentation,
    small_cancellation_lambda,
)
from fibrecl.utils import (
    EmptyRelatorError,
    NoRelatorsError,
    PresentationSyntaxError,
    UnknownGeneratorError,
)

base = TestBase()


def test_bundled_presentations_load():
    z2 = base.presentation("z2")
    assert z2.name == "Z2"
    assert z2.generators == ("x", "y")
    assert len(z2.relators) == 1
    assert z2.L == 4
    assert base.presentation("f2").relators == ()
    assert base.presentation("z3").format(base.presentation("z3").relators[0]) == "x^3"


def test_parse_reports_line_and_column():
    with pytest.raises(PresentationSyntaxError) as missing:
        parse_presentation("rel: x\n")
    assert missing.value.line == 1
    with pytest.raises(PresentationSyntaxError) as bad_key:
        parse_presentation("gens: x y\nrelator: x y\n")
    assert bad_key.value.line == 2
    assert bad_key.value.column == 1
    with pytest.raises(PresentationSyntaxError) as malformed:
        parse_presentation("gens: x y\nrel: x y^^2\n")
    assert malformed.value.line == 2
    assert malformed.value.column == 8
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens: x x\n")


def test_parse_rejects_unknown_generators_and_empty_relators():
    with pytest.raises(UnknownGeneratorError):
        parse_presentation("gens: x\nrel: x z\n")
    with pytest.raises(EmptyRelatorError):
        parse_presentation("gens: x y\nrel: x y y^-1 x^-1\n")


def test_comments_and_serialization():
    text = "# the free abelian group of rank 2\nname: Z2\ngens: x y\nrel: x y x^-1 y^-1  # [x, y]\n"
    presentation = parse_presentation(text)
    assert serialize_presentation(presentation) == (
        "name: Z2\ngens: x y\nrel: x y x^-1 y^-1\n"
    )
    assert parse_presentation(serialize_presentation(presentation)) == presentation


def test_relators_are_cyclically_reduced_and_deduplicated():
    presentation = Presentation.from_text("gens: x y\nrel: y x^3 y^-1\nrel: x^3\n")
    assert len(presentation.relators) == 1
    assert presentation.format(presentation.relators[0]) == "x^3"


def test_small_cancellation_lambda():
    z2 = base.presentation("z2")
    assert small_cancellation_lambda(z2) == Fraction(1, 4)
    assert piece_ratio_bruteforce(z2.closure) == Fraction(1, 4)
    assert not is_small_cancellation(z2)
    assert len(z2.closure) == 8
    with pytest.raises(NoRelatorsError):
        small_cancellation_lambda(base.presentation("f2"))
    assert not is_small_cancellation(base.presentation("f2"))


def test_scan_agrees_with_bruteforce():
    presentation = Presentation.from_text(
        "gens: a b c\nrel: a b c a^-1 b^2 c^-2\nrel: a^2 b c^3 b^-1\n"
    )
    assert small_cancellation_lambda(presentation) == piece_ratio_bruteforce(presentation.closure)


def test_direct_product_renames_on_clash():
    z = base.presentation("z")
    product = direct_product_presentation(z, z)
    assert product.generators == ("x", "x_2")
    assert len(product.relators) == 1
    assert product.format(product.relators[0]) == "x x_2 x^-1 x_2^-1"


def test_kill_generators():
    z2 = base.presentation("z2")
    killed = kill_generators(z2, ["y"])
    assert killed.generators == ("x",)
    assert killed.relators == ()
    with pytest.raises(UnknownGeneratorError):
        kill_generators(z2, ["w"])


if __name__ == "__main__":
    base.run_all(globals())
