#!/usr/bin/env python3
import pytest
from test_base import TestBase

from fibrecl.functions import (
    FunctionCaps,
    dehn_function,
    function_table,
    infinite_order,
    rel_cyclics_family,
    return_of_cyclics,
    torsion_evolution,
    torsion_free,
)
from fibrecl.oracles import oracle_for, order_of
from fibrecl.tables import Exactness, FunctionTable, Sample, unique_names
from fibrecl.utils import InvalidCapsError

base = TestBase()
z = base.presentation("z")
z2 = base.presentation("z2")
z3 = base.presentation("z3")
f2 = base.presentation("f2")


def test_dehn_function_of_z2():
    table = function_table("delta", z2, range(0, 7))
    assert [s.value for s in table.samples] == [0, 0, 0, 0, 1, 1, 2]
    assert table.exactness is Exactness.EXACT
    assert table.value_at(6).witness["area"] == 2
    assert table.label == "Z2"


def test_dehn_function_of_z3():
    oracle = oracle_for(z3)
    assert dehn_function(z3, 3, oracle).value == 1
    assert dehn_function(z3, 6, oracle).value == 2
    with pytest.raises(InvalidCapsError):
        dehn_function(z3, -1, oracle)


def test_rel_cyclics_variants_on_torsion():
    oracle = oracle_for(z3)
    delta_o = rel_cyclics_family(z3, 1, oracle, variant="o")
    assert delta_o.value == 4
    assert abs(delta_o.witness["p"]) == 3
    assert delta_o.is_exact
    assert rel_cyclics_family(z3, 1, oracle, variant="c").value == 0
    assert rel_cyclics_family(z3, 1, oracle, variant="z").value == 0
    with pytest.raises(InvalidCapsError):
        rel_cyclics_family(z3, 1, oracle, variant="q")


def test_rel_cyclics_in_infinite_cyclic_group():
    oracle = oracle_for(z)
    sample = rel_cyclics_family(z, 2, oracle, variant="c")
    assert sample.value == 2
    assert sample.is_exact
    assert rel_cyclics_family(z, 2, oracle, variant="z").value == 2


def test_quantifier_changes_the_length_budget():
    oracle = oracle_for(z)
    summed = rel_cyclics_family(z, 2, oracle, FunctionCaps(quantifier="sum"), "z")
    maxed = rel_cyclics_family(z, 2, oracle, FunctionCaps(quantifier="max"), "z")
    assert maxed.value >= summed.value
    # max lets w = x^-2 pair with u = x at n = 2, so p = 2
    assert maxed.value == 4


def test_return_of_cyclics():
    assert return_of_cyclics(z, 3, oracle_for(z)).value == 3
    assert return_of_cyclics(f2, 2, oracle_for(f2)).value == 2
    assert return_of_cyclics(z3, 3, oracle_for(z3)).value == 0


def test_torsion_evolution():
    assert torsion_evolution(z3, 1, oracle_for(z3)).value == 3
    assert torsion_evolution(z3, 0, oracle_for(z3)).value == 1
    assert torsion_evolution(z2, 2, oracle_for(z2)).value == 1


def test_cyclic_tables_are_named_frak():
    torsion = function_table("frak_t", z3, [0, 1])
    assert torsion.name == "frak_t"
    assert [s.value for s in torsion.samples] == [1, 3]
    assert function_table("frak_m", z, [3]).to_dict()["name"] == "frak_m"


def test_torsion_free_certification():
    assert torsion_free(oracle_for(f2))
    assert torsion_free(oracle_for(z2))
    assert not torsion_free(oracle_for(z3))
    oracle = oracle_for(z2)
    assert infinite_order(z2.word("x"), oracle, order_of(z2.word("x"), oracle, 8))


def test_function_table_rejects_unknown_names():
    with pytest.raises(ValueError):
        function_table("dist", z2, [1])
    with pytest.raises(ValueError):
        FunctionTable("area")


def test_tables_serialize():
    table = FunctionTable("delta", label="Z2")
    table.add(Sample(0, 0))
    table.add(Sample(1, None, Exactness.BUDGET_EXHAUSTED))
    assert table.to_csv() == "n,value,exactness\n0,0,exact\n1,,budget_exhausted\n"
    assert FunctionTable.from_dict(table.to_dict()) == table
    assert table.exactness is Exactness.BUDGET_EXHAUSTED
    with pytest.raises(ValueError):
        table.add(Sample(1, 0))
    assert unique_names([table, FunctionTable("delta"), FunctionTable("dist")]) == [
        "delta",
        "delta_2",
        "dist",
    ]


if __name__ == "__main__":
    base.run_all(globals())
