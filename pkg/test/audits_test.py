#!/usr/bin/env python3
from test_base import TestBase

from fibrecl.audits import AuditContext, AuditStatus, run_audit
from fibrecl.fibre import FibreCaps, fibre_sample, make_fibre_system, members
from fibrecl.oracles import oracle_for
from fibrecl.tables import Exactness, FunctionTable, Sample
from fibrecl.words import Word

base = TestBase()
z2 = base.presentation("z2")
z3 = base.presentation("z3")
f2 = base.presentation("f2")


def make_table(name: str, values: list, start: int = 0, exactness=Exactness.EXACT):
    table = FunctionTable(name)
    for n, value in enumerate(values, start):
        table.add(Sample(n, value, exactness))
    return table


def context(*tables: FunctionTable, presentation=z2) -> AuditContext:
    return AuditContext({t.name: t for t in tables}, oracle_for(presentation))


def test_monotone():
    passing = run_audit("monotone", context(make_table("delta", [0, 1, 1, 4])))
    assert passing.status is AuditStatus.PASS
    assert passing.count(AuditStatus.PASS) == 3
    failing = run_audit("monotone", context(make_table("dist", [0, 2, 1])))
    assert failing.status is AuditStatus.FAIL
    assert failing.to_dict()["samples"][-1]["function"] == "dist"


def test_inexact_samples_are_unknown():
    table = make_table("delta", [0, 3, 1], exactness=Exactness.LOWER_BOUND)
    report = run_audit("monotone", context(table))
    assert report.status is AuditStatus.UNKNOWN
    assert report.count(AuditStatus.FAIL) == 0


def test_delta_le_delta_o():
    tables = (make_table("delta", [0, 1, 2]), make_table("delta_o", [0, 2, 2]))
    assert run_audit("delta-le-delta-o", context(*tables)).status is AuditStatus.PASS
    missing = run_audit("delta-le-delta-o", context(make_table("delta", [0])))
    assert missing.status is AuditStatus.UNKNOWN
    assert missing.note == "requires tables delta, delta_o"


def test_relative_conjugator_length_is_flagged_not_failed():
    tables = (make_table("cl", [0, 3]), make_table("cl_rel", [0, 1, 1]))
    report = run_audit("cl-relative-dominates", context(*tables))
    assert report.status is AuditStatus.FLAGGED
    assert report.constants["scale"]["value"] == 2
    assert [s.detail["rel_n"] for s in report.samples] == [0, 2]


def test_torsion_free_coincide():
    tables = (make_table("delta_c", [0, 2]), make_table("delta_z", [0, 2]))
    report = run_audit("torsion-free-coincide", context(*tables))
    assert report.status is AuditStatus.PASS
    assert report.constants["torsion_free"]["value"] is True
    differing = (make_table("delta_c", [0, 2]), make_table("delta_z", [0, 3]))
    assert run_audit("torsion-free-coincide", context(*differing)).status is AuditStatus.FAIL
    torsion = run_audit("torsion-free-coincide", context(*differing, presentation=z3))
    assert torsion.status is AuditStatus.UNKNOWN
    assert torsion.note == "torsion not excluded"


def test_fibre_audits_need_a_system():
    for name in ("distortion-upper", "half-length", "triangle", "distortion-lower"):
        report = run_audit(name, context(make_table("dist", [0])))
        assert report.status is AuditStatus.UNKNOWN
        assert report.note == "requires normal generators"


def test_fibre_audits_on_a_truncated_product_ball():
    system = make_fibre_system(f2, ["x"])
    found, complete = members(system, 2, FibreCaps(element_cap=5))
    assert not complete
    assert [(f2.format(m.g1), m.gg_length, m.gg_exact) for m in found] == [
        ("1", 0, True),
        ("x", 1, False),
        ("x^-1", 1, False),
    ]
    caps = FibreCaps()
    truncated = [fibre_sample(m.g1, m.g2, system, caps, m.gg_length, m.gg_exact) for m in found]
    certified = fibre_sample(f2.word("x"), Word.identity(), system, caps, 1)
    ctx = AuditContext({}, oracle_for(f2), system, truncated + [certified])
    for name in ("distortion-upper", "half-length", "triangle", "distortion-lower"):
        statuses = [sample.status for sample in run_audit(name, ctx).samples]
        assert statuses == [
            AuditStatus.PASS,
            AuditStatus.UNKNOWN,
            AuditStatus.UNKNOWN,
            AuditStatus.PASS,
        ], name


if __name__ == "__main__":
    base.run_all(globals())
