"""
Witness-level audits of the inequalities relating the sampled functions.

Every audit sample is pass, fail or unknown; audits whose inequality only holds up to
constants report deviations as flagged. A sample with any ingredient that is not exact is
always unknown.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

from fibrecl.fibre import FibreSample, FibreSystem
from fibrecl.functions import torsion_free
from fibrecl.oracles import WordProblemOracle
from fibrecl.tables import MONOTONE_FUNCTIONS, FunctionTable, Sample

logger = logging.getLogger("audits")


class AuditStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    FLAGGED = "flagged"
    UNKNOWN = "unknown"


# severity order for the summary of a report
_RANK = [AuditStatus.PASS, AuditStatus.UNKNOWN, AuditStatus.FLAGGED, AuditStatus.FAIL]


@dataclass
class AuditSample:
    status: AuditStatus
    n: int | None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"n": self.n, "status": self.status.value, **self.detail}


@dataclass
class AuditReport:
    audit: str
    inequality: str
    constants: dict = field(default_factory=dict)
    samples: list[AuditSample] = field(default_factory=list)
    note: str | None = None

    @property
    def status(self) -> AuditStatus:
        if not self.samples:
            return AuditStatus.UNKNOWN
        return max((s.status for s in self.samples), key=_RANK.index)

    def count(self, status: AuditStatus) -> int:
        return sum(1 for s in self.samples if s.status is status)

    def to_dict(self) -> dict:
        data = {
            "audit": self.audit,
            "inequality": self.inequality,
            "constants": self.constants,
            "status": self.status.value,
            "counts": {status.value: self.count(status) for status in AuditStatus},
            "samples": [s.to_dict() for s in self.samples],
        }
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class AuditContext:
    """What an experiment has computed, as seen by the audits."""

    tables: dict[str, FunctionTable]
    oracle: WordProblemOracle
    system: FibreSystem | None = None
    fibre_samples: list[FibreSample] = field(default_factory=list)
    base_tables: dict[str, FunctionTable] = field(default_factory=dict)


def check(
    n: int | None,
    lhs: int | None,
    rhs: int | None,
    exact: bool,
    detail: dict,
    deviation: AuditStatus = AuditStatus.FAIL,
) -> AuditSample:
    """lhs <= rhs, decided only when both sides are known exactly."""
    detail = {"lhs": lhs, "rhs": rhs, **detail}
    if not exact or lhs is None or rhs is None:
        return AuditSample(AuditStatus.UNKNOWN, n, detail)
    if lhs <= rhs:
        return AuditSample(AuditStatus.PASS, n, detail)
    return AuditSample(deviation, n, detail)


def _pairs(
    first: FunctionTable, second: FunctionTable, shift: Callable[[int], int] = lambda n: n
) -> list[tuple[Sample, Sample]]:
    pairs = []
    for sample in first.samples:
        other = second.value_at(shift(sample.n))
        if other is not None:
            pairs.append((sample, other))
    return pairs


def _missing(report: AuditReport, *names: str) -> AuditReport:
    report.note = f"requires tables {', '.join(names)}"
    logger.warning(f"Audit {report.audit} skipped: {report.note}")
    return report


def audit_monotone(ctx: AuditContext) -> AuditReport:
    report = AuditReport("monotone", "f(n - 1) <= f(n) for f in delta, frak_m, frak_t, dist")
    for name in sorted(MONOTONE_FUNCTIONS & ctx.tables.keys()):
        samples = ctx.tables[name].samples
        for previous, sample in zip(samples, samples[1:]):
            report.samples.append(
                check(
                    sample.n,
                    previous.value,
                    sample.value,
                    previous.is_exact and sample.is_exact,
                    {"function": name, "previous_n": previous.n},
                )
            )
    return report


def audit_delta_le_delta_o(ctx: AuditContext) -> AuditReport:
    report = AuditReport("delta-le-delta-o", "delta(n) <= delta_o(n)")
    if not {"delta", "delta_o"} <= ctx.tables.keys():
        return _missing(report, "delta", "delta_o")
    for delta, delta_o in _pairs(ctx.tables["delta"], ctx.tables["delta_o"]):
        exact = delta.is_exact and delta_o.is_exact
        report.samples.append(check(delta.n, delta.value, delta_o.value, exact, {}))
    return report


def _without_system(report: AuditReport) -> AuditReport:
    report.note = "requires normal generators"
    logger.warning(f"Audit {report.audit} skipped: {report.note}")
    return report


def audit_distortion_upper(ctx: AuditContext) -> AuditReport:
    report = AuditReport(
        "distortion-upper",
        "|(g1, g2)|_P <= (L + 1) * Area_Q(w) + |w| + n, w = g2^-1 g1, n = |(g1, g2)|_GxG",
    )
    if ctx.system is None:
        return _without_system(report)
    L = ctx.system.L
    report.constants = {"L": {"value": L, "provenance": "computed"}}
    for sample in ctx.fibre_samples:
        exact = sample.area_exact and sample.gg_exact and sample.gg_length is not None
        bound = sample.lift_bound(L, sample.gg_length or 0)
        detail = {
            "g1": ctx.system.G.format(sample.g1),
            "g2": ctx.system.G.format(sample.g2),
            "area_q": sample.area_q,
        }
        report.samples.append(check(sample.gg_length, sample.p_length, bound, exact, detail))
    return report


def audit_half_length(ctx: AuditContext) -> AuditReport:
    report = AuditReport("half-length", "|(g1, g2)|_GxG <= 2 |(g1, g2)|_P")
    if ctx.system is None:
        return _without_system(report)
    report.constants = {"generator_length": {"value": 2, "provenance": "computed"}}
    for sample in ctx.fibre_samples:
        doubled = None if sample.p_length is None else 2 * sample.p_length
        detail = {
            "g1": ctx.system.G.format(sample.g1),
            "g2": ctx.system.G.format(sample.g2),
        }
        exact = sample.gg_exact and sample.gg_length is not None
        report.samples.append(check(sample.gg_length, sample.gg_length, doubled, exact, detail))
    return report


def audit_triangle(ctx: AuditContext) -> AuditReport:
    report = AuditReport("triangle", "|g2^-1 g1|_G <= |(g1, g2)|_GxG")
    if ctx.system is None:
        return _without_system(report)
    for sample in ctx.fibre_samples:
        detail = {"w": ctx.system.G.format(sample.w)}
        report.samples.append(
            check(sample.gg_length, sample.w_length_g, sample.gg_length, sample.gg_exact, detail)
        )
    return report


def audit_distortion_lower(ctx: AuditContext) -> AuditReport:
    report = AuditReport(
        "distortion-lower", "|(g1, g2)|_P - n <= |(g2^-1 g1, 1)|_P, n = |(g1, g2)|_GxG"
    )
    if ctx.system is None:
        return _without_system(report)
    for sample in ctx.fibre_samples:
        lhs = None
        if sample.p_length is not None and sample.gg_length is not None:
            lhs = sample.p_length - sample.gg_length
        detail = {"w": ctx.system.G.format(sample.w)}
        report.samples.append(
            check(sample.gg_length, lhs, sample.gamma_p_length, sample.gg_exact, detail)
        )
    return report


def audit_cl_relative_dominates(ctx: AuditContext) -> AuditReport:
    report = AuditReport("cl-relative-dominates", "CL_P(n) <= CL_P^GxG(2n)")
    if not {"cl", "cl_rel"} <= ctx.tables.keys():
        return _missing(report, "cl", "cl_rel")
    report.constants = {"scale": {"value": 2, "provenance": "computed"}}
    for cl, rel in _pairs(ctx.tables["cl"], ctx.tables["cl_rel"], lambda n: 2 * n):
        exact = cl.is_exact and rel.is_exact
        report.samples.append(
            check(cl.n, cl.value, rel.value, exact, {"rel_n": rel.n}, AuditStatus.FLAGGED)
        )
    return report


def audit_hnn_lower(ctx: AuditContext) -> AuditReport:
    report = AuditReport("hnn-lower", "delta_Gamma(n) <= delta_HNN(n)")
    if "delta" not in ctx.tables or "delta" not in ctx.base_tables:
        return _missing(report, "delta (base and extension)")
    for base, extension in _pairs(ctx.base_tables["delta"], ctx.tables["delta"]):
        exact = base.is_exact and extension.is_exact
        report.samples.append(check(base.n, base.value, extension.value, exact, {}))
    return report


def audit_torsion_free_coincide(ctx: AuditContext) -> AuditReport:
    report = AuditReport("torsion-free-coincide", "delta_c(n) = delta_z(n) = delta_o(n)")
    names = [name for name in ("delta_c", "delta_z", "delta_o") if name in ctx.tables]
    if len(names) < 2:
        return _missing(report, "two of delta_c, delta_z, delta_o")
    certified = torsion_free(ctx.oracle)
    report.constants = {"torsion_free": {"value": certified, "provenance": "computed"}}
    if not certified:
        report.note = "torsion not excluded"
    first = ctx.tables[names[0]]
    for sample in first.samples:
        row = [ctx.tables[name].value_at(sample.n) for name in names]
        if any(s is None for s in row):
            continue
        values = {name: s.value for name, s in zip(names, row)}
        if not certified or not all(s.is_exact for s in row):
            status = AuditStatus.UNKNOWN
        elif len(set(values.values())) == 1:
            status = AuditStatus.PASS
        else:
            status = AuditStatus.FAIL
        report.samples.append(AuditSample(status, sample.n, values))
    return report


AUDITS: dict[str, Callable[[AuditContext], AuditReport]] = {
    "monotone": audit_monotone,
    "delta-le-delta-o": audit_delta_le_delta_o,
    "distortion-upper": audit_distortion_upper,
    "half-length": audit_half_length,
    "triangle": audit_triangle,
    "distortion-lower": audit_distortion_lower,
    "cl-relative-dominates": audit_cl_relative_dominates,
    "hnn-lower": audit_hnn_lower,
    "torsion-free-coincide": audit_torsion_free_coincide,
}
FIBRE_AUDITS = frozenset({"distortion-upper", "half-length", "triangle", "distortion-lower"})


def run_audit(name: str, ctx: AuditContext) -> AuditReport:
    report = AUDITS[name](ctx)
    logger.info(
        f"Audit {name}: {report.status.value} "
        f"({report.count(AuditStatus.PASS)} pass, {report.count(AuditStatus.FAIL)} fail, "
        f"{report.count(AuditStatus.UNKNOWN)} unknown)"
    )
    return report
