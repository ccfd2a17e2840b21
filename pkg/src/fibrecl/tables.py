"""
Sampled function tables: Dehn-type functions, distortion and conjugator length.
"""

import csv
import io
import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

from tabulate import tabulate

logger = logging.getLogger("tables")

FUNCTION_NAMES = (
    "delta",
    "delta_c",
    "delta_z",
    "delta_o",
    "frak_m",
    "frak_t",
    "dist",
    "cl",
    "cl_rel",
)
MONOTONE_FUNCTIONS = frozenset({"delta", "frak_m", "frak_t", "dist"})


class Exactness(Enum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"
    BUDGET_EXHAUSTED = "budget_exhausted"

    @classmethod
    def worst(cls, flags: Iterable["Exactness"]) -> "Exactness":
        rank = [cls.EXACT, cls.LOWER_BOUND, cls.BUDGET_EXHAUSTED]
        return max(flags, key=rank.index, default=cls.EXACT)


@dataclass
class Sample:
    n: int
    value: int | None
    exactness: Exactness = Exactness.EXACT
    witness: dict | None = None

    @property
    def is_exact(self) -> bool:
        return self.exactness is Exactness.EXACT

    def to_dict(self) -> dict:
        data = {"n": self.n, "value": self.value, "exactness": self.exactness.value}
        if self.witness is not None:
            data["witness"] = self.witness
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Sample":
        return cls(data["n"], data["value"], Exactness(data["exactness"]), data.get("witness"))


@dataclass
class FunctionTable:
    name: str
    samples: list[Sample] = field(default_factory=list)
    budget: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if self.name not in FUNCTION_NAMES:
            raise ValueError(f"Unknown function name {self.name!r}")

    def add(self, sample: Sample):
        if self.samples and sample.n <= self.samples[-1].n:
            raise ValueError(f"Sample n={sample.n} does not follow n={self.samples[-1].n}")
        self.samples.append(sample)

    def value_at(self, n: int) -> Sample | None:
        return next((s for s in self.samples if s.n == n), None)

    def exact_samples(self) -> list[Sample]:
        return [s for s in self.samples if s.is_exact]

    @property
    def exactness(self) -> Exactness:
        return Exactness.worst(s.exactness for s in self.samples)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "label": self.label,
            "budget": self.budget,
            "samples": [s.to_dict() for s in self.samples],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FunctionTable":
        return cls(
            data["name"],
            [Sample.from_dict(s) for s in data["samples"]],
            data.get("budget", {}),
            data.get("label"),
        )

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["n", "value", "exactness"])
        for sample in self.samples:
            value = "" if sample.value is None else sample.value
            writer.writerow([sample.n, value, sample.exactness.value])
        return buffer.getvalue()

    def to_markdown(self) -> str:
        rows = [[s.n, s.value, s.exactness.value] for s in self.samples]
        return tabulate(rows, headers=["n", self.name, "exactness"], tablefmt="github")


def unique_names(tables: list[FunctionTable]) -> list[str]:
    """File stems for emitted tables: name, name_2, name_3, ..."""
    counts: dict[str, int] = {}
    names = []
    for table in tables:
        counts[table.name] = counts.get(table.name, 0) + 1
        count = counts[table.name]
        names.append(table.name if count == 1 else f"{table.name}_{count}")
    return names
