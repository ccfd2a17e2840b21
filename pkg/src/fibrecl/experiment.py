"""
Experiment orchestration: a declarative config names a base presentation, a construction
pipeline, the functions to sample and the audits to run. Results are deterministic for a
given config and emitted as one JSON report plus one CSV per table.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml
from presentations import PRESENTATIONS
from schema import EXPERIMENT_SCHEMA

from fibrecl.area import AreaCaps
from fibrecl.audits import FIBRE_AUDITS, AuditContext, AuditReport, AuditStatus, run_audit
from fibrecl.conjugacy import ConjugatorCaps, Flavor, cl_table
from fibrecl.constructions import dagger, rips, trivial_hnn
from fibrecl.fibre import FibreCaps, FibreSample, FibreSystem, distortion, fibre_sample, members
from fibrecl.functions import PRODUCERS, FunctionCaps, function_table
from fibrecl.oracles import OracleBudget, oracle_for
from fibrecl.presentation import Presentation
from fibrecl.tables import FunctionTable, unique_names
from fibrecl.utils import ConfigError, FibreclError, dump_json, ordered_map, stage

logger = logging.getLogger("experiment")

SCHEMA_VERSION = 1
PIPELINES = ("none", "rips", "dagger", "hnn")
FIBRE_FUNCTIONS = frozenset({"dist", "cl_rel"})


def load_schema() -> dict:
    with open(EXPERIMENT_SCHEMA) as schema_file:
        return json.load(schema_file)


def with_defaults(schema: dict, instance: dict) -> dict:
    """Copy of instance with every missing property that has a schema default filled in."""
    filled = dict(instance)
    for key, prop in schema.get("properties", {}).items():
        if key not in filled and "default" in prop:
            filled[key] = json.loads(json.dumps(prop["default"]))
        if prop.get("type") == "object" and isinstance(filled.get(key), dict):
            filled[key] = with_defaults(prop, filled[key])
    return filled


def resolve_presentation(reference: str, base_dir: Path) -> Path:
    """A path relative to the config file, or the name of a bundled presentation."""
    candidates = [
        base_dir / reference,
        PRESENTATIONS / reference,
        PRESENTATIONS / f"{reference}.pres",
    ]
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise ConfigError(f"Presentation {reference!r} not found next to the config or bundled")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    presentation: str
    n_min: int
    n_max: int
    pipeline: str = "none"
    word_length: int = 16
    hnn_subgroup: tuple[str, ...] = ()
    normal_generators: tuple[str, ...] = ()
    functions: tuple[str, ...] = ()
    caps: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    audits: tuple[str, ...] = ()
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path = Path("."), name: str | None = None):
        schema = load_schema()
        try:
            jsonschema.validate(instance=data, schema=schema)
        except (jsonschema.ValidationError, jsonschema.SchemaError) as e:
            msg = f"Invalid experiment config: {e.message}"
            logger.error(msg)
            raise ConfigError(msg) from e
        data = with_defaults(schema, data)
        n_min, n_max = data["n"]["min"], data["n"]["max"]
        if n_min > n_max:
            raise ConfigError(f"Empty n range {n_min}..{n_max}")
        if not data["functions"] and not data["audits"]:
            raise ConfigError("Config names neither functions nor audits")
        return cls(
            name=data.get("name") or name or Path(data["presentation"]).stem,
            presentation=data["presentation"],
            n_min=n_min,
            n_max=n_max,
            pipeline=data["pipeline"],
            word_length=data["word_length"],
            hnn_subgroup=tuple(data["hnn_subgroup"]),
            normal_generators=tuple(data["normal_generators"]),
            functions=tuple(data["functions"]),
            caps=data["caps"],
            seed=data["seed"],
            output=data.get("output"),
            audits=tuple(data["audits"]),
            base_dir=base_dir,
        )

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            with open(path) as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            msg = f"Error reading experiment config {path}: {e}"
            logger.error(msg)
            raise ConfigError(msg) from e
        if not isinstance(data, dict):
            raise ConfigError(f"Experiment config {path} is not a mapping")
        return cls.from_dict(data, path.parent, path.stem)

    @property
    def ns(self) -> list[int]:
        return list(range(self.n_min, self.n_max + 1))

    @property
    def area_caps(self) -> AreaCaps:
        return AreaCaps(area_cap=self.caps["area"], state_cap=self.caps["states"])

    @property
    def function_caps(self) -> FunctionCaps:
        return FunctionCaps(
            area=self.area_caps,
            exponent_cap=self.caps["exponent"],
            element_cap=self.caps["elements"],
            quantifier=self.caps["quantifier"],
        )

    @property
    def fibre_caps(self) -> FibreCaps:
        return FibreCaps(
            p_radius=self.caps["p_radius"],
            element_cap=self.caps["elements"],
            area=self.area_caps,
        )

    @property
    def conjugator_caps(self) -> ConjugatorCaps:
        return ConjugatorCaps(
            radius=self.caps["radius"],
            exponent_cap=self.caps["exponent"],
            root_radius=max(self.caps["radius"], 1),
            quantifier=self.caps["quantifier"],
            fibre=self.fibre_caps,
        )

    @property
    def budget(self) -> OracleBudget:
        return OracleBudget(move_cap=self.caps["moves"])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "presentation": self.presentation,
            "pipeline": self.pipeline,
            "word_length": self.word_length,
            "hnn_subgroup": list(self.hnn_subgroup),
            "normal_generators": list(self.normal_generators),
            "functions": list(self.functions),
            "n": {"min": self.n_min, "max": self.n_max},
            "caps": dict(self.caps),
            "seed": self.seed,
            "audits": list(self.audits),
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    group: Presentation
    tables: list[FunctionTable]
    audits: list[AuditReport]
    provenance: dict | None = None
    log: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        """0 ok, 2 some audit failed, 3 nothing failed but some sample is not exact."""
        if any(report.count(AuditStatus.FAIL) for report in self.audits):
            return 2
        if any(not sample.is_exact for table in self.tables for sample in table.samples):
            return 3
        return 0

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.config.name,
            "config": self.config.to_dict(),
            "presentation": {
                "name": self.group.name,
                "generators": list(self.group.generators),
                "relators": [self.group.format(r) for r in self.group.relators],
            },
            "provenance": self.provenance,
            "tables": [table.to_dict() for table in self.tables],
            "audits": [report.to_dict() for report in self.audits],
            "log": list(self.log),
        }


@stage("load")
def _load(config: ExperimentConfig) -> Presentation:
    return Presentation.from_file(resolve_presentation(config.presentation, config.base_dir))


@stage("pipeline")
def _pipeline(
    config: ExperimentConfig, base: Presentation
) -> tuple[Presentation, tuple[str, ...], dict | None]:
    """The group the tables are sampled over, its normal generators and the provenance."""
    normal = config.normal_generators
    if config.pipeline == "none":
        return base, normal, None
    if config.pipeline == "rips":
        g, kernel, certificate = rips(base, config.word_length, seed=config.seed)
        return g, normal or kernel, certificate.to_dict()
    if config.pipeline == "dagger":
        qd, provenance = dagger(base, config.word_length)
        return qd, normal, provenance.to_dict()
    words = [base.word(text) for text in config.hnn_subgroup]
    hnn = trivial_hnn(base, words)
    return hnn, normal, {"stable": hnn.generators[-1], "subgroup": list(config.hnn_subgroup)}


def _sample_table(
    name: str,
    config: ExperimentConfig,
    group: Presentation,
    oracle,
    system: FibreSystem | None,
) -> FunctionTable:
    if name in PRODUCERS:
        return function_table(name, group, config.ns, oracle, config.function_caps)
    if name in FIBRE_FUNCTIONS and system is None:
        raise ConfigError(f"Function {name} needs normal_generators or the rips pipeline")
    table = FunctionTable(name, label=group.name)
    if name == "dist":
        table.budget = config.fibre_caps.to_dict()
        samples = ordered_map(lambda n: distortion(system, n, config.fibre_caps), config.ns)
    else:
        caps = config.conjugator_caps
        table.budget = caps.to_dict()
        if name == "cl_rel":
            target, flavor = system, Flavor.REL
        elif system is not None:
            target, flavor = system, Flavor.P
        else:
            target, flavor = oracle, Flavor.G
        samples = [cl_table(target, n, flavor, caps).to_sample() for n in config.ns]
    for sample in samples:
        table.add(sample)
    return table


@stage("tables")
def _tables(
    config: ExperimentConfig, group: Presentation, oracle, system: FibreSystem | None
) -> list[FunctionTable]:
    return [_sample_table(name, config, group, oracle, system) for name in config.functions]


@stage("fibre")
def _fibre_samples(config: ExperimentConfig, system: FibreSystem) -> list[FibreSample]:
    caps = config.fibre_caps
    found, complete = members(system, config.n_max, caps)
    if not complete:
        logger.warning(f"P-member scan up to n = {config.n_max} is incomplete")
    return ordered_map(
        lambda m: fibre_sample(m.g1, m.g2, system, caps, m.gg_length, m.gg_exact), found
    )


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    logger.info(f"Running experiment {config.name} ({config.pipeline} pipeline)")
    log = []
    base = _load(config)
    log.append(f"loaded {base.name}: {base.rank} generators, {len(base.relators)} relators")
    group, normal, provenance = _pipeline(config, base)
    log.append(
        f"{config.pipeline} pipeline: {group.rank} generators, {len(group.relators)} relators"
    )
    oracle = oracle_for(group, config.budget)
    log.append(f"oracle: {oracle.kind}")

    system = None
    if normal:
        try:
            system = FibreSystem(group, normal, config.budget)
        except FibreclError as e:
            msg = f"Error building the fibre system: {e}"
            logger.error(msg)
            raise ConfigError(msg) from e
        log.append(f"fibre system with A = {list(system.a_names)}")

    tables = _tables(config, group, oracle, system)
    ctx = AuditContext({table.name: table for table in tables}, oracle, system)
    if system is not None and FIBRE_AUDITS & set(config.audits):
        ctx.fibre_samples = _fibre_samples(config, system)
        log.append(f"{len(ctx.fibre_samples)} P-members up to n = {config.n_max}")
    if "hnn-lower" in config.audits and config.pipeline == "hnn":
        base_oracle = oracle_for(base, config.budget)
        ctx.base_tables["delta"] = function_table(
            "delta", base, config.ns, base_oracle, config.function_caps
        )
    audits = [run_audit(name, ctx) for name in config.audits]
    result = ExperimentResult(config, group, tables, audits, provenance, log)
    logger.info(f"Experiment {config.name} finished with exit code {result.exit_code}")
    return result


def run_experiments(configs: list[ExperimentConfig]) -> list[ExperimentResult]:
    """Independent experiments on the worker pool, results in config order."""
    return ordered_map(run_experiment, configs)


def emit(result: ExperimentResult, output: Path, formats: tuple[str, ...] = ("json", "csv")):
    """
    Write <experiment>.json and one <experiment>_<table>.csv per table into `output`.
    Repeated table names are disambiguated as name, name_2, ...
    """
    output = Path(output)
    output.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        path = output / f"{result.config.name}.json"
        path.write_text(dump_json(result.to_dict()), encoding="utf-8")
        written.append(path)
    if "csv" in formats:
        for stem, table in zip(unique_names(result.tables), result.tables):
            path = output / f"{result.config.name}_{stem}.csv"
            path.write_text(table.to_csv(), encoding="utf-8")
            written.append(path)
    logger.info(f"Wrote {len(written)} files to {output}")
    return written


def load_tables(path: Path) -> list[FunctionTable]:
    """Tables of an emitted JSON report."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path} has schema version {data.get('schema_version')}")
    return [FunctionTable.from_dict(table) for table in data["tables"]]
