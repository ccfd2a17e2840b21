#!/usr/bin/env python3
import json

import pytest
from presentations import PRESENTATIONS
from test_base import TestBase

from fibrecl.audits import AuditStatus
from fibrecl.experiment import (
    SCHEMA_VERSION,
    ExperimentConfig,
    emit,
    load_tables,
    run_experiment,
    run_experiments,
)
from fibrecl.utils import ConfigError, StageError

base = TestBase()

Z2_DELTA = {
    "presentation": "z2",
    "functions": ["delta"],
    "n": {"max": 4},
    "audits": ["monotone"],
}


def test_config_defaults():
    config = ExperimentConfig.from_dict(Z2_DELTA)
    assert config.name == "z2"
    assert config.pipeline == "none"
    assert config.ns == [0, 1, 2, 3, 4]
    assert config.caps["radius"] == 4
    assert config.caps["area"] == 32
    assert config.caps["quantifier"] == "sum"
    assert config.area_caps.area_cap == 32
    assert config.budget.move_cap == 8


def test_config_caps_map_onto_the_budgets():
    config = ExperimentConfig.from_dict({**Z2_DELTA, "caps": {"radius": 2, "moves": 3}})
    assert config.conjugator_caps.radius == 2
    assert config.budget.move_cap == 3
    assert config.fibre_caps.p_radius == 6


def test_config_errors():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**Z2_DELTA, "n": {"min": 3, "max": 1}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"presentation": "z2", "n": {"max": 2}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**Z2_DELTA, "colour": "blue"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**Z2_DELTA, "functions": ["area"]})
    broken = base.workdir("configs") / "broken.yaml"
    broken.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(broken)


def test_bundled_config_loads():
    config = ExperimentConfig.from_file(PRESENTATIONS / "z2_delta.yaml")
    assert config.name == "z2_delta"
    assert config.functions == ("delta", "delta_o")
    assert config.audits == ("monotone", "delta-le-delta-o")
    assert config.base_dir == PRESENTATIONS


def test_run_dehn_experiment():
    result = run_experiment(ExperimentConfig.from_dict(Z2_DELTA))
    (table,) = result.tables
    assert [s.value for s in table.samples] == [0, 0, 0, 0, 1]
    (report,) = result.audits
    assert report.status is AuditStatus.PASS
    assert result.exit_code == 0
    assert result.to_dict()["schema_version"] == SCHEMA_VERSION


def test_runs_are_deterministic():
    config = ExperimentConfig.from_dict(Z2_DELTA)
    first, second = run_experiments([config, config])
    assert first.to_dict() == second.to_dict()


def test_fibre_experiment_audits_pass():
    data = {
        "presentation": "f2",
        "normal_generators": ["x"],
        "functions": ["dist"],
        "n": {"max": 2},
        "audits": ["distortion-upper", "half-length", "triangle", "distortion-lower", "monotone"],
    }
    result = run_experiment(ExperimentConfig.from_dict(data))
    assert [s.value for s in result.tables[0].samples] == [0, 2, 4]
    assert all(report.status is AuditStatus.PASS for report in result.audits)
    assert result.exit_code == 0


def test_hnn_pipeline():
    data = {
        "presentation": "z",
        "pipeline": "hnn",
        "hnn_subgroup": ["x^2"],
        "functions": ["delta"],
        "n": {"max": 2},
    }
    result = run_experiment(ExperimentConfig.from_dict(data))
    assert result.group.generators == ("x", "t")
    assert result.provenance == {"stable": "t", "subgroup": ["x^2"]}


def test_stage_errors_name_the_stage():
    missing = ExperimentConfig.from_dict({**Z2_DELTA, "presentation": "nowhere.pres"})
    with pytest.raises(StageError) as loading:
        run_experiment(missing)
    assert loading.value.stage == "load"
    unfibred = ExperimentConfig.from_dict({**Z2_DELTA, "functions": ["dist"]})
    with pytest.raises(StageError) as tables:
        run_experiment(unfibred)
    assert tables.value.stage == "tables"


def test_emit_and_reload():
    result = run_experiment(ExperimentConfig.from_dict(Z2_DELTA))
    output = base.workdir("emitted")
    written = emit(result, output)
    assert [path.name for path in written] == ["z2.json", "z2_delta.csv"]
    assert (output / "z2_delta.csv").read_text().startswith("n,value,exactness\n0,0,exact\n")
    (table,) = load_tables(output / "z2.json")
    assert table == result.tables[0]
    stale = output / "stale.json"
    stale.write_text(json.dumps({"schema_version": 0, "tables": []}))
    with pytest.raises(ConfigError):
        load_tables(stale)


if __name__ == "__main__":
    base.run_all(globals())
