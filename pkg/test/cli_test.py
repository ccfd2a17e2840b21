#!/usr/bin/env python3
import json
from pathlib import Path

import click
from cli.main import cli
from presentations import PRESENTATIONS
from test_base import TestBase

from fibrecl.presentation import Presentation

base = TestBase()


def test_word_problem():
    result = base.fibcli(["wp", "z2", "x y x^-1 y^-1"])
    assert result.exit_code == 0
    assert result.stdout.strip() == "trivial (britton oracle)"
    result = base.fibcli(["wp", "z2", "x y", "--equals", "y x", "--json"])
    data = json.loads(result.stdout)
    assert data["verdict"] == "trivial"
    assert data["equals"] == "y x"


def test_bad_input_exits_with_4():
    assert base.fibcli(["wp", "z2", "x^^2"]).exit_code == 4
    assert base.fibcli(["wp", "nowhere", "x"]).exit_code == 4
    assert base.fibcli(["wp", "z2", "z"]).exit_code == 4
    assert base.fibcli("table delta z2 --n-min 3 --n-max 1").exit_code == 4


def test_usage_errors_exit_with_4():
    assert base.fibcli("table nonsense z2 --n-max 1").exit_code == 4
    assert base.fibcli("table delta z2").exit_code == 4
    assert base.fibcli("table delta z2 --n-max 2 --area-cap abc").exit_code == 4
    assert base.fibcli("fibre dist f2 --n-max 2").exit_code == 4
    assert base.fibcli("frobnicate").exit_code == 4
    missing = base.workdir("usage") / "missing.yaml"
    assert base.fibcli(["run", "--config", str(missing)]).exit_code == 4
    assert base.fibcli("table --help").exit_code == 0


def test_area():
    result = base.fibcli(["area", "z2", "x y x^-1 y^-1"])
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["area"] == 1
    assert len(data["certificate"]) == 1
    exhausted = base.fibcli(["area", "z2", "x"])
    assert exhausted.exit_code == 3
    assert json.loads(exhausted.stdout)["reason"].startswith("abelian obstruction")
    naive = base.fibcli(["area", "z3", "x^6", "--naive"])
    assert json.loads(naive.stdout) == {"word": "x^6", "area": 2, "found": True}


def test_table_csv():
    result = base.fibcli("table delta z2 --n-max 4 --format csv")
    assert result.exit_code == 0
    assert result.stdout == (
        "n,value,exactness\n0,0,exact\n1,0,exact\n2,0,exact\n3,0,exact\n4,1,exact\n"
    )


def test_conjugator_length_table():
    result = base.fibcli("cl f2 --n-max 2 --format csv")
    assert result.exit_code == 0
    assert result.stdout == "n,value,exactness\n0,0,exact\n1,0,exact\n2,0,exact\n"
    assert base.fibcli("cl f2 --n-max 2 --flavor p").exit_code == 4


def test_cyclics_report():
    graphml = base.workdir("cyclics") / "f2.graphml"
    args = ["cyclics", "f2", "--report", "uqc", "--radius", "3", "--powers", "5"]
    result = base.fibcli(args + ["--graphml", str(graphml)])
    data = json.loads(result.stdout)
    assert data["uqc"]["value"] == "1"
    assert "umc" not in data
    assert graphml.is_file()


def test_fibre_commands():
    made = json.loads(base.fibcli("fibre make f2 --normal x").stdout)
    assert made["p_generators"] == ["(x,1)", "(x,x)", "(y,y)"]
    assert made["oracles"] == {"G": "free", "Q": "tietze"}
    result = base.fibcli("fibre dist f2 --normal x --n-max 2 --format json")
    assert result.exit_code == 0
    assert [s["value"] for s in json.loads(result.stdout)["samples"]] == [0, 2, 4]
    witness = json.loads(base.fibcli("fibre witness f2 --normal x --n 3").stdout)
    assert witness["p_length"] == 3
    assert base.fibcli("fibre make f2 --normal z").exit_code == 4


def test_hard_conjugator():
    result = base.fibcli("conjugator f2 --normal x --hard 3")
    assert result.exit_code == 0
    data = json.loads(result.stdout)
    assert data["verified"]
    assert data["stages"][-2:] == ["lift", "verify"]
    assert data["instance"]["gamma_p_length"] == 3
    pair = base.fibcli(["conjugator", "f2", "--normal", "x", "--u", "x,", "--v", "y x y^-1,"])
    assert json.loads(pair.stdout)["zeta"] == "(y,y)^-1"
    assert base.fibcli("conjugator f2 --normal x").exit_code == 4


def test_rips_and_dagger_write_certificates():
    workdir = base.workdir("constructions")
    target = workdir / "rips_z.pres"
    result = base.fibcli(["rips", "--in", "z", "--out", str(target)])
    assert result.exit_code == 0
    written = Presentation.from_file(target)
    assert written.generators == ("x", "a", "b")
    assert len(written.relators) == 4
    certificate = json.loads((workdir / "rips_z.cert.json").read_text())
    assert certificate["count_ok"] and certificate["retraction_ok"]
    dagger_target = workdir / "dagger_z.pres"
    assert base.fibcli(["dagger", "--in", "z", "--out", str(dagger_target)]).exit_code == 0
    assert len(Presentation.from_file(dagger_target).relators) == 22
    provenance = json.loads((workdir / "dagger_z.cert.json").read_text())
    assert all(provenance["audits"].values())


def test_run_writes_reports():
    workdir = base.workdir("run")
    config = workdir / "small.yaml"
    config.write_text(
        f"presentation: {PRESENTATIONS / 'z2.pres'}\n"
        "functions: [delta]\n"
        "n: {max: 3}\n"
        "audits: [monotone]\n"
        "output: results\n"
    )
    result = base.fibcli(["run", "--config", str(config)])
    assert result.exit_code == 0
    report = json.loads((workdir / "results" / "small.json").read_text())
    assert report["experiment"] == "small"
    assert report["audits"][0]["status"] == "pass"
    assert (workdir / "results" / "small_delta.csv").is_file()
    broken = workdir / "broken.yaml"
    broken.write_text("presentation: z2\nn: {max: 1}\n")
    assert base.fibcli(["run", "--config", str(broken)]).exit_code == 4


def test_command_docs_list_every_option():
    docs = (Path(__file__).parent.parent / "docs" / "fibcli.md").read_text()
    with click.Context(cli) as ctx:
        commands = ctx.to_info_dict()["command"]["commands"]
    for name, command in commands.items():
        entries = command["commands"].items() if "commands" in command else [("", command)]
        for sub, entry in entries:
            title = " ".join(part for part in ("fibcli", name, sub) if part)
            assert f"### `{title}`\n" in docs
            section = docs.split(f"### `{title}`\n", 1)[1].split("###", 1)[0]
            for param in entry["params"]:
                assert f"| {param['name']} " in section


def test_help():
    result = base.fibcli("help fibre dist")
    assert result.exit_code == 0
    assert "Distortion of the fibre product" in result.stdout


if __name__ == "__main__":
    base.run_all(globals())
