import json

import pytest
from click.testing import CliRunner

from fatou_lab.cli import EXIT_CONFIG, EXIT_FAILED, cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ["--workers", "1", "--log-level", "warning", *args])


def test_admissible(runner):
    result = invoke(runner, "admissible")
    assert result.exit_code == 0
    assert result.stdout.strip() == "m1=1 l=2 c0=0.25"


def test_unknown_subcommand(runner):
    assert invoke(runner, "heat-kernel").exit_code == 2


def test_invalid_group_is_a_configuration_error(runner):
    result = invoke(runner, "ball", "--group", "free:1", "--radius", "1")
    assert result.exit_code == EXIT_CONFIG
    assert result.stdout == ""


def test_failed_precondition_exits_one(runner):
    result = invoke(runner, "admissible", "--nu", "a:1")
    assert result.exit_code == EXIT_FAILED


def test_config_file_overrides_flags(runner, tmp_path):
    path = tmp_path / "ball.toml"
    path.write_text('operation = "ball"\ngroup = "free:2"\n\n[params]\nradius = 2\n')
    result = invoke(runner, "--config", str(path), "ball", "--radius", "4")
    assert result.exit_code == 0
    assert result.stdout.strip() == "17"


def test_config_file_for_another_operation(runner, tmp_path):
    path = tmp_path / "green.json"
    path.write_text(json.dumps({"operation": "green", "group": "free:2"}))
    assert invoke(runner, "--config", str(path), "ball").exit_code == EXIT_CONFIG


def test_out_writes_tables(runner, tmp_path):
    out = tmp_path / "ball"
    result = invoke(runner, "--out", str(out), "--seed", "3", "ball", "--radius", "1")
    assert result.exit_code == 0
    assert (out / "tables" / "ball.csv").read_text().splitlines()[0] == "word,distance,parent"
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["seed"] == 3
    assert report["config"]["params"] == {"radius": 1}


def test_verbose_prints_the_summary(runner):
    result = invoke(runner, "--verbose", "green", "--x", "e", "--y", "e", "--radius", "12")
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert float(lines[0]) == pytest.approx(1.5, rel=1e-5)
    assert any(line.startswith("GREEN on free:2") for line in lines)
