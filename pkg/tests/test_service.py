import json

import pytest

from fatou_lab import COMMANDS, ExperimentConfig, LabService
from fatou_lab.config import settings
from fatou_lab.core.exceptions import BudgetExceeded, ConfigurationError, NotGenerating


@pytest.fixture
def service():
    return LabService(workers=1)


def config(operation, group="free:2", step="srw", **params):
    return ExperimentConfig(group=group, step=step, operation=operation, params=params, seed=7)


def test_every_command_is_dispatched(service):
    assert set(COMMANDS) == set(service._operations)


def test_admissible_headline(service):
    outcome = service.run(config("admissible"))
    assert outcome.headline == "m1=1 l=2 c0=0.25"
    assert outcome.report.passed
    assert outcome.report.admissibility.l == 2
    assert outcome.report.delta_hat == 0.0


def test_delta_of_the_free_group(service):
    outcome = service.run(config("delta", radius=2))
    assert outcome.headline == "0"
    assert outcome.report.delta_hat == 0.0


def test_ball_run_carries_a_table(service):
    outcome = service.run(config("ball", radius=2))
    assert outcome.headline == "17"
    assert outcome.report.result["spheres"] == [1, 4, 12]
    lines = outcome.tables["ball.csv"].splitlines()
    assert lines[0] == "word,distance,parent"
    assert len(lines) == 18
    assert outcome.report.admissibility.m1 == 1


def test_reports_are_deterministic(service):
    first = service.run(config("green", x="e", y="a", radius=12))
    second = service.run(config("green", x="e", y="a", radius=12))
    assert first.report.model_dump_json() == second.report.model_dump_json()
    assert first.report.config_hash == second.report.config_hash
    assert float(first.headline) == pytest.approx(0.5, rel=1e-5)


def test_config_hash_ignores_output():
    plain = config("ball", radius=2)
    routed = plain.model_copy(update={"output": "runs/ball"})
    assert plain.config_hash() == routed.config_hash()
    assert plain.config_hash() != config("ball", radius=3).config_hash()


def test_run_writes_its_artifacts(service, tmp_path):
    outcome = service.run(config("ball", radius=1), out_dir=tmp_path / "run")
    assert outcome.path == tmp_path / "run"
    report = json.loads((outcome.path / "report.json").read_text())
    assert report["command"] == "ball"
    assert report["result"]["size"] == 5
    assert "started_at" not in report
    metadata = json.loads((outcome.path / "metadata.json").read_text())
    assert metadata["version"] == "0.1.0"
    assert (outcome.path / "tables" / "ball.csv").exists()
    assert (outcome.path / "summary.txt").read_text().startswith("BALL on free:2 with nu = srw")


def test_unknown_operation(service):
    with pytest.raises(ConfigurationError):
        service.run(config("heat-kernel"))


def test_invalid_group():
    with pytest.raises(ConfigurationError):
        config("ball", group="free:1")


def test_stats_count_failures(service):
    service.run(config("ball", radius=1))
    with pytest.raises(NotGenerating):
        service.run(config("admissible", step="a:1"))
    stats = service.get_stats()
    assert stats.runs_total == 2
    assert (stats.passed_total, stats.failed_total) == (1, 1)
    assert stats.by_command == {"ball": 1, "admissible": 1}
    assert service.get_recent_runs(1)[0]["status"] == "failed"


def test_run_budgets_apply_for_the_run_only(service):
    saved = settings.ball_element_budget
    run = config("ball", radius=2)
    run.budgets.ball_elements = 10
    with pytest.raises(BudgetExceeded):
        service.run(run)
    assert settings.ball_element_budget == saved
