import json
import logging
import math

import pytest

from src.shadow_draw.app_logic.utils.common import (
    EXIT_NO_CANDIDATES,
    StageResponse,
    atomic_directory,
    execute_stage,
    finite_or_none,
    handle_stage_response,
    write_json,
)


def test_atomic_directory_publishes_on_success(tmp_path):
    target = tmp_path / "run"
    with atomic_directory(target) as scratch:
        (scratch / "a.txt").write_text("a")
        assert not target.exists()
    assert (target / "a.txt").read_text() == "a"
    assert [p.name for p in tmp_path.iterdir()] == ["run"]


def test_atomic_directory_replaces_an_old_run(tmp_path):
    target = tmp_path / "run"
    target.mkdir()
    (target / "old.txt").write_text("old")
    with atomic_directory(target) as scratch:
        (scratch / "new.txt").write_text("new")
    assert sorted(p.name for p in target.iterdir()) == ["new.txt"]


def test_atomic_directory_keeps_the_old_run_on_error(tmp_path):
    target = tmp_path / "run"
    target.mkdir()
    (target / "old.txt").write_text("old")
    with pytest.raises(RuntimeError):
        with atomic_directory(target) as scratch:
            (scratch / "new.txt").write_text("new")
            raise RuntimeError("boom")
    assert sorted(p.name for p in target.iterdir()) == ["old.txt"]
    assert [p.name for p in tmp_path.iterdir()] == ["run"]


def test_stage_response_exit_codes(caplog):
    with caplog.at_level(logging.INFO):
        assert handle_stage_response(StageResponse(success=True, message="done")) == 0
        failed = StageResponse(False, "nothing left", status_code=400, exit_code=EXIT_NO_CANDIDATES)
        assert handle_stage_response(failed) == EXIT_NO_CANDIDATES
    assert "done" in caplog.text
    assert "nothing left" in caplog.text


def test_execute_stage_passes_arguments():
    def stage(a, b):
        return StageResponse(success=True, message=f"{a}+{b}", exit_code=a + b)

    assert execute_stage(stage, 1, 2) == 3


def test_json_is_sorted_and_stable(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"b": 1, "a": [1.5, None]})
    assert path.read_text() == '{\n    "a": [\n        1.5,\n        null\n    ],\n    "b": 1\n}\n'
    assert json.loads(path.read_text()) == {"a": [1.5, None], "b": 1}


@pytest.mark.parametrize("value", [None, math.nan, math.inf, -math.inf])
def test_non_finite_values_become_null(value):
    assert finite_or_none(value) is None


def test_finite_values_pass_through():
    assert finite_or_none(1.25) == 1.25
