# -*- coding: utf-8 -*-
from dsrlab.harness import report
from dsrlab.harness.report import (
    SummaryData,
    format_cell,
    labels_by_state,
    partition_overlay,
    render_summary,
    write_summary,
)
from dsrlab.subgoals.sampling import state_id


def summary() -> SummaryData:
    return SummaryData(
        experiment="train",
        map_name="corridor",
        seed=3,
        settings={"train.gamma": 0.99},
        results={"mean": 0.123456789, "steps_to_tolerance": None},
        artifacts=["metrics.csv"],
        overlay="#####\n#A*B#\n#####\n",
    )


def test_format_cell():
    assert format_cell(None) == "-"
    assert format_cell(0.123456789) == "0.123457"
    assert format_cell(5) == "5"


def test_render_summary():
    text = render_summary(summary())
    assert text.startswith("# train")
    assert "| train.gamma | 0.99 |" in text
    assert "| mean | 0.123457 |" in text
    assert "| steps_to_tolerance | - |" in text
    assert "#A*B#" in text
    assert "- `metrics.csv`" in text


def test_fallback_matches_sections():
    text = report._render_fallback(summary())
    assert "| mean | 0.123457 |" in text
    assert "#A*B#" in text
    assert text.endswith("\n")


def test_write_summary(tmp_path):
    path = write_summary(summary(), tmp_path / "deep" / "summary.md")
    assert path.read_text(encoding="utf-8").startswith("# train")


def test_partition_overlay(two_rooms):
    labels = {}
    for cell in two_rooms.passable_cells():
        if cell == (1, 1):
            continue
        labels[state_id(two_rooms, cell)] = 0 if cell[1] < 6 else 1
    door = state_id(two_rooms, (3, 6))
    text = partition_overlay(two_rooms, labels, [door])
    lines = text.splitlines()
    assert text.endswith("\n")
    assert len(lines) == two_rooms.height
    assert lines[0] == "#" * two_rooms.width
    assert lines[3][6] == "*"
    assert lines[1][1] == "?"
    assert lines[1][2] == "A"
    assert lines[1][7] == "B"


def test_labels_by_state_keeps_first():
    assert labels_by_state([5, 3, 5], [1, 0, 2]) == {5: 1, 3: 0}
