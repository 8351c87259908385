import io
import logging

import pytest

from pairedval.analysis import analyze
from pairedval.annotations import AnomalyType, StudyDataset
from pairedval.counts import (
    CSV_HEADER,
    CountsFormatError,
    counts_from_dataset,
    parse_counts_csv,
    read_counts_csv,
    without_curves,
    write_counts_csv,
)
from pairedval.fixtures import synthetic_dataset
from pairedval.report import render_csv

A = AnomalyType


def _csv(counts):
    buf = io.StringIO()
    write_counts_csv(counts, buf)
    return buf.getvalue()


def test_round_trip(paper, tmp_path):
    path = tmp_path / "counts.csv"
    write_counts_csv(paper, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 13
    assert read_counts_csv(path) == paper


def test_round_trip_without_areas(paper):
    text = _csv(paper).replace(",0.65\n", ",\n")
    back = parse_counts_csv(text)
    assert back[A.CARIES].auc_control is None
    assert back[A.CARIES].auc_study == pytest.approx(0.84)


def _mutate(paper, line, col, value):
    rows = _csv(paper).splitlines()
    cells = rows[line].split(",")
    cells[CSV_HEADER.index(col)] = value
    rows[line] = ",".join(cells)
    return "\n".join(rows) + "\n"


@pytest.mark.parametrize("line, col, value, message", [
    (1, "tp", "x", "x.csv:2: column 'tp' is not an integer"),
    (3, "fn", "-1", "x.csv:4: column 'fn' is negative"),
    (2, "anomaly", "cavity", "x.csv:3:"),
    (4, "arm", "control", "x.csv:5: duplicate row for apical_lesion/control"),
    (2, "sens_rho", "34", "caries matched-sample columns differ"),
    (1, "auc", "high", "x.csv:2: column 'auc' is not a number"),
])
def test_format_errors(paper, line, col, value, message):
    with pytest.raises(CountsFormatError) as err:
        parse_counts_csv(_mutate(paper, line, col, value), "x.csv")
    assert message in str(err.value)


def test_missing_columns():
    with pytest.raises(CountsFormatError, match="missing columns"):
        parse_counts_csv("anomaly,arm,tp\ncaries,control,1\n")


def test_single_arm_is_an_error(paper):
    rows = _csv(paper).splitlines()
    with pytest.raises(CountsFormatError, match="both a control and a study row"):
        parse_counts_csv("\n".join(rows[:2]) + "\n")


def test_missing_anomaly_is_omitted_with_warning(paper, caplog):
    rows = _csv(paper).splitlines()
    text = "\n".join(r for r in rows if not r.startswith("calculus")) + "\n"
    with caplog.at_level(logging.WARNING):
        back = parse_counts_csv(text)
    assert A.CALCULUS not in back and len(back) == 5
    assert "no counts for calculus" in caplog.text


def test_empty_dataset_gives_no_tables():
    assert counts_from_dataset(StudyDataset(())) == {}
    assert _csv({}).strip() == ",".join(CSV_HEADER)


def test_tally_then_report_equals_direct():
    ds = synthetic_dataset(seed=8, n_images=60)
    direct = counts_from_dataset(ds)
    assert all(ac.curves is not None for ac in direct.values())
    back = parse_counts_csv(_csv(direct))
    assert back == without_curves(direct)
    assert render_csv(analyze(back)) == render_csv(analyze(direct))
