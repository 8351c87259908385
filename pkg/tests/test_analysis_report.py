import csv
import dataclasses
import io
from statistics import fmean

import pytest

from pairedval.analysis import analyze
from pairedval.annotations import AnomalyType, Arm
from pairedval.counts import AnomalyCounts
from pairedval.fixtures import PRINTED_AUC, PRINTED_AUC_AVERAGE
from pairedval.matching import DecisionMatrix, Endpoint, MatchedSampleTable
from pairedval.paired_tests import TestConfig, critical_value
from pairedval.report import (
    build_tables,
    failed_checks,
    fmt_p,
    fmt_pct,
    fmt_pct_p,
    render_csv,
    render_latex,
    render_markdown,
    reproduce_paper,
)

A = AnomalyType


def test_formatters():
    assert fmt_pct(0.66037) == "66.0" and fmt_pct(None) == ""
    assert fmt_pct_p(0.0521) == "5.21"
    assert fmt_pct_p(3e-5) == "0.003"
    assert fmt_pct_p(1e-9) == "0.0"
    assert fmt_p(0.0) == "0.0" and fmt_p(1.1e-9) == "1.1e-09" and fmt_p(0.5) == "0.5000"


def test_reproduce_paper_passes(paper):
    analysis, checks = reproduce_paper(paper)
    assert failed_checks(checks) == []
    cells = {c.cell for c in checks}
    assert "endpoints/caries/sens_control" in cells
    assert "ci/root_canal_defect/sens_study/hi" in cells
    assert "tests_spec/calculus/x_alpha" in cells
    assert "auc/marginal_defect/control/lo" in cells
    assert "auc_diff/apical_lesion/p" in cells
    assert "endpoints/average/spec_study" in cells
    assert not analysis.warnings


@pytest.mark.parametrize("field, cells", [
    ("tp", {"endpoints/caries/sens_control", "consistency/caries"}),
    ("fp", {"endpoints/caries/spec_control", "consistency/caries"}),
])
def test_perturbed_count_names_the_cell(paper, field, cells):
    ac = paper[A.CARIES]
    dm = dataclasses.replace(ac.control, **{field: getattr(ac.control, field) + 1})
    bumped = dict(paper)
    bumped[A.CARIES] = dataclasses.replace(ac, control=dm)
    _, checks = reproduce_paper(bumped)
    failed = {c.cell for c in failed_checks(checks)}
    assert cells <= failed
    assert all(c.startswith(("endpoints/", "ci/", "consistency/")) for c in failed)
    assert any("MISMATCH" in c.describe() for c in failed_checks(checks))


def test_informational_checks_do_not_fail(paper):
    _, checks = reproduce_paper(paper)
    info = [c for c in checks if c.informational]
    assert info and all(c.cell.startswith("auc_diff/") and "/ci_" in c.cell for c in info)


def test_auc_average(paper):
    a = analyze(paper)
    ac, as_, ci_c, ci_s = a.auc_average
    assert ac == pytest.approx(fmean(v[0] for v in PRINTED_AUC.values()))
    assert round(as_, 2) == PRINTED_AUC_AVERAGE[1]
    assert round(ci_c[0], 2) == PRINTED_AUC_AVERAGE[2][0]
    assert round(ci_s[1], 2) == PRINTED_AUC_AVERAGE[3][1]


def test_single_anomaly_analysis(paper):
    a = analyze({A.CALCULUS: paper[A.CALCULUS]})
    (row,) = a.rows
    assert a.endpoint_average.sens_control[0] == row.endpoints.sens_control.estimate
    assert a.auc_average[0] == row.auc_control.a
    assert a.auc_diff_ci_average == row.auc_comparison.ci_diff
    _, checks = reproduce_paper({A.CALCULUS: paper[A.CALCULUS]})
    assert failed_checks(checks) == []
    assert not any(c.cell.startswith("endpoints/average") for c in checks)


def test_undefined_tests_are_warnings():
    dm = DecisionMatrix(A.CARIES, Arm.CONTROL, tp=4, fp=1, tn=9, fn=2)
    dm_s = DecisionMatrix(A.CARIES, Arm.STUDY, tp=4, fp=1, tn=9, fn=2)
    ac = AnomalyCounts(A.CARIES, dm, dm_s,
                       MatchedSampleTable(A.CARIES, Endpoint.SENSITIVITY, 4, 0, 0, 2),
                       MatchedSampleTable(A.CARIES, Endpoint.SPECIFICITY, 9, 0, 0, 1), 0.7, 0.7)
    a = analyze({A.CARIES: ac})
    assert a.rows[0].mcnemar_sens is None and a.rows[0].binomial_spec is None
    assert "caries: no discordant pairs on sensitivity" in a.warnings
    assert "caries: AUC comparison undefined" in a.warnings
    md = render_markdown(a)
    assert "## Warnings" in md and "- caries: AUC comparison undefined" in md


def test_markdown(paper):
    md = render_markdown(analyze(paper))
    assert md.startswith("# Paired validation report")
    assert "| Caries | 66.0 | 84.9 | [58.7, 73.4] | [79.3, 90.5] |" in md
    assert "| Average | 60.7 | 85.9 |" in md
    assert "Warnings" not in md


def test_latex(paper):
    tex = render_latex(analyze(paper))
    assert tex.count(r"\begin{tabular}") == len(build_tables(analyze(paper)))
    assert r"FN$\to$TP" in tex and r"s(chi2) \%" in tex and r"x\_alpha" in tex
    lines = tex.splitlines()
    for i, line in enumerate(lines):
        if line.startswith("Average"):
            assert lines[i - 1] == r"\hline"


def test_csv_long_format(paper):
    rows = list(csv.DictReader(io.StringIO(render_csv(analyze(paper)))))
    cell = {(r["table"], r["anomaly"], r["column"]): r["value"] for r in rows}
    assert cell[("endpoints", "Caries", "Sens ctrl")] == "66.0"
    assert cell[("tests_sens", "Caries", "x_alpha")] == "23"
    assert cell[("auc", "Average", "AUC study")] == "0.86"
    assert cell[("auc_diff", "Root canal defect", "p")].startswith("1.")
    assert len({r["column"] for r in rows if r["table"] == "endpoints"}) == 8


def test_custom_alpha_recomputes(paper):
    strict = TestConfig(alpha_i=0.01)
    a = analyze(paper, strict)
    caries = a.row(A.CARIES).binomial_sens
    assert caries.x_alpha == critical_value(36, 0.01) == 25
    assert "alpha_I = 0.01" in render_markdown(a)
    _, checks = reproduce_paper(paper, strict)
    assert "tests_sens/caries/x_alpha" in {c.cell for c in failed_checks(checks)}


def test_confidence_level_changes_intervals(paper):
    a90 = analyze(paper, TestConfig(confidence=0.9)).row(A.CARIES)
    a95 = analyze(paper).row(A.CARIES)
    assert a90.endpoints.sens_control.half_width < a95.endpoints.sens_control.half_width
    assert "90% CI" in render_markdown(analyze(paper, TestConfig(confidence=0.9)))
