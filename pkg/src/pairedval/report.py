"""Render analysis results as Markdown, LaTeX and long-format CSV, and check
regenerated values against the published tables.

All renderers work from the same list of :class:`Table` objects, so the three
output formats always carry the same numbers.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import fixtures
from .analysis import StudyAnalysis, analyze
from .counts import StudyCounts
from .lroc import auc_stats
from .paired_tests import TestConfig

__all__ = [
    "Table",
    "Check",
    "fmt_pct",
    "fmt_pct_p",
    "fmt_p",
    "build_tables",
    "render_markdown",
    "render_latex",
    "render_csv",
    "reproduce_paper",
    "failed_checks",
]


# ------------------------------------------------------------------ formats

def fmt_pct(v: float | None) -> str:
    return "" if v is None else f"{100.0 * v:.1f}"


def fmt_pct_p(p: float | None) -> str:
    """A probability shown in percent, as in the test tables."""
    if p is None:
        return ""
    v = 100.0 * p
    if v < 1e-4:
        return "0.0"
    if v < 0.01:
        return f"{v:.3f}"
    return f"{v:.2f}"


def fmt_p(p: float | None) -> str:
    """A plain probability; scientific notation below 1e-4."""
    if p is None:
        return ""
    if p < 1e-300:
        return "0.0"
    if p < 1e-4:
        return f"{p:.1e}"
    return f"{p:.4f}"


def _f(v: float | None, digits: int = 2) -> str:
    return "" if v is None else f"{v:.{digits}f}"


def _ci(lo_hi, fmt=fmt_pct) -> str:
    return "" if lo_hi is None else f"[{fmt(lo_hi[0])}, {fmt(lo_hi[1])}]"


def _yes(b) -> str:
    return "" if b is None else ("yes" if b else "no")


# ------------------------------------------------------------------- tables

@dataclass
class Table:
    key: str
    title: str
    columns: list[str]
    rows: list[list[str]] = field(default_factory=list)


def _table_counts(a: StudyAnalysis) -> Table:
    t = Table("decision", "Decision matrices (tooth level)",
              ["Anomaly", "TN ctrl", "FN ctrl", "FP ctrl", "TP ctrl",
               "TN study", "FN study", "FP study", "TP study"])
    for r in a.rows:
        c, s = r.counts.control, r.counts.study
        t.rows.append([r.anomaly.label, *map(str, (c.tn, c.fn, c.fp, c.tp, s.tn, s.fn, s.fp, s.tp))])
    return t


def _table_matched(a: StudyAnalysis) -> Table:
    t = Table("matched", "Combined matched sample tables",
              ["Anomaly", "TP/TP", "FN->TP", "TP->FN", "FN/FN", "TN/TN", "FP->TN", "TN->FP", "FP/FP"])
    for r in a.rows:
        se, sp = r.counts.sens, r.counts.spec
        t.rows.append([r.anomaly.label, *map(str, (se.good, se.profit, se.loss, se.bad,
                                                   sp.good, sp.profit, sp.loss, sp.bad))])
    return t


def _table_endpoints(a: StudyAnalysis) -> Table:
    conf = f"{100 * a.config.confidence:g}%"
    t = Table("endpoints", "Sensitivity and specificity (%)",
              ["Anomaly", "Sens ctrl", "Sens study", f"Sens {conf} CI ctrl", f"Sens {conf} CI study",
               "Spec ctrl", "Spec study", f"Spec {conf} CI ctrl", f"Spec {conf} CI study"])
    for r in a.rows:
        e = r.endpoints
        t.rows.append([r.anomaly.label,
                       fmt_pct(e.sens_control.estimate), fmt_pct(e.sens_study.estimate),
                       _ci(e.sens_control.ci), _ci(e.sens_study.ci),
                       fmt_pct(e.spec_control.estimate), fmt_pct(e.spec_study.estimate),
                       _ci(e.spec_control.ci), _ci(e.spec_study.ci)])
    av = a.endpoint_average
    if av is not None:
        t.rows.append(["Average", fmt_pct(av.sens_control[0]), fmt_pct(av.sens_study[0]),
                       _ci(av.sens_control[1:]), _ci(av.sens_study[1:]),
                       fmt_pct(av.spec_control[0]), fmt_pct(av.spec_study[0]),
                       _ci(av.spec_control[1:]), _ci(av.spec_study[1:])])
    return t


def _table_tests(a: StudyAnalysis, endpoint: str) -> Table:
    title = "sensitivity" if endpoint == "sens" else "specificity"
    t = Table(f"tests_{endpoint}", f"Paired tests on {title}",
              ["Anomaly", "rho", "lambda", "chi2", "s(chi2) %", "s(x) %", "x_alpha",
               "e_II %", "Power %", "Reject H0", "Power sufficient"])
    for r in a.rows:
        mst = getattr(r.counts, endpoint)
        mc = getattr(r, f"mcnemar_{endpoint}")
        bt = getattr(r, f"binomial_{endpoint}")
        t.rows.append([
            r.anomaly.label, str(mst.profit), str(mst.loss),
            _f(mc.chi2 if mc else None, 2), fmt_pct_p(mc.p_one_sided if mc else None),
            fmt_pct_p(bt.p_one_sided if bt else None), "" if bt is None else str(bt.x_alpha),
            fmt_pct(bt.e_ii if bt else None), fmt_pct(bt.power if bt else None),
            _yes(bt.reject_h0 if bt else None), _yes(bt.power_sufficient if bt else None),
        ])
    return t


def _table_auc(a: StudyAnalysis) -> Table:
    conf = f"{100 * a.config.confidence:g}%"
    t = Table("auc", "Area under the LROC curve",
              ["Anomaly", "AUC ctrl", "AUC study", f"{conf} CI ctrl", f"{conf} CI study"])
    for r in a.rows:
        if r.auc_control is None or r.auc_study is None:
            continue
        t.rows.append([r.anomaly.label, _f(r.auc_control.a), _f(r.auc_study.a),
                       _ci(r.auc_control.ci, _f), _ci(r.auc_study.ci, _f)])
    if a.auc_average is not None:
        ac, as_, cic, cis = a.auc_average
        t.rows.append(["Average", _f(ac), _f(as_), _ci(cic, _f), _ci(cis, _f)])
    return t


def _table_auc_diff(a: StudyAnalysis) -> Table:
    conf = f"{100 * a.config.confidence:g}%"
    t = Table("auc_diff", "Difference of areas (study - control)",
              ["Anomaly", "r_P", "r_N", "r", f"{conf} CI", "z", "p", "Reject H0"])
    for r in a.rows:
        c = r.auc_comparison
        if c is None:
            continue
        t.rows.append([r.anomaly.label, _f(c.r_p, 3), _f(c.r_n, 3), _f(c.r, 3),
                       _ci(c.ci_diff, _f), _f(c.z_hat, 1), fmt_p(c.p_one_sided), _yes(c.reject_h0)])
    if a.auc_diff_ci_average is not None:
        t.rows.append(["Average", "", "", "", _ci(a.auc_diff_ci_average, _f), "", "", ""])
    return t


def build_tables(a: StudyAnalysis) -> list[Table]:
    tables = [_table_counts(a), _table_matched(a), _table_endpoints(a),
              _table_tests(a, "sens"), _table_tests(a, "spec")]
    auc = _table_auc(a)
    if auc.rows:
        tables += [auc, _table_auc_diff(a)]
    return tables


# ---------------------------------------------------------------- renderers

def render_markdown(a: StudyAnalysis, tables: list[Table] | None = None) -> str:
    tables = build_tables(a) if tables is None else tables
    cfg = a.config
    out = ["# Paired validation report", "",
           f"alpha_I = {cfg.alpha_i:g}, alpha_II = {cfg.alpha_ii:g}, confidence = {cfg.confidence:g}", ""]
    for t in tables:
        out += [f"## {t.title}", "",
                "| " + " | ".join(t.columns) + " |",
                "|" + "|".join("---" for _ in t.columns) + "|"]
        out += ["| " + " | ".join(row) + " |" for row in t.rows]
        out.append("")
    if a.warnings:
        out += ["## Warnings", ""] + [f"- {w}" for w in a.warnings] + [""]
    return "\n".join(out)


_LATEX_ESCAPES = {"%": r"\%", "_": r"\_", "&": r"\&", "#": r"\#"}


def _tex(s: str) -> str:
    s = s.replace("->", r"$\to$")
    return "".join(_LATEX_ESCAPES.get(ch, ch) for ch in s)


def render_latex(a: StudyAnalysis, tables: list[Table] | None = None) -> str:
    tables = build_tables(a) if tables is None else tables
    out = []
    for t in tables:
        out += [f"% {t.title}", r"\begin{tabular}{l" + "r" * (len(t.columns) - 1) + "}", r"\hline",
                " & ".join(_tex(c) for c in t.columns) + r" \\", r"\hline"]
        for row in t.rows:
            if row[0] == "Average":
                out.append(r"\hline")
            out.append(" & ".join(_tex(v) for v in row) + r" \\")
        out += [r"\hline", r"\end{tabular}", ""]
    return "\n".join(out)


def render_csv(a: StudyAnalysis, tables: list[Table] | None = None) -> str:
    """Long format: one line per cell (table, anomaly, column, value)."""
    tables = build_tables(a) if tables is None else tables
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "anomaly", "column", "value"])
    for t in tables:
        for row in t.rows:
            for col, v in zip(t.columns[1:], row[1:]):
                w.writerow([t.key, row[0], col, v])
    return buf.getvalue()


# ------------------------------------------------------------- reproduction

@dataclass(frozen=True)
class Check:
    cell: str
    expected: float
    actual: float
    tol: float
    ok: bool
    informational: bool = False
    message: str = ""

    def describe(self) -> str:
        status = "ok" if self.ok else "MISMATCH"
        if self.message:
            return f"{status:8s} {self.cell}: {self.message}"
        return (f"{status:8s} {self.cell}: expected {self.expected:g}, got {self.actual:.6g} "
                f"(tol {self.tol:g})")


def _abs(cell, expected, actual, tol, informational=False) -> Check:
    return Check(cell, expected, actual, tol, abs(actual - expected) <= tol + 1e-12, informational)


def _p_check(cell, expected, actual) -> Check:
    # printed zero: the value underflowed the table's precision
    if expected == 0.0:
        return Check(cell, 0.0, actual, 1e-14, actual < 1e-14)
    ok = actual > 0 and abs(math.log10(actual / expected)) <= 1.0
    return Check(cell, expected, actual, 1.0, ok)


def _auc_ci_check(cell, expected, a, i, positives, negatives, c) -> Check:
    """CI bound of a printed (two-decimal) area.

    The area itself is only known to within half a unit in the last printed
    digit, so the bound passes when some area in that rounding interval
    reproduces the printed bound within 0.005.
    """
    actual = auc_stats(a, positives, negatives, c).ci[i]
    best = min(abs(auc_stats(a + d / 1000.0, positives, negatives, c).ci[i] - expected)
               for d in range(-5, 6))
    return Check(cell, expected, actual, 0.005, best <= 0.005 + 1e-12)


def reproduce_paper(counts: StudyCounts | None = None, cfg: TestConfig = TestConfig(),
                    r_method: str = "table") -> tuple[StudyAnalysis, list[Check]]:
    """Recompute every published result from ``counts`` and compare.

    Tolerances: endpoints 0.05 pp, their intervals 0.1 pp, chi2 0.05,
    tail probabilities 0.02 pp, critical values exact, e_II and power 0.1 pp,
    AUC intervals 0.005 (allowing for the rounding of the printed areas),
    z within 0.5, non-zero p within one decade.
    The intervals of the AUC differences are reported but not enforced.
    """
    counts = fixtures.paper_counts() if counts is None else counts
    a = analyze(counts, cfg, r_method)
    checks: list[Check] = [Check(f"consistency/{w.split(':', 1)[0]}", 0.0, 1.0, 0.0, False, message=w)
                           for w in a.warnings]
    pp = 100.0

    for r in a.rows:
        name = r.anomaly.value
        exp = fixtures.PRINTED_ENDPOINTS[r.anomaly]
        e = r.endpoints
        for label, res, printed in (("sens_control", e.sens_control, exp[0]),
                                    ("sens_study", e.sens_study, exp[1]),
                                    ("spec_control", e.spec_control, exp[3]),
                                    ("spec_study", e.spec_study, exp[4])):
            checks.append(_abs(f"endpoints/{name}/{label}", printed, pp * res.estimate, 0.05))
        for label, res, printed in (("sens_control", e.sens_control, exp[2][0]),
                                    ("sens_study", e.sens_study, exp[2][1]),
                                    ("spec_control", e.spec_control, exp[5][0]),
                                    ("spec_study", e.spec_study, exp[5][1])):
            for bound, i in (("lo", 0), ("hi", 1)):
                checks.append(_abs(f"ci/{name}/{label}/{bound}", printed[i], pp * res.ci[i], 0.1))

        for endpoint, table in (("sens", fixtures.PRINTED_SENS_TESTS), ("spec", fixtures.PRINTED_SPEC_TESTS)):
            chi2, s_chi2, s_x, x_alpha, e_ii, power = table[r.anomaly]
            mc, bt = getattr(r, f"mcnemar_{endpoint}"), getattr(r, f"binomial_{endpoint}")
            base = f"tests_{endpoint}/{name}"
            if mc is None or bt is None:
                checks.append(Check(base, chi2, float("nan"), 0, False, message="test undefined"))
                continue
            checks += [
                _abs(f"{base}/chi2", chi2, mc.chi2, 0.05),
                _abs(f"{base}/s_chi2", s_chi2, pp * mc.p_one_sided, 0.02),
                _abs(f"{base}/s_x", s_x, pp * bt.p_one_sided, 0.02),
                _abs(f"{base}/x_alpha", x_alpha, bt.x_alpha, 0),
                _abs(f"{base}/e_II", e_ii, pp * bt.e_ii, 0.1),
                _abs(f"{base}/power", power, pp * bt.power, 0.1),
            ]

        if r.anomaly in fixtures.PRINTED_AUC:
            _, _, ci_c, ci_s = fixtures.PRINTED_AUC[r.anomaly]
            if r.auc_control is None or r.auc_study is None:
                checks.append(Check(f"auc/{name}", 0, float("nan"), 0, False, message="area missing"))
                continue
            for arm, stats, printed in (("control", r.auc_control, ci_c), ("study", r.auc_study, ci_s)):
                for bound, i in (("lo", 0), ("hi", 1)):
                    checks.append(_auc_ci_check(f"auc/{name}/{arm}/{bound}", printed[i], stats.a, i,
                                                r.counts.positives, r.counts.negatives, cfg.confidence))
            ci_d, z, p = fixtures.PRINTED_AUC_DIFF[r.anomaly]
            cmp = r.auc_comparison
            if cmp is None:
                checks.append(Check(f"auc_diff/{name}", z, float("nan"), 0, False,
                                    message="comparison undefined"))
                continue
            checks += [_abs(f"auc_diff/{name}/z", z, cmp.z_hat, 0.5),
                       _p_check(f"auc_diff/{name}/p", p, cmp.p_one_sided)]
            for bound, i in (("lo", 0), ("hi", 1)):
                checks.append(_abs(f"auc_diff/{name}/ci_{bound}", ci_d[i], cmp.ci_diff[i], 0.05,
                                   informational=True))

    av = a.endpoint_average
    if av is not None and len(a.rows) == len(fixtures.PRINTED_ENDPOINTS):
        exp = fixtures.PRINTED_ENDPOINT_AVERAGE
        for label, col, printed, ci in (("sens_control", av.sens_control, exp[0], exp[2][0]),
                                        ("sens_study", av.sens_study, exp[1], exp[2][1]),
                                        ("spec_control", av.spec_control, exp[3], exp[5][0]),
                                        ("spec_study", av.spec_study, exp[4], exp[5][1])):
            checks.append(_abs(f"endpoints/average/{label}", printed, pp * col[0], 0.05))
            checks.append(_abs(f"ci/average/{label}/lo", ci[0], pp * col[1], 0.1))
            checks.append(_abs(f"ci/average/{label}/hi", ci[1], pp * col[2], 0.1))
    return a, checks


def failed_checks(checks: list[Check]) -> list[Check]:
    return [c for c in checks if not c.ok and not c.informational]
