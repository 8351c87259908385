"""Assemble the full statistical battery per anomaly type, plus average rows.

Average rows are unweighted means over the anomaly types present, taken
value by value (estimates and interval bounds alike).
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .annotations import AnomalyType, Arm, StudyDataset
from .counts import AnomalyCounts, StudyCounts, counts_from_dataset
from .lroc import AucComparison, AucStats, auc_stats, compare_aucs
from .matching import DEFAULT_MIN_DICE, Endpoint
from .paired_tests import (
    BinomialTestResult,
    EndpointResult,
    McNemarResult,
    TestConfig,
    binomial_test,
    mcnemar_test,
    sens_spec,
    wald_ci,
)

__all__ = [
    "EndpointRow",
    "EndpointAverage",
    "AnomalyAnalysis",
    "StudyAnalysis",
    "endpoint_report",
    "analyze",
]


@dataclass(frozen=True)
class EndpointRow:
    anomaly: AnomalyType
    sens_control: EndpointResult
    sens_study: EndpointResult
    spec_control: EndpointResult
    spec_study: EndpointResult

    def results(self):
        return (self.sens_control, self.sens_study, self.spec_control, self.spec_study)


@dataclass(frozen=True)
class EndpointAverage:
    """Means of estimate, lower and upper bound for each of the four columns."""

    sens_control: tuple[float, float, float]
    sens_study: tuple[float, float, float]
    spec_control: tuple[float, float, float]
    spec_study: tuple[float, float, float]


def _endpoint_row(ac: AnomalyCounts, c: float) -> EndpointRow:
    out = []
    for endpoint, denom_attr in ((Endpoint.SENSITIVITY, "positives"), (Endpoint.SPECIFICITY, "negatives")):
        for arm, dm in ((Arm.CONTROL, ac.control), (Arm.STUDY, ac.study)):
            sens, spec = sens_spec(dm)
            est = sens if endpoint is Endpoint.SENSITIVITY else spec
            out.append(wald_ci(est, getattr(dm, denom_attr), c, anomaly=ac.anomaly,
                               endpoint=endpoint, arm=arm))
    return EndpointRow(ac.anomaly, *out)


def _mean3(results):
    return (fmean(r.estimate for r in results), fmean(r.ci[0] for r in results),
            fmean(r.ci[1] for r in results))


def _endpoint_average(rows) -> EndpointAverage | None:
    if not rows:
        return None
    cols = list(zip(*(r.results() for r in rows)))
    return EndpointAverage(*(_mean3(col) for col in cols))


def endpoint_report(source: StudyDataset | StudyCounts, cfg: TestConfig = TestConfig(),
                    threshold: int = 50, min_dice: float = DEFAULT_MIN_DICE):
    """Sensitivity/specificity with Wald intervals per anomaly type and the average row.

    ``source`` is either a raw dataset (tallied at ``threshold``) or counts.
    Returns ``(rows, average)``.
    """
    counts = (counts_from_dataset(source, threshold, min_dice, curves=False)
              if isinstance(source, StudyDataset) else source)
    rows = [_endpoint_row(ac, cfg.confidence) for ac in counts.values()]
    return rows, _endpoint_average(rows)


@dataclass(frozen=True)
class AnomalyAnalysis:
    anomaly: AnomalyType
    counts: AnomalyCounts
    endpoints: EndpointRow
    mcnemar_sens: McNemarResult | None
    mcnemar_spec: McNemarResult | None
    binomial_sens: BinomialTestResult | None
    binomial_spec: BinomialTestResult | None
    auc_control: AucStats | None = None
    auc_study: AucStats | None = None
    auc_comparison: AucComparison | None = None


@dataclass(frozen=True)
class StudyAnalysis:
    config: TestConfig
    rows: tuple[AnomalyAnalysis, ...]
    endpoint_average: EndpointAverage | None
    auc_average: tuple[float, float, tuple[float, float], tuple[float, float]] | None
    auc_diff_ci_average: tuple[float, float] | None
    warnings: tuple[str, ...] = ()

    def row(self, anomaly: AnomalyType) -> AnomalyAnalysis:
        for r in self.rows:
            if r.anomaly is AnomalyType(anomaly):
                return r
        raise KeyError(anomaly)


def _maybe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


def analyze(counts: StudyCounts, cfg: TestConfig = TestConfig(), r_method: str = "table") -> StudyAnalysis:
    """Run every test on every anomaly type present in ``counts``.

    Tests that are undefined for a table (no discordant pairs, missing AUC)
    are left as ``None`` and noted in ``warnings``.
    """
    rows, warnings = [], []
    for ac in counts.values():
        warnings.extend(ac.consistency_errors())
        name = ac.anomaly.value
        tests = {}
        for key, fn, mst in (("mcnemar_sens", mcnemar_test, ac.sens), ("mcnemar_spec", mcnemar_test, ac.spec),
                             ("binomial_sens", binomial_test, ac.sens), ("binomial_spec", binomial_test, ac.spec)):
            tests[key] = _maybe(fn, mst, cfg)
            if tests[key] is None and key.startswith("mcnemar"):
                warnings.append(f"{name}: no discordant pairs on {mst.endpoint.value}")
        auc_c = auc_s = cmp = None
        if ac.auc_control is not None and ac.auc_study is not None:
            auc_c = _maybe(auc_stats, ac.auc_control, ac.positives, ac.negatives, cfg.confidence)
            auc_s = _maybe(auc_stats, ac.auc_study, ac.positives, ac.negatives, cfg.confidence)
            cmp = _maybe(compare_aucs, ac.auc_control, ac.auc_study, ac.positives, ac.negatives,
                         ac.sens, ac.spec, cfg, r_method)
            if cmp is None:
                warnings.append(f"{name}: AUC comparison undefined")
        rows.append(AnomalyAnalysis(ac.anomaly, ac, _endpoint_row(ac, cfg.confidence),
                                    tests["mcnemar_sens"], tests["mcnemar_spec"],
                                    tests["binomial_sens"], tests["binomial_spec"],
                                    auc_c, auc_s, cmp))

    ep_avg = _endpoint_average([r.endpoints for r in rows])
    with_auc = [r for r in rows if r.auc_control is not None and r.auc_study is not None]
    auc_avg = None
    if with_auc:
        auc_avg = (
            fmean(r.auc_control.a for r in with_auc),
            fmean(r.auc_study.a for r in with_auc),
            (fmean(r.auc_control.ci[0] for r in with_auc), fmean(r.auc_control.ci[1] for r in with_auc)),
            (fmean(r.auc_study.ci[0] for r in with_auc), fmean(r.auc_study.ci[1] for r in with_auc)),
        )
    with_cmp = [r.auc_comparison for r in rows if r.auc_comparison is not None]
    diff_avg = None
    if with_cmp:
        diff_avg = (fmean(c.ci_diff[0] for c in with_cmp), fmean(c.ci_diff[1] for c in with_cmp))
    return StudyAnalysis(cfg, tuple(rows), ep_avg, auc_avg, diff_avg, tuple(warnings))
