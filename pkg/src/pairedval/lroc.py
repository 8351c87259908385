"""Localization ROC curves from confidence thresholds and AUC statistics.

Curves have one operating point per confidence threshold (100 down to 10),
start at the origin and are closed by a flat segment to FPR = 1: a reader who
never marked a lesion's tooth cannot reach it by lowering the threshold.

AUC uncertainty follows Hanley & McNeil: the single-curve standard error uses
the exponential-model q1/q2 terms, and two curves on the same cases are
compared through a correlation read from an area-by-correlation table.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _hm_table
from .annotations import AnomalyType, Arm, StudyDataset
from .distributions import normal_cdf, normal_quantile
from .matching import (
    DEFAULT_MIN_DICE,
    THRESHOLDS,
    DecisionMatrix,
    MatchedSampleTable,
    tally,
)
from .paired_tests import TestConfig

__all__ = [
    "OperatingPoint",
    "LrocCurve",
    "AucStats",
    "AucComparison",
    "build_lroc",
    "curve_from_counts",
    "trapezoid_auc",
    "hanley_sigma",
    "auc_stats",
    "kendall_correlations",
    "lookup_r",
    "binormal_area_correlation",
    "compare_aucs",
    "auc_difference_test",
    "write_curve_csv",
]


@dataclass(frozen=True)
class OperatingPoint:
    threshold: int
    fpr: float
    sens: float
    counts: DecisionMatrix | None = None


@dataclass(frozen=True)
class LrocCurve:
    anomaly: AnomalyType
    arm: Arm
    points: tuple[OperatingPoint, ...]
    auc: float

    @property
    def positives(self) -> int:
        return self.points[0].counts.positives

    @property
    def negatives(self) -> int:
        return self.points[0].counts.negatives

    def polyline(self) -> list[tuple[float, float]]:
        return _polyline(self.points)


def _polyline(points: Sequence[OperatingPoint]) -> list[tuple[float, float]]:
    line = [(0.0, 0.0)]
    line.extend((p.fpr, p.sens) for p in points)
    line.append((1.0, points[-1].sens if points else 0.0))
    return line


def trapezoid_auc(curve: LrocCurve | Sequence[tuple[float, float]]) -> float:
    """Area under a piecewise-linear curve by the trapezoidal rule.

    Accepts an :class:`LrocCurve` (integrated over its closed polyline) or an
    explicit sequence of ``(fpr, sens)`` vertices.
    """
    line = curve.polyline() if isinstance(curve, LrocCurve) else [tuple(p) for p in curve]
    if not line:
        raise ValueError("invalid curve: no points")
    area = 0.0
    for (x0, y0), (x1, y1) in zip(line, line[1:]):
        if x1 < x0:
            raise ValueError("invalid curve: fpr decreases")
        area += (x1 - x0) * (y0 + y1) / 2.0
    for x, y in line:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError("invalid curve: point outside the unit square")
    return area


def curve_from_counts(anomaly, arm, matrices: Sequence[tuple[int, DecisionMatrix]]) -> LrocCurve:
    """Curve from ``(threshold, decision matrix)`` pairs, highest threshold first."""
    points = []
    for k, dm in sorted(matrices, key=lambda t: -t[0]):
        if dm.positives == 0 or dm.negatives == 0:
            raise ValueError(f"undefined endpoint at threshold {k}: |P| or |N| is zero")
        points.append(OperatingPoint(k, dm.fp / dm.negatives, dm.tp / dm.positives, dm))
    points = tuple(points)
    return LrocCurve(AnomalyType(anomaly), Arm(arm), points, trapezoid_auc(_polyline(points)))


def build_lroc(dataset: StudyDataset, arm: Arm, anomaly: AnomalyType,
               min_dice: float = DEFAULT_MIN_DICE) -> LrocCurve:
    matrices = [(k, tally(dataset, arm, anomaly, k, min_dice)) for k in THRESHOLDS]
    return curve_from_counts(anomaly, arm, matrices)


# ------------------------------------------------------------ AUC statistics


@dataclass(frozen=True)
class AucStats:
    a: float
    q1: float
    q2: float
    sigma: float
    ci: tuple[float, float]


def hanley_sigma(a: float, positives: int, negatives: int) -> float:
    if not (0.0 <= a <= 1.0):
        raise ValueError(f"area {a!r} not in [0, 1]")
    if positives < 2 or negatives < 2:
        raise ValueError("need at least 2 positives and 2 negatives")
    q1 = a / (2.0 - a)
    q2 = 2.0 * a * a / (1.0 + a)
    var = (a * (1.0 - a) + (positives - 1) * (q1 - a * a)
           + (negatives - 1) * (q2 - a * a)) / (positives * negatives)
    return math.sqrt(max(var, 0.0))


def auc_stats(a: float, positives: int, negatives: int, c: float = 0.95) -> AucStats:
    sigma = hanley_sigma(a, positives, negatives)
    z = normal_quantile((1.0 + c) / 2.0)
    ci = (max(0.0, a - z * sigma), min(1.0, a + z * sigma))
    return AucStats(a, a / (2.0 - a), 2.0 * a * a / (1.0 + a), sigma, ci)


def kendall_correlations(mst_sens: MatchedSampleTable,
                         mst_spec: MatchedSampleTable) -> tuple[float, float]:
    """(concordant - discordant) / total on the positive and negative tables."""
    out = []
    for mst in (mst_sens, mst_spec):
        if mst.total == 0:
            raise ValueError(f"empty matched sample table for {mst.endpoint.value}")
        out.append((mst.good + mst.bad - mst.profit - mst.loss) / mst.total)
    return out[0], out[1]


def binormal_area_correlation(rho: float, area: float, nodes: int = 200) -> float:
    """Correlation of two AUC estimates under an equal-variance binormal model.

    Latent ratings of the two modalities are unit normals with correlation
    ``rho``; positives are shifted so each modality has the given ``area``.
    """
    if rho >= 1.0:
        return 1.0
    mu = math.sqrt(2.0) * normal_quantile(area) if area != 0.5 else 0.0
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    # the second rating's independent part integrates out in closed form:
    # E[Phi(m + s*Z)] = Phi(m / sqrt(1 + s^2))
    scale = math.sqrt(2.0 - rho * rho)
    f1 = np.array([normal_cdf(mu + z) for z in x])
    g = np.array([normal_cdf((mu + rho * z) / scale) for z in x])
    m = float(w @ f1)
    var = float(w @ (f1 * f1)) - m * m
    cov = float(w @ (f1 * g)) - m * m
    return cov / var


def _table_value(r_avg: float, area: float) -> float:
    """Bilinear interpolation in the embedded grid; area clamped to its range."""
    rows, cols, table = _hm_table.CORRELATIONS, _hm_table.AREAS, _hm_table.TABLE
    r_avg = min(max(r_avg, rows[0]), rows[-1])
    area = min(max(area, cols[0]), cols[-1])
    i = min(int((r_avg - rows[0]) / (rows[1] - rows[0])), len(rows) - 2)
    j = min(int((area - cols[0]) / (cols[1] - cols[0])), len(cols) - 2)
    tr = (r_avg - rows[i]) / (rows[i + 1] - rows[i])
    ta = (area - cols[j]) / (cols[j + 1] - cols[j])
    top = table[i][j] * (1 - ta) + table[i][j + 1] * ta
    bottom = table[i + 1][j] * (1 - ta) + table[i + 1][j + 1] * ta
    return top * (1 - tr) + bottom * tr


_CHANCE_AREA = 0.5


def lookup_r(r_p: float, r_n: float, a_c: float, a_s: float, method: str = "table") -> float:
    """Correlation between the two areas.

    ``method="table"`` reads the grid at the average correlation and average
    area. Below the first area column the value is blended linearly towards
    the unattenuated average correlation, reached at chance level (0.5); above
    the last column it is clamped. The result is clipped to
    ``[0, max(r_p, r_n)]``. ``method="average"`` returns the plain average.
    """
    r_avg = (r_p + r_n) / 2.0
    if method == "average":
        return r_avg
    if method != "table":
        raise ValueError(f"unknown r method {method!r}")
    area = (a_c + a_s) / 2.0
    rb = min(max(r_avg, 0.0), 1.0)
    first = _hm_table.AREAS[0]
    if area >= first:
        r = _table_value(rb, area)
    else:
        edge = _table_value(rb, first)
        w = max(0.0, (area - _CHANCE_AREA) / (first - _CHANCE_AREA))
        r = rb + (edge - rb) * w
    return min(max(r, 0.0), max(r_p, r_n, 0.0))


@dataclass(frozen=True)
class AucComparison:
    a_c: float
    a_s: float
    r_p: float
    r_n: float
    r: float
    sigma_c: float
    sigma_s: float
    sigma_diff: float
    z_hat: float
    p_one_sided: float
    ci_diff: tuple[float, float]
    reject_h0: bool


def compare_aucs(a_c: float, a_s: float, positives: int, negatives: int,
                 mst_sens: MatchedSampleTable, mst_spec: MatchedSampleTable,
                 cfg: TestConfig = TestConfig(), r_method: str = "table") -> AucComparison:
    """One-sided z-test of ``a_s > a_c`` for two areas measured on the same cases."""
    r_p, r_n = kendall_correlations(mst_sens, mst_spec)
    r = lookup_r(r_p, r_n, a_c, a_s, r_method)
    s_c = hanley_sigma(a_c, positives, negatives)
    s_s = hanley_sigma(a_s, positives, negatives)
    var = s_c * s_c + s_s * s_s - 2.0 * r * s_c * s_s
    if var <= 0.0:
        raise ValueError("degenerate comparison")
    sd = math.sqrt(var)
    diff = a_s - a_c
    z_hat = diff / sd
    p = normal_cdf(-z_hat)
    zc = cfg.z_ci
    ci = (max(-1.0, diff - zc * sd), min(1.0, diff + zc * sd))
    return AucComparison(a_c, a_s, r_p, r_n, r, s_c, s_s, sd, z_hat, p, ci, z_hat > cfg.z_alpha)


def auc_difference_test(curve_c: LrocCurve, curve_s: LrocCurve,
                        msts: tuple[MatchedSampleTable, MatchedSampleTable],
                        cfg: TestConfig = TestConfig(), r_method: str = "table") -> AucComparison:
    if curve_c.anomaly is not curve_s.anomaly:
        raise ValueError("curves belong to different anomaly types")
    if (curve_c.positives, curve_c.negatives) != (curve_s.positives, curve_s.negatives):
        raise ValueError("curves were not computed on the same cases")
    return compare_aucs(curve_c.auc, curve_s.auc, curve_c.positives, curve_c.negatives,
                        msts[0], msts[1], cfg, r_method)


def write_curve_csv(curves: Sequence[LrocCurve], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["anomaly", "arm", "threshold", "fpr", "sens", "tp", "fp", "tn", "fn"])
        for c in curves:
            for p in c.points:
                w.writerow([c.anomaly.value, c.arm.value, p.threshold, f"{p.fpr:.6f}",
                            f"{p.sens:.6f}", p.counts.tp, p.counts.fp, p.counts.tn, p.counts.fn])
