"""Paired reader-study validation for detection aids on dental radiographs.

Tooth-level classification of annotations against ground truth, matched
sample tables between an unaided (control) and an aided (study) reading,
McNemar and exact binomial tests with power, Wald intervals, LROC curves and
the correlated AUC comparison.
"""

__version__ = "0.1.0"

from .analysis import AnomalyAnalysis, StudyAnalysis, analyze, endpoint_report
from .annotations import (
    Annotation,
    AnomalyType,
    Arm,
    BoundingBox,
    GroundTruth,
    ImageRecord,
    SchemaError,
    StudyDataset,
    ToothRegion,
    dice,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .calibration import SimScenario, calibrate, simulate_mst
from .counts import AnomalyCounts, counts_from_dataset, read_counts_csv, write_counts_csv
from .lroc import (
    LrocCurve,
    auc_stats,
    build_lroc,
    compare_aucs,
    hanley_sigma,
    kendall_correlations,
    lookup_r,
    trapezoid_auc,
)
from .matching import (
    ClassLabel,
    DecisionMatrix,
    Endpoint,
    MatchedSampleTable,
    classify_teeth,
    match_instances,
    matched_samples,
    tally,
)
from .paired_tests import TestConfig, binomial_test, f_beta, mcnemar_test, sens_spec, wald_ci
from .report import reproduce_paper

__all__ = [
    "Annotation", "AnomalyType", "Arm", "BoundingBox", "GroundTruth", "ImageRecord", "SchemaError",
    "StudyDataset", "ToothRegion", "dice", "load_dataset", "save_dataset", "validate_dataset",
    "ClassLabel", "DecisionMatrix", "Endpoint", "MatchedSampleTable", "classify_teeth",
    "match_instances", "matched_samples", "tally",
    "TestConfig", "binomial_test", "f_beta", "mcnemar_test", "sens_spec", "wald_ci",
    "LrocCurve", "auc_stats", "build_lroc", "compare_aucs", "hanley_sigma", "kendall_correlations",
    "lookup_r", "trapezoid_auc",
    "AnomalyCounts", "counts_from_dataset", "read_counts_csv", "write_counts_csv",
    "AnomalyAnalysis", "StudyAnalysis", "analyze", "endpoint_report",
    "SimScenario", "calibrate", "simulate_mst", "reproduce_paper",
]
