from __future__ import annotations

import pytest

from pairedval.annotations import (
    Annotation,
    AnomalyType,
    Arm,
    BoundingBox,
    GroundTruth,
    ImageRecord,
    ToothRegion,
)
from pairedval.fixtures import paper_counts

CARIES = AnomalyType.CARIES


def rect(tooth_id: str, x0: float, y0: float, x1: float, y1: float) -> ToothRegion:
    return ToothRegion(tooth_id, ((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def ann(box, confidence=80, arm=Arm.CONTROL, anomaly=CARIES) -> Annotation:
    return Annotation(anomaly, BoundingBox(*box), confidence, arm)


def gt(box, anomaly=CARIES) -> GroundTruth:
    return GroundTruth(anomaly, BoundingBox(*box))


def image(teeth, ground_truth=(), control=(), study=(), image_id="img", width=400, height=200):
    return ImageRecord(image_id, width, height, tuple(teeth), tuple(ground_truth), None,
                       tuple(control), tuple(study))


@pytest.fixture(scope="session")
def paper():
    return paper_counts()


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    results = test_acceptance.RESULTS
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        parts = results[criterion]
        ok = all(p_ok for p_ok, _ in parts.values())
        detail = "; ".join(f"{name}: {d}" for name, (_, d) in parts.items())
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
