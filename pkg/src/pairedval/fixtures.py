"""Published study counts and printed result tables, plus a synthetic raw
dataset whose tooth-level tally reproduces the published counts exactly.

Percentages in the ``PRINTED_*`` tables are kept as printed (in %), areas as
fractions. A printed p-value of zero is stored as ``0.0``.
"""

from __future__ import annotations

import random

from .annotations import (
    AnomalyType,
    Annotation,
    Arm,
    BoundingBox,
    GroundTruth,
    ImageRecord,
    StudyDataset,
    ToothRegion,
)
from .counts import AnomalyCounts, StudyCounts
from .matching import DecisionMatrix, Endpoint, MatchedSampleTable

A = AnomalyType

# (tn, fn, fp, tp) control -> study at the 50% operating point
_DECISION = {
    A.CARIES: ((1123, 54, 64, 105), (1106, 24, 81, 135)),
    A.APICAL_LESION: ((1275, 16, 17, 38), (1256, 5, 36, 49)),
    A.ROOT_CANAL_DEFECT: ((1304, 9, 11, 22), (1297, 2, 18, 29)),
    A.MARGINAL_DEFECT: ((1153, 109, 30, 54), (1147, 44, 36, 119)),
    A.BONE_LOSS: ((791, 114, 219, 222), (725, 30, 285, 306)),
    A.CALCULUS: ((1181, 62, 18, 85), (1179, 26, 20, 121)),
}

# (good, profit, loss, bad) for sensitivity and specificity
_MATCHED = {
    A.CARIES: ((102, 33, 3, 21), (1066, 40, 57, 24)),
    A.APICAL_LESION: ((37, 12, 1, 4), (1247, 9, 28, 8)),
    A.ROOT_CANAL_DEFECT: ((22, 7, 0, 2), (1295, 2, 9, 9)),
    A.MARGINAL_DEFECT: ((51, 68, 3, 41), (1125, 22, 28, 8)),
    A.BONE_LOSS: ((212, 94, 10, 20), (627, 98, 164, 121)),
    A.CALCULUS: ((72, 49, 13, 13), (1167, 12, 14, 6)),
}

# printed areas under the LROC curves, control -> study
_AUC = {
    A.CARIES: (0.65, 0.84),
    A.APICAL_LESION: (0.70, 0.92),
    A.ROOT_CANAL_DEFECT: (0.71, 0.93),
    A.MARGINAL_DEFECT: (0.33, 0.80),
    A.BONE_LOSS: (0.60, 0.84),
    A.CALCULUS: (0.58, 0.82),
}

N_IMAGES = 218
N_TEETH = 1346


def paper_counts() -> StudyCounts:
    out = {}
    for anomaly, (c, s) in _DECISION.items():
        dm_c = DecisionMatrix(anomaly, Arm.CONTROL, tp=c[3], fp=c[2], tn=c[0], fn=c[1])
        dm_s = DecisionMatrix(anomaly, Arm.STUDY, tp=s[3], fp=s[2], tn=s[0], fn=s[1])
        sens, spec = _MATCHED[anomaly]
        out[anomaly] = AnomalyCounts(
            anomaly, dm_c, dm_s,
            MatchedSampleTable(anomaly, Endpoint.SENSITIVITY, *sens),
            MatchedSampleTable(anomaly, Endpoint.SPECIFICITY, *spec),
            *_AUC[anomaly],
        )
    return out


# ------------------------------------------------------------ printed tables

# sens control, sens study, sens CIs, spec control, spec study, spec CIs (all %)
PRINTED_ENDPOINTS = {
    A.CARIES: (66.0, 84.9, ((58.7, 73.4), (79.3, 90.5)), 94.6, 93.2, ((93.3, 95.9), (91.7, 94.6))),
    A.APICAL_LESION: (70.4, 90.7, ((58.2, 82.5), (83.0, 98.5)), 98.7, 97.2, ((98.1, 99.3), (96.3, 98.1))),
    A.ROOT_CANAL_DEFECT: (71.0, 93.5, ((55.0, 86.9), (84.9, 100.0)), 99.2, 98.6, ((98.7, 99.7), (98.0, 99.3))),
    A.MARGINAL_DEFECT: (33.1, 73.0, ((25.9, 40.4), (66.2, 79.8)), 97.5, 97.0, ((96.6, 98.4), (96.0, 97.9))),
    A.BONE_LOSS: (66.1, 91.1, ((61.0, 71.1), (88.0, 94.1)), 78.3, 71.8, ((75.8, 80.9), (69.0, 74.6))),
    A.CALCULUS: (57.8, 82.3, ((49.8, 65.8), (76.1, 88.5)), 98.5, 98.3, ((97.8, 99.2), (97.6, 99.1))),
}
PRINTED_ENDPOINT_AVERAGE = (60.7, 85.9, ((51.4, 70.0), (79.6, 91.9)), 94.5, 92.7, ((93.4, 95.5), (91.4, 93.9)))

# chi2, s(chi2) %, s(x) %, x_alpha, e_II %, power %
PRINTED_SENS_TESTS = {
    A.CARIES: (23.4, 0.0, 0.0, 23, 0.0, 100.0),
    A.APICAL_LESION: (7.7, 0.28, 0.17, 10, 1.4, 98.6),
    A.ROOT_CANAL_DEFECT: (5.1, 1.17, 0.78, 6, 0.0, 100.0),
    A.MARGINAL_DEFECT: (57.7, 0.0, 0.0, 43, 0.0, 100.0),
    A.BONE_LOSS: (66.2, 0.0, 0.0, 61, 0.0, 100.0),
    A.CALCULUS: (19.8, 0.0, 0.0, 38, 0.0, 100.0),
}
PRINTED_SPEC_TESTS = {
    A.CARIES: (2.6, 5.21, 5.19, 57, 45.7, 54.3),
    A.APICAL_LESION: (8.8, 0.15, 0.13, 24, 4.7, 95.3),
    A.ROOT_CANAL_DEFECT: (3.3, 3.52, 3.27, 9, 32.2, 67.8),
    A.MARGINAL_DEFECT: (0.5, 23.98, 23.99, 31, 76.1, 23.9),
    A.BONE_LOSS: (16.1, 0.003, 0.003, 145, 0.7, 99.3),
    A.CALCULUS: (0.04, 42.23, 42.25, 18, 91.7, 8.3),
}

# a_c, a_s, CI control, CI study
PRINTED_AUC = {
    A.CARIES: (0.65, 0.84, (0.60, 0.70), (0.80, 0.88)),
    A.APICAL_LESION: (0.70, 0.92, (0.62, 0.78), (0.87, 0.97)),
    A.ROOT_CANAL_DEFECT: (0.71, 0.93, (0.60, 0.81), (0.87, 0.99)),
    A.MARGINAL_DEFECT: (0.33, 0.80, (0.29, 0.37), (0.76, 0.85)),
    A.BONE_LOSS: (0.60, 0.84, (0.57, 0.64), (0.81, 0.87)),
    A.CALCULUS: (0.58, 0.82, (0.53, 0.63), (0.78, 0.87)),
}
PRINTED_AUC_AVERAGE = (0.60, 0.86, (0.54, 0.65), (0.82, 0.90))

# CI of the difference, z-hat, one-sided p
PRINTED_AUC_DIFF = {
    A.CARIES: ((0.15, 0.22), 9.6, 0.0),
    A.APICAL_LESION: ((0.16, 0.28), 7.3, 1.4e-13),
    A.ROOT_CANAL_DEFECT: ((0.15, 0.30), 6.0, 1.1e-9),
    A.MARGINAL_DEFECT: ((0.44, 0.52), 23.1, 0.0),
    A.BONE_LOSS: ((0.20, 0.27), 12.9, 0.0),
    A.CALCULUS: ((0.20, 0.30), 10.7, 0.0),
}
PRINTED_AUC_DIFF_AVERAGE = (0.22, 0.31)

# instance-level figures of the detector itself (precision, sensitivity, F2)
PRINTED_DETECTOR = (0.467, 0.816, 0.706)


# ------------------------------------------------------- synthetic raw data

_TOOTH_W, _TOOTH_H, _GAP = 100, 200, 10
_SENS_CELLS = (("TP", "TP"), ("FN", "TP"), ("TP", "FN"), ("FN", "FN"))
_SPEC_CELLS = (("TN", "TN"), ("FP", "TN"), ("TN", "FP"), ("FP", "FP"))


def _tooth(index: int, tooth_id: str) -> ToothRegion:
    x0 = _GAP + index * (_TOOTH_W + _GAP)
    x1 = x0 + _TOOTH_W
    top, shoulder, apex = _GAP, _GAP + 140, _GAP + _TOOTH_H
    return ToothRegion(tooth_id, ((x0, top), (x1, top), (x1, shoulder),
                                  ((x0 + x1) // 2, apex), (x0, shoulder)))


def _slot(index: int, slot: int) -> BoundingBox:
    x0 = _GAP + index * (_TOOTH_W + _GAP) + 20
    y0 = _GAP + 6 + slot * 22
    return BoundingBox(x0, y0, x0 + 60, y0 + 18)


def _jitter(box: BoundingBox, rng: random.Random, amount: int = 2) -> BoundingBox:
    return box.translated(rng.randint(-amount, amount), rng.randint(-amount, amount))


def synthetic_dataset(counts: StudyCounts | None = None, seed: int = 0, *,
                      n_images: int = N_IMAGES, expert_voting: bool = False,
                      threshold: int = 50) -> StudyDataset:
    """Raw annotations whose tooth-level tally at ``threshold`` equals ``counts``.

    Each anomaly's joint (control, study) cells are shuffled over all teeth.
    Detected teeth carry an annotation at or above ``threshold``; undetected
    ones carry nothing or a sub-threshold annotation, so lower operating
    points differ. With ``expert_voting`` the ground truth is given as three
    expert sets that fuse back to it by two-out-of-three voting.
    """
    counts = paper_counts() if counts is None else counts
    rng = random.Random(seed)
    totals = {ac.sens.total + ac.spec.total for ac in counts.values()}
    if len(totals) != 1:
        raise ValueError("all anomaly types must cover the same number of teeth")
    n_teeth = totals.pop()
    n_images = min(n_images, n_teeth) if n_teeth else 0

    per_image = [n_teeth // n_images + (1 if i < n_teeth % n_images else 0)
                 for i in range(n_images)] if n_images else []
    slots = list(AnomalyType)
    high = [k for k in range(threshold, 101, 10)]
    low = [k for k in range(10, threshold, 10)]

    cells = {}
    for anomaly, ac in counts.items():
        pool = []
        for table, names in ((ac.sens, _SENS_CELLS), (ac.spec, _SPEC_CELLS)):
            for n, cell in zip((table.good, table.profit, table.loss, table.bad), names):
                pool.extend([cell] * n)
        rng.shuffle(pool)
        cells[anomaly] = pool

    images = []
    cursor = 0
    for i, n in enumerate(per_image):
        teeth, gts, arms = [], [], {Arm.CONTROL: [], Arm.STUDY: []}
        experts = ([], [], [])
        for j in range(n):
            teeth.append(_tooth(j, f"t{j + 1}"))
            for anomaly in counts:
                c_label, s_label = cells[anomaly][cursor]
                box = _slot(j, slots.index(anomaly))
                if c_label in ("TP", "FN"):
                    gts.append(GroundTruth(anomaly, box))
                    if expert_voting:
                        chosen = rng.choice(((0, 1, 2), (0, 1), (0, 2), (1, 2)))
                        for e in chosen:
                            experts[e].append(Annotation(anomaly, _jitter(box, rng), 100, Arm.CONTROL, f"expert{e}"))
                elif expert_voting and rng.random() < 0.05:
                    e = rng.randrange(3)
                    experts[e].append(Annotation(anomaly, _jitter(box, rng), 100, Arm.CONTROL, f"expert{e}"))
                for arm, label in ((Arm.CONTROL, c_label), (Arm.STUDY, s_label)):
                    reader = f"reader{i % 7 + 1}"
                    if label in ("TP", "FP"):
                        arms[arm].append(Annotation(anomaly, _jitter(box, rng), rng.choice(high), arm, reader))
                    elif low and rng.random() < 0.4:
                        arms[arm].append(Annotation(anomaly, _jitter(box, rng), rng.choice(low), arm, reader))
            cursor += 1
        width = _GAP + n * (_TOOTH_W + _GAP)
        height = _TOOTH_H + 2 * _GAP
        images.append(ImageRecord(
            f"img{i + 1:03d}", width, height, tuple(teeth),
            ground_truth=None if expert_voting else tuple(gts),
            expert_sets=tuple(tuple(e) for e in experts) if expert_voting else None,
            control_annotations=tuple(arms[Arm.CONTROL]),
            study_annotations=tuple(arms[Arm.STUDY]),
        ))
    return StudyDataset(tuple(images))
