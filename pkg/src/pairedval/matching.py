"""Instance matching, majority-vote ground truth and tooth-level classification.

Instances are matched by anomaly type and Dice overlap. Every instance is then
assigned to the teeth it touches and each tooth gets exactly one label per
(anomaly, arm, threshold) using the strict priority FN > TP > FP > TN.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .annotations import (
    AnomalyType,
    Annotation,
    Arm,
    BoundingBox,
    GroundTruth,
    ImageRecord,
    StudyDataset,
    ToothRegion,
    dice,
    polygon_area,
)

__all__ = [
    "DEFAULT_MIN_DICE",
    "THRESHOLDS",
    "ClassLabel",
    "Endpoint",
    "ToothClassification",
    "DecisionMatrix",
    "MatchedSampleTable",
    "MatchResult",
    "match_instances",
    "majority_vote_ground_truth",
    "resolve_ground_truth",
    "clip_polygon_to_box",
    "polygon_centroid",
    "assign_to_teeth",
    "classify_teeth",
    "tally",
    "matched_samples",
    "matched_samples_from_labels",
    "count_labels",
    "tally_all",
]

DEFAULT_MIN_DICE = 0.25
THRESHOLDS = tuple(range(100, 0, -10))


class ClassLabel(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    TN = "TN"
    FN = "FN"


class Endpoint(str, enum.Enum):
    SENSITIVITY = "sensitivity"
    SPECIFICITY = "specificity"


@dataclass(frozen=True)
class ToothClassification:
    image_id: str
    tooth_id: str
    anomaly: AnomalyType
    arm: Arm
    label: ClassLabel
    threshold: int


@dataclass(frozen=True)
class DecisionMatrix:
    anomaly: AnomalyType
    arm: Arm
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.positives + self.negatives


@dataclass(frozen=True)
class MatchedSampleTable:
    """Joint control/study counts on one endpoint.

    ``good``/``bad`` are the concordant cells, ``profit`` counts units that
    improved from control to study and ``loss`` those that got worse.
    """

    anomaly: AnomalyType
    endpoint: Endpoint
    good: int
    profit: int
    loss: int
    bad: int

    @property
    def discordant(self) -> int:
        return self.profit + self.loss

    @property
    def total(self) -> int:
        return self.good + self.profit + self.loss + self.bad

    def margins(self) -> dict[str, int]:
        """Marginal counts in decision-matrix terms, e.g. ``{"tp_control": ...}``."""
        if self.endpoint is Endpoint.SENSITIVITY:
            return {
                "tp_control": self.good + self.loss,
                "fn_control": self.bad + self.profit,
                "tp_study": self.good + self.profit,
                "fn_study": self.bad + self.loss,
            }
        return {
            "tn_control": self.good + self.loss,
            "fp_control": self.bad + self.profit,
            "tn_study": self.good + self.profit,
            "fp_study": self.bad + self.loss,
        }

    def swapped(self) -> MatchedSampleTable:
        return MatchedSampleTable(self.anomaly, self.endpoint, self.good, self.loss,
                                  self.profit, self.bad)


# ------------------------------------------------------------------ matching


@dataclass(frozen=True)
class MatchResult:
    matches: tuple[tuple[int, int, float], ...]
    unmatched_candidates: tuple[int, ...]
    unmatched_references: tuple[int, ...]


def _check_min_dice(min_dice: float) -> None:
    if not (0.0 < min_dice <= 1.0):
        raise ValueError(f"min_dice={min_dice!r} not in (0, 1]")


def match_instances(candidates: Sequence[Annotation], references: Sequence[GroundTruth],
                    min_dice: float = DEFAULT_MIN_DICE) -> MatchResult:
    """Greedy one-to-one matching of candidates to references.

    Only same-type pairs with Dice >= ``min_dice`` are eligible. Pairs are taken
    in descending Dice order, ties broken by (candidate index, reference index).
    """
    _check_min_dice(min_dice)
    pairs = []
    for ci, cand in enumerate(candidates):
        for ri, ref in enumerate(references):
            if cand.anomaly != ref.anomaly:
                continue
            d = dice(cand.box, ref.box)
            if d >= min_dice:
                pairs.append((-d, ci, ri))
    pairs.sort()
    used_c, used_r = set(), set()
    matches = []
    for neg_d, ci, ri in pairs:
        if ci in used_c or ri in used_r:
            continue
        used_c.add(ci)
        used_r.add(ri)
        matches.append((ci, ri, -neg_d))
    return MatchResult(
        tuple(matches),
        tuple(i for i in range(len(candidates)) if i not in used_c),
        tuple(i for i in range(len(references)) if i not in used_r),
    )


def majority_vote_ground_truth(expert_sets: Sequence[Sequence[Annotation]],
                               min_dice: float = DEFAULT_MIN_DICE) -> list[GroundTruth]:
    """Fuse three experts' annotations by two-out-of-three voting.

    Same-type boxes from different experts are linked greedily in descending
    Dice order (>= ``min_dice``); a cluster never holds two boxes from the same
    expert. Clusters backed by at least two experts become one ground-truth
    instance whose box is the rounded coordinate-wise mean.
    """
    if len(expert_sets) != 3:
        raise ValueError(f"expected 3 expert sets, got {len(expert_sets)}")
    _check_min_dice(min_dice)
    nodes = [(e, i, ann) for e, expert in enumerate(expert_sets) for i, ann in enumerate(expert)]
    parent = list(range(len(nodes)))
    experts = [{e} for e, _, _ in nodes]

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    links = []
    for u in range(len(nodes)):
        for v in range(u + 1, len(nodes)):
            eu, _, au = nodes[u]
            ev, _, av = nodes[v]
            if eu == ev or au.anomaly != av.anomaly:
                continue
            d = dice(au.box, av.box)
            if d >= min_dice:
                links.append((-d, u, v))
    links.sort()
    for _, u, v in links:
        ru, rv = find(u), find(v)
        if ru == rv or experts[ru] & experts[rv]:
            continue
        parent[rv] = ru
        experts[ru] |= experts[rv]

    clusters: dict[int, list[int]] = {}
    for u in range(len(nodes)):
        clusters.setdefault(find(u), []).append(u)
    out = []
    for root in sorted(clusters):
        members = clusters[root]
        if len(members) < 2:
            continue
        boxes = [nodes[u][2].box for u in members]
        k = len(boxes)
        mean = [math.floor(sum(getattr(b, f) for b in boxes) / k + 0.5)
                for f in ("x_min", "y_min", "x_max", "y_max")]
        out.append(GroundTruth(nodes[members[0]][2].anomaly, BoundingBox(*mean)))
    return out


def resolve_ground_truth(image: ImageRecord, min_dice: float = DEFAULT_MIN_DICE) -> tuple[GroundTruth, ...]:
    if image.ground_truth is not None:
        return image.ground_truth
    if image.expert_sets is not None:
        return tuple(majority_vote_ground_truth(image.expert_sets, min_dice))
    return ()


# ---------------------------------------------------------------- geometry


def clip_polygon_to_box(polygon: Sequence[tuple[float, float]], box: BoundingBox) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of ``polygon`` against an axis-aligned box."""

    def clip(points, inside, cross):
        if not points:
            return []
        out = []
        prev = points[-1]
        for cur in points:
            if inside(cur):
                if not inside(prev):
                    out.append(cross(prev, cur))
                out.append(cur)
            elif inside(prev):
                out.append(cross(prev, cur))
            prev = cur
        return out

    def at_x(x):
        return lambda a, b: (x, a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]))

    def at_y(y):
        return lambda a, b: (a[0] + (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]), y)

    pts = [tuple(map(float, p)) for p in polygon]
    pts = clip(pts, lambda p: p[0] >= box.x_min, at_x(box.x_min))
    pts = clip(pts, lambda p: p[0] <= box.x_max, at_x(box.x_max))
    pts = clip(pts, lambda p: p[1] >= box.y_min, at_y(box.y_min))
    pts = clip(pts, lambda p: p[1] <= box.y_max, at_y(box.y_max))
    return pts


def polygon_centroid(polygon: Sequence[tuple[float, float]]) -> tuple[float, float]:
    a = cx = cy = 0.0
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        a += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if a == 0:
        xs, ys = zip(*polygon)
        return sum(xs) / n, sum(ys) / n
    return cx / (3.0 * a), cy / (3.0 * a)


@lru_cache(maxsize=65536)
def _assign(box: BoundingBox, teeth: tuple[ToothRegion, ...]) -> tuple[str, ...]:
    if not teeth:
        raise ValueError("no regions")
    hits = tuple(t.tooth_id for t in teeth
                 if polygon_area(clip_polygon_to_box(t.polygon, box)) > 0.0)
    if hits:
        return hits
    cx, cy = box.center

    def dist(t):
        tx, ty = polygon_centroid(t.polygon)
        return math.hypot(tx - cx, ty - cy)

    return (min(teeth, key=dist).tooth_id,)


def assign_to_teeth(box: BoundingBox, teeth: Sequence[ToothRegion]) -> list[str]:
    """Teeth whose region overlaps ``box`` with positive area.

    Falls back to the tooth with the nearest centroid when nothing overlaps, so
    every instance lands on at least one tooth.
    """
    return list(_assign(box, tuple(teeth)))


# ----------------------------------------------------------- classification


def _check_threshold(threshold: int) -> None:
    if threshold not in THRESHOLDS:
        raise ValueError(f"threshold={threshold!r} must be one of {THRESHOLDS}")


def classify_teeth(image: ImageRecord, arm: Arm, anomaly: AnomalyType, threshold: int = 50,
                   min_dice: float = DEFAULT_MIN_DICE,
                   ground_truth: Sequence[GroundTruth] | None = None) -> list[ToothClassification]:
    """Label every tooth of ``image`` for one anomaly type, arm and operating point.

    Annotations below ``threshold`` are dropped before matching. Matched and
    missed references are located on the teeth under the ground-truth box, so
    the positive teeth are the same in both arms; unmatched candidates are
    located under their own box.
    """
    _check_threshold(threshold)
    arm = Arm(arm)
    anomaly = AnomalyType(anomaly)
    if ground_truth is None:
        ground_truth = resolve_ground_truth(image, min_dice)
    refs = [g for g in ground_truth if g.anomaly is anomaly]
    cands = [a for a in image.annotations(arm) if a.anomaly is anomaly and a.confidence >= threshold]
    result = match_instances(cands, refs, min_dice)

    fn_teeth, tp_teeth, fp_teeth = set(), set(), set()
    for _, ri, _ in result.matches:
        tp_teeth.update(_assign(refs[ri].box, image.teeth))
    for ri in result.unmatched_references:
        fn_teeth.update(_assign(refs[ri].box, image.teeth))
    for ci in result.unmatched_candidates:
        fp_teeth.update(_assign(cands[ci].box, image.teeth))

    out = []
    for tooth in image.teeth:
        tid = tooth.tooth_id
        if tid in fn_teeth:
            label = ClassLabel.FN
        elif tid in tp_teeth:
            label = ClassLabel.TP
        elif tid in fp_teeth:
            label = ClassLabel.FP
        else:
            label = ClassLabel.TN
        out.append(ToothClassification(image.image_id, tid, anomaly, arm, label, threshold))
    return out


def _classify_dataset(dataset: StudyDataset, arm, anomaly, threshold, min_dice):
    for image in dataset.images:
        yield from classify_teeth(image, arm, anomaly, threshold, min_dice)


def count_labels(labels: Iterable[ToothClassification], anomaly, arm) -> DecisionMatrix:
    """Decision matrix over a collection of tooth labels."""
    c = Counter(t.label for t in labels)
    return DecisionMatrix(anomaly, arm, c[ClassLabel.TP], c[ClassLabel.FP],
                          c[ClassLabel.TN], c[ClassLabel.FN])


def tally(dataset: StudyDataset, arm: Arm, anomaly: AnomalyType, threshold: int = 50,
          min_dice: float = DEFAULT_MIN_DICE) -> DecisionMatrix:
    arm, anomaly = Arm(arm), AnomalyType(anomaly)
    return count_labels(_classify_dataset(dataset, arm, anomaly, threshold, min_dice), anomaly, arm)


_CELL = {
    Endpoint.SENSITIVITY: {
        (ClassLabel.TP, ClassLabel.TP): "good",
        (ClassLabel.FN, ClassLabel.TP): "profit",
        (ClassLabel.TP, ClassLabel.FN): "loss",
        (ClassLabel.FN, ClassLabel.FN): "bad",
    },
    Endpoint.SPECIFICITY: {
        (ClassLabel.TN, ClassLabel.TN): "good",
        (ClassLabel.FP, ClassLabel.TN): "profit",
        (ClassLabel.TN, ClassLabel.FP): "loss",
        (ClassLabel.FP, ClassLabel.FP): "bad",
    },
}


def matched_samples_from_labels(control: Sequence[ToothClassification],
                                study: Sequence[ToothClassification],
                                anomaly: AnomalyType, endpoint: Endpoint) -> MatchedSampleTable:
    """Cross-tabulate paired control/study labels on one endpoint."""
    endpoint = Endpoint(endpoint)
    c_map = {(t.image_id, t.tooth_id): t.label for t in control}
    s_map = {(t.image_id, t.tooth_id): t.label for t in study}
    if c_map.keys() != s_map.keys() or len(c_map) != len(control) or len(s_map) != len(study):
        raise ValueError("unpaired data")
    cells = Counter()
    positive = {ClassLabel.TP, ClassLabel.FN}
    for key, c_label in c_map.items():
        s_label = s_map[key]
        if (c_label in positive) != (s_label in positive):
            raise ValueError(f"unpaired data: ground truth differs between arms at {key}")
        if (c_label in positive) != (endpoint is Endpoint.SENSITIVITY):
            continue
        cells[_CELL[endpoint][(c_label, s_label)]] += 1
    return MatchedSampleTable(AnomalyType(anomaly), endpoint, cells["good"], cells["profit"],
                              cells["loss"], cells["bad"])


def matched_samples(dataset: StudyDataset, anomaly: AnomalyType, endpoint: Endpoint,
                    threshold: int = 50, min_dice: float = DEFAULT_MIN_DICE) -> MatchedSampleTable:
    anomaly = AnomalyType(anomaly)
    control = list(_classify_dataset(dataset, Arm.CONTROL, anomaly, threshold, min_dice))
    study = list(_classify_dataset(dataset, Arm.STUDY, anomaly, threshold, min_dice))
    return matched_samples_from_labels(control, study, anomaly, endpoint)


def tally_all(dataset: StudyDataset, threshold: int = 50, min_dice: float = DEFAULT_MIN_DICE):
    """Decision matrices and both matched-sample tables for every anomaly type.

    Returns ``{anomaly: (dm_control, dm_study, mst_sens, mst_spec)}``; ground
    truth is resolved once per image.
    """
    _check_threshold(threshold)
    gts = [resolve_ground_truth(img, min_dice) for img in dataset.images]
    out = {}
    for anomaly in AnomalyType:
        labels = {}
        for arm in Arm:
            labels[arm] = [t for img, gt in zip(dataset.images, gts)
                           for t in classify_teeth(img, arm, anomaly, threshold, min_dice, gt)]
        out[anomaly] = (
            count_labels(labels[Arm.CONTROL], anomaly, Arm.CONTROL),
            count_labels(labels[Arm.STUDY], anomaly, Arm.STUDY),
            matched_samples_from_labels(labels[Arm.CONTROL], labels[Arm.STUDY], anomaly,
                                        Endpoint.SENSITIVITY),
            matched_samples_from_labels(labels[Arm.CONTROL], labels[Arm.STUDY], anomaly,
                                        Endpoint.SPECIFICITY),
        )
    return out
