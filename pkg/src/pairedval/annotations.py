"""Domain types for paired reader-study datasets and their JSON interchange format.

Coordinates are integer pixels. Boxes are half-open rectangles
``[x_min, x_max) x [y_min, y_max)`` so ``area == width * height`` counts pixels
exactly. Tooth regions are simple polygons in the same coordinate space.

Constructors do not raise on invariant violations; :func:`validate_dataset`
reports them as data so a whole file can be checked in one pass.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

__all__ = [
    "AnomalyType",
    "Arm",
    "BoundingBox",
    "Annotation",
    "GroundTruth",
    "ToothRegion",
    "ImageRecord",
    "StudyDataset",
    "Violation",
    "SchemaError",
    "CONFIDENCE_LEVELS",
    "dice",
    "validate_dataset",
    "dataset_from_dict",
    "dataset_to_dict",
    "load_dataset",
    "save_dataset",
]

CONFIDENCE_LEVELS = tuple(range(0, 101, 10))


class AnomalyType(str, enum.Enum):
    CARIES = "caries"
    APICAL_LESION = "apical_lesion"
    ROOT_CANAL_DEFECT = "root_canal_defect"
    MARGINAL_DEFECT = "marginal_defect"
    BONE_LOSS = "bone_loss"
    CALCULUS = "calculus"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    AnomalyType.CARIES: "Caries",
    AnomalyType.APICAL_LESION: "Apical lesion",
    AnomalyType.ROOT_CANAL_DEFECT: "Root canal defect",
    AnomalyType.MARGINAL_DEFECT: "Marginal defect",
    AnomalyType.BONE_LOSS: "Bone loss",
    AnomalyType.CALCULUS: "Calculus",
}


class Arm(str, enum.Enum):
    CONTROL = "control"
    STUDY = "study"


@dataclass(frozen=True)
class BoundingBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def area(self) -> int:
        if self.width <= 0 or self.height <= 0:
            return 0
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0

    def intersection_area(self, other: BoundingBox) -> int:
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if w <= 0 or h <= 0:
            return 0
        return w * h

    def translated(self, dx: int, dy: int) -> BoundingBox:
        return BoundingBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def as_list(self) -> list[int]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def dice(a: BoundingBox, b: BoundingBox) -> float:
    """Dice overlap ``2|A n B| / (|A| + |B|)`` of two rectangles."""
    total = a.area + b.area
    if total == 0:
        return 0.0
    return 2.0 * a.intersection_area(b) / total


@dataclass(frozen=True)
class Annotation:
    anomaly: AnomalyType
    box: BoundingBox
    confidence: int
    arm: Arm
    reader_id: str = ""


@dataclass(frozen=True)
class GroundTruth:
    anomaly: AnomalyType
    box: BoundingBox


@dataclass(frozen=True)
class ToothRegion:
    tooth_id: str
    polygon: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: int
    height: int
    teeth: tuple[ToothRegion, ...] = ()
    ground_truth: tuple[GroundTruth, ...] | None = None
    expert_sets: tuple[tuple[Annotation, ...], ...] | None = None
    control_annotations: tuple[Annotation, ...] = ()
    study_annotations: tuple[Annotation, ...] = ()

    def annotations(self, arm: Arm) -> tuple[Annotation, ...]:
        return self.control_annotations if Arm(arm) is Arm.CONTROL else self.study_annotations


@dataclass(frozen=True)
class StudyDataset:
    images: tuple[ImageRecord, ...] = ()

    @property
    def n_images(self) -> int:
        return len(self.images)

    @property
    def n_teeth(self) -> int:
        return sum(len(img.teeth) for img in self.images)


@dataclass(frozen=True)
class Violation:
    image_id: str
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.image_id}: {self.field}: {self.rule}"


# ---------------------------------------------------------------- validation


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_segment(p1, p2, p3):
        return True
    if o2 == 0 and on_segment(p1, p2, p4):
        return True
    if o3 == 0 and on_segment(p3, p4, p1):
        return True
    if o4 == 0 and on_segment(p3, p4, p2):
        return True
    return False


def is_simple_polygon(vertices: Sequence[tuple[float, float]]) -> bool:
    """True if no two non-adjacent edges touch and the polygon has area."""
    n = len(vertices)
    if n < 3:
        return False
    if len(set(vertices)) != n:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return False
    return polygon_area(vertices) > 0


def polygon_area(vertices: Sequence[tuple[float, float]]) -> float:
    """Unsigned shoelace area."""
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return abs(s) / 2.0


def _box_violations(image: ImageRecord, where: str, box: BoundingBox) -> list[Violation]:
    out = []
    if box.x_min >= box.x_max or box.y_min >= box.y_max:
        out.append(Violation(image.image_id, where, "degenerate box"))
    if box.x_min < 0 or box.y_min < 0 or box.x_max > image.width or box.y_max > image.height:
        out.append(Violation(image.image_id, where, "box outside image bounds"))
    return out


def _annotation_violations(image, where, ann: Annotation) -> list[Violation]:
    out = _box_violations(image, f"{where}.box", ann.box)
    c = ann.confidence
    if not isinstance(c, int) or c < 0 or c > 100:
        out.append(Violation(image.image_id, f"{where}.confidence", "confidence outside [0, 100]"))
    elif c % 10 != 0:
        out.append(Violation(image.image_id, f"{where}.confidence", "not a multiple of 10"))
    elif c == 0 and ann.arm is not Arm.STUDY:
        out.append(Violation(image.image_id, f"{where}.confidence",
                             "confidence 0 only allowed on study-arm annotations"))
    return out


def validate_dataset(dataset: StudyDataset) -> list[Violation]:
    """Check every type invariant; returns an empty list for a clean dataset."""
    out: list[Violation] = []
    seen_images = set()
    for img in dataset.images:
        iid = img.image_id
        if iid in seen_images:
            out.append(Violation(iid, "id", "duplicate image id"))
        seen_images.add(iid)
        if img.width <= 0 or img.height <= 0:
            out.append(Violation(iid, "size", "image size must be positive"))
        if (img.ground_truth is None) == (img.expert_sets is None):
            out.append(Violation(iid, "groundTruth/expertSets",
                                 "exactly one of groundTruth or expertSets must be given"))
        if img.expert_sets is not None and len(img.expert_sets) != 3:
            out.append(Violation(iid, "expertSets", "expected exactly 3 expert sets"))
        tooth_ids = set()
        for i, tooth in enumerate(img.teeth):
            where = f"teeth[{i}]"
            if tooth.tooth_id in tooth_ids:
                out.append(Violation(iid, f"{where}.id", "duplicate tooth id"))
            tooth_ids.add(tooth.tooth_id)
            if len(tooth.polygon) < 3:
                out.append(Violation(iid, f"{where}.polygon", "fewer than 3 vertices"))
            elif not is_simple_polygon(tooth.polygon):
                out.append(Violation(iid, f"{where}.polygon", "polygon is not simple"))
        for i, gt in enumerate(img.ground_truth or ()):
            out.extend(_box_violations(img, f"groundTruth[{i}].box", gt.box))
        for s, expert in enumerate(img.expert_sets or ()):
            for i, ann in enumerate(expert):
                out.extend(_box_violations(img, f"expertSets[{s}][{i}].box", ann.box))
        for i, ann in enumerate(img.control_annotations):
            out.extend(_annotation_violations(img, f"control[{i}]", ann))
        for i, ann in enumerate(img.study_annotations):
            out.extend(_annotation_violations(img, f"study[{i}]", ann))
    return out


# --------------------------------------------------------------------- JSON


class SchemaError(ValueError):
    """Structural problem in a dataset document; ``path`` names the offending node."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(obj: Any, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    return obj[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {value!r}")
    return value


def _box(value: Any, path: str) -> BoundingBox:
    if not isinstance(value, list) or len(value) != 4:
        raise SchemaError(path, "expected [x_min, y_min, x_max, y_max]")
    return BoundingBox(*(_int(v, f"{path}[{i}]") for i, v in enumerate(value)))


def _anomaly(value: Any, path: str) -> AnomalyType:
    try:
        return AnomalyType(value)
    except ValueError:
        raise SchemaError(path, f"unknown anomaly type {value!r}") from None


def _annotation(obj: Any, path: str, arm: Arm) -> Annotation:
    anomaly = _anomaly(_require(obj, "anomaly", path), f"{path}.anomaly")
    box = _box(_require(obj, "box", path), f"{path}.box")
    confidence = _int(obj.get("confidence", 100), f"{path}.confidence")
    reader = obj.get("reader", "")
    return Annotation(anomaly, box, confidence, arm, str(reader))


def _list(obj: dict, key: str, path: str) -> list:
    value = obj.get(key, [])
    if not isinstance(value, list):
        raise SchemaError(f"{path}.{key}", "expected a list")
    return value


def _image(obj: Any, path: str) -> ImageRecord:
    image_id = str(_require(obj, "id", path))
    width = _int(_require(obj, "width", path), f"{path}.width")
    height = _int(_require(obj, "height", path), f"{path}.height")
    teeth = []
    for i, t in enumerate(_list(obj, "teeth", path)):
        tp = f"{path}.teeth[{i}]"
        poly = _require(t, "polygon", tp)
        if not isinstance(poly, list):
            raise SchemaError(f"{tp}.polygon", "expected a list of [x, y] vertices")
        verts = []
        for j, v in enumerate(poly):
            if not isinstance(v, list) or len(v) != 2:
                raise SchemaError(f"{tp}.polygon[{j}]", "expected [x, y]")
            verts.append((_int(v[0], f"{tp}.polygon[{j}][0]"), _int(v[1], f"{tp}.polygon[{j}][1]")))
        teeth.append(ToothRegion(str(_require(t, "id", tp)), tuple(verts)))

    ground_truth = None
    if "groundTruth" in obj:
        ground_truth = tuple(
            GroundTruth(_anomaly(_require(g, "anomaly", f"{path}.groundTruth[{i}]"),
                                 f"{path}.groundTruth[{i}].anomaly"),
                        _box(_require(g, "box", f"{path}.groundTruth[{i}]"),
                             f"{path}.groundTruth[{i}].box"))
            for i, g in enumerate(_list(obj, "groundTruth", path))
        )
    expert_sets = None
    if "expertSets" in obj:
        sets = []
        for s, expert in enumerate(_list(obj, "expertSets", path)):
            if not isinstance(expert, list):
                raise SchemaError(f"{path}.expertSets[{s}]", "expected a list")
            # expert confidences are accepted but unused by the vote
            sets.append(tuple(_annotation(a, f"{path}.expertSets[{s}][{i}]", Arm.CONTROL)
                              for i, a in enumerate(expert)))
        expert_sets = tuple(sets)

    control = tuple(_annotation(a, f"{path}.control[{i}]", Arm.CONTROL)
                    for i, a in enumerate(_list(obj, "control", path)))
    study = tuple(_annotation(a, f"{path}.study[{i}]", Arm.STUDY)
                  for i, a in enumerate(_list(obj, "study", path)))
    # a rejected AI proposal (confidence 0) counts exactly like a deleted one
    study = tuple(a for a in study if a.confidence != 0)
    return ImageRecord(image_id, width, height, tuple(teeth), ground_truth, expert_sets,
                       control, study)


def dataset_from_dict(doc: Any) -> StudyDataset:
    images = _require(doc, "images", "$")
    if not isinstance(images, list):
        raise SchemaError("$.images", "expected a list")
    return StudyDataset(tuple(_image(img, f"$.images[{i}]") for i, img in enumerate(images)))


def _annotation_to_dict(a: Annotation) -> dict:
    d = {"anomaly": a.anomaly.value, "box": a.box.as_list(), "confidence": a.confidence}
    if a.reader_id:
        d["reader"] = a.reader_id
    return d


def dataset_to_dict(dataset: StudyDataset) -> dict:
    images = []
    for img in dataset.images:
        d: dict[str, Any] = {
            "id": img.image_id,
            "width": img.width,
            "height": img.height,
            "teeth": [{"id": t.tooth_id, "polygon": [list(v) for v in t.polygon]}
                      for t in img.teeth],
        }
        if img.ground_truth is not None:
            d["groundTruth"] = [{"anomaly": g.anomaly.value, "box": g.box.as_list()}
                                for g in img.ground_truth]
        if img.expert_sets is not None:
            d["expertSets"] = [[_annotation_to_dict(a) for a in s] for s in img.expert_sets]
        d["control"] = [_annotation_to_dict(a) for a in img.control_annotations]
        d["study"] = [_annotation_to_dict(a) for a in img.study_annotations]
        images.append(d)
    return {"images": images}


def load_dataset(path: str | Path) -> StudyDataset:
    """Read a dataset JSON file. Raises ``SchemaError`` (also for invalid JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}:{exc.lineno}:{exc.colno}", f"invalid JSON: {exc.msg}") from None
    return dataset_from_dict(doc)


def save_dataset(dataset: StudyDataset, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(dataset)), encoding="utf-8")

