"""Pre-tallied counts: the interchange tier between raw datasets and reports.

A counts CSV has two rows per anomaly type (control and study) with the
decision-matrix cells, the matched-sample cells of both endpoints (repeated on
both rows) and an optional per-arm AUC::

    anomaly,arm,tp,fp,tn,fn,sens_g,sens_rho,sens_lambda,sens_b,spec_g,spec_rho,spec_lambda,spec_b,auc
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .annotations import AnomalyType, Arm, StudyDataset
from .lroc import LrocCurve, curve_from_counts
from .matching import (
    DEFAULT_MIN_DICE,
    THRESHOLDS,
    DecisionMatrix,
    Endpoint,
    MatchedSampleTable,
    classify_teeth,
    count_labels,
    matched_samples_from_labels,
    resolve_ground_truth,
)

log = logging.getLogger(__name__)

CSV_HEADER = [
    "anomaly", "arm", "tp", "fp", "tn", "fn",
    "sens_g", "sens_rho", "sens_lambda", "sens_b",
    "spec_g", "spec_rho", "spec_lambda", "spec_b",
    "auc",
]


class CountsFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AnomalyCounts:
    anomaly: AnomalyType
    control: DecisionMatrix
    study: DecisionMatrix
    sens: MatchedSampleTable
    spec: MatchedSampleTable
    auc_control: float | None = None
    auc_study: float | None = None
    curves: tuple[LrocCurve, LrocCurve] | None = None

    @property
    def positives(self) -> int:
        return self.control.positives

    @property
    def negatives(self) -> int:
        return self.control.negatives

    def consistency_errors(self) -> list[str]:
        """Identities linking the matched-sample margins to both decision matrices."""
        name = self.anomaly.value
        errs = []
        if self.control.positives != self.study.positives:
            errs.append(f"{name}: |P| differs between arms")
        if self.control.negatives != self.study.negatives:
            errs.append(f"{name}: |N| differs between arms")
        expected = {
            "tp_control": self.control.tp, "fn_control": self.control.fn,
            "tp_study": self.study.tp, "fn_study": self.study.fn,
            "tn_control": self.control.tn, "fp_control": self.control.fp,
            "tn_study": self.study.tn, "fp_study": self.study.fp,
        }
        for mst in (self.sens, self.spec):
            for key, value in mst.margins().items():
                if value != expected[key]:
                    errs.append(f"{name}: {mst.endpoint.value} table margin {key}={value} "
                                f"but decision matrix has {expected[key]}")
        return errs


StudyCounts = dict  # AnomalyType -> AnomalyCounts, in AnomalyType order


def counts_from_dataset(dataset: StudyDataset, threshold: int = 50,
                        min_dice: float = DEFAULT_MIN_DICE, curves: bool = True) -> StudyCounts:
    """Classify every tooth and tally all anomaly types.

    With ``curves`` the LROC curve of each arm is built as well and its area
    stored; anomaly types without positives or negatives get no curve. A
    dataset without teeth yields no tables at all.
    """
    if dataset.n_teeth == 0:
        return {}
    gts = [resolve_ground_truth(img, min_dice) for img in dataset.images]
    wanted = sorted(set(THRESHOLDS) | {threshold}, reverse=True) if curves else [threshold]
    out: StudyCounts = {}
    for anomaly in AnomalyType:
        per_k = {}
        for k in wanted:
            labels = {arm: [t for img, gt in zip(dataset.images, gts)
                            for t in classify_teeth(img, arm, anomaly, k, min_dice, gt)]
                      for arm in Arm}
            per_k[k] = labels
        labels = per_k[threshold]
        dm_c = count_labels(labels[Arm.CONTROL], anomaly, Arm.CONTROL)
        dm_s = count_labels(labels[Arm.STUDY], anomaly, Arm.STUDY)
        sens = matched_samples_from_labels(labels[Arm.CONTROL], labels[Arm.STUDY], anomaly,
                                           Endpoint.SENSITIVITY)
        spec = matched_samples_from_labels(labels[Arm.CONTROL], labels[Arm.STUDY], anomaly,
                                           Endpoint.SPECIFICITY)
        pair = None
        if curves and dm_c.positives > 0 and dm_c.negatives > 0:
            pair = tuple(
                curve_from_counts(anomaly, arm, [(k, count_labels(per_k[k][arm], anomaly, arm))
                                                 for k in THRESHOLDS])
                for arm in Arm
            )
        out[anomaly] = AnomalyCounts(anomaly, dm_c, dm_s, sens, spec,
                                     pair[0].auc if pair else None,
                                     pair[1].auc if pair else None, pair)
    return out


def _fmt_auc(v):
    # shortest repr that round-trips, so tallied areas survive the CSV exactly
    return "" if v is None else repr(float(v))


def write_counts_csv(counts: StudyCounts, path_or_buf) -> None:
    own = isinstance(path_or_buf, (str, Path))
    fh = open(path_or_buf, "w", newline="", encoding="utf-8") if own else path_or_buf
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for ac in counts.values():
            mst = [ac.sens.good, ac.sens.profit, ac.sens.loss, ac.sens.bad,
                   ac.spec.good, ac.spec.profit, ac.spec.loss, ac.spec.bad]
            for dm, auc in ((ac.control, ac.auc_control), (ac.study, ac.auc_study)):
                w.writerow([ac.anomaly.value, dm.arm.value, dm.tp, dm.fp, dm.tn, dm.fn,
                            *mst, _fmt_auc(auc)])
    finally:
        if own:
            fh.close()


def read_counts_csv(path: str | Path) -> StudyCounts:
    return parse_counts_csv(Path(path).read_text(encoding="utf-8"), str(path))


def parse_counts_csv(text: str, src: str = "<counts>") -> StudyCounts:
    """Parse counts CSV text. Anomaly types without rows are omitted with a warning."""
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in CSV_HEADER[:-1] if c not in (reader.fieldnames or [])]
    if missing:
        raise CountsFormatError(f"{src}: missing columns {missing}")
    rows: dict[AnomalyType, dict[Arm, dict]] = {}
    for lineno, row in enumerate(reader, start=2):
        where = f"{src}:{lineno}"
        try:
            anomaly = AnomalyType(row["anomaly"].strip())
            arm = Arm(row["arm"].strip())
        except ValueError as exc:
            raise CountsFormatError(f"{where}: {exc}") from None
        parsed = {}
        for col in CSV_HEADER[2:-1]:
            try:
                parsed[col] = int(row[col])
            except (TypeError, ValueError):
                raise CountsFormatError(f"{where}: column {col!r} is not an integer") from None
            if parsed[col] < 0:
                raise CountsFormatError(f"{where}: column {col!r} is negative")
        auc = (row.get("auc") or "").strip()
        try:
            parsed["auc"] = float(auc) if auc else None
        except ValueError:
            raise CountsFormatError(f"{where}: column 'auc' is not a number") from None
        if arm in rows.setdefault(anomaly, {}):
            raise CountsFormatError(f"{where}: duplicate row for {anomaly.value}/{arm.value}")
        rows[anomaly][arm] = parsed

    out: StudyCounts = {}
    for anomaly in AnomalyType:
        arms = rows.get(anomaly)
        if not arms:
            log.warning("no counts for %s; row omitted", anomaly.value)
            continue
        if len(arms) != 2:
            raise CountsFormatError(f"{src}: {anomaly.value} needs both a control and a study row")
        c, s = arms[Arm.CONTROL], arms[Arm.STUDY]
        if any(c[k] != s[k] for k in CSV_HEADER[6:-1]):
            raise CountsFormatError(f"{src}: {anomaly.value} matched-sample columns differ between arms")
        dm = {arm: DecisionMatrix(anomaly, arm, r["tp"], r["fp"], r["tn"], r["fn"])
              for arm, r in arms.items()}
        sens = MatchedSampleTable(anomaly, Endpoint.SENSITIVITY, c["sens_g"], c["sens_rho"],
                                  c["sens_lambda"], c["sens_b"])
        spec = MatchedSampleTable(anomaly, Endpoint.SPECIFICITY, c["spec_g"], c["spec_rho"],
                                  c["spec_lambda"], c["spec_b"])
        out[anomaly] = AnomalyCounts(anomaly, dm[Arm.CONTROL], dm[Arm.STUDY], sens, spec,
                                     c["auc"], s["auc"])
    return out


def without_curves(counts: StudyCounts) -> StudyCounts:
    return {k: replace(v, curves=None) for k, v in counts.items()}
