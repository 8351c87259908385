import pytest

from pairedval.annotations import AnomalyType, Arm, validate_dataset
from pairedval.counts import AnomalyCounts, counts_from_dataset
from pairedval.fixtures import N_IMAGES, N_TEETH, paper_counts, synthetic_dataset
from pairedval.matching import DecisionMatrix, Endpoint, MatchedSampleTable

A = AnomalyType


def _cells(ac):
    return (ac.control, ac.study, ac.sens, ac.spec)


def test_embedded_counts(paper):
    c = paper[A.CARIES]
    assert (c.control.tn, c.control.fn, c.control.fp, c.control.tp) == (1123, 54, 64, 105)
    assert (c.study.tn, c.study.fn, c.study.fp, c.study.tp) == (1106, 24, 81, 135)
    assert (c.sens.good, c.sens.profit, c.sens.loss, c.sens.bad) == (102, 33, 3, 21)
    assert (c.spec.good, c.spec.profit, c.spec.loss, c.spec.bad) == (1066, 40, 57, 24)
    rc = paper[A.ROOT_CANAL_DEFECT].sens
    assert (rc.profit, rc.loss) == (7, 0)


def test_embedded_counts_are_consistent(paper):
    assert list(paper) == list(A)
    for ac in paper.values():
        assert ac.consistency_errors() == []
        assert ac.positives + ac.negatives == N_TEETH


def test_consistency_errors_name_the_margin(paper):
    ac = paper[A.CARIES]
    bad = AnomalyCounts(ac.anomaly, ac.control, ac.study,
                        MatchedSampleTable(A.CARIES, Endpoint.SENSITIVITY, 103, 33, 3, 21), ac.spec)
    errs = bad.consistency_errors()
    assert errs and all(e.startswith("caries:") for e in errs)
    assert any("tp_control" in e for e in errs)


@pytest.mark.parametrize("voting", [False, True])
def test_synthetic_dataset_reproduces_counts(paper, voting):
    ds = synthetic_dataset(seed=11, expert_voting=voting)
    assert ds.n_images == N_IMAGES and ds.n_teeth == N_TEETH
    assert validate_dataset(ds) == []
    if voting:
        assert all(img.ground_truth is None and len(img.expert_sets) == 3 for img in ds.images)
    got = counts_from_dataset(ds, curves=False)
    for anomaly, ac in paper.items():
        assert _cells(got[anomaly]) == _cells(ac), anomaly


def test_lower_thresholds_add_annotations(paper):
    ds = synthetic_dataset(seed=2)
    at10 = counts_from_dataset(ds, threshold=10, curves=False)
    for anomaly, ac in paper.items():
        for arm in ("control", "study"):
            lo, hi = getattr(at10[anomaly], arm), getattr(ac, arm)
            assert lo.tp >= hi.tp and lo.fp >= hi.fp and lo.positives == hi.positives
    assert any(at10[a].control.fp > paper[a].control.fp for a in A)


def _small_counts():
    out = {}
    for anomaly, (tp, fn, fp, tn) in ((A.CARIES, (3, 1, 2, 6)), (A.CALCULUS, (1, 2, 0, 9))):
        dm = DecisionMatrix(anomaly, Arm.CONTROL, tp, fp, tn, fn)
        dm_s = DecisionMatrix(anomaly, Arm.STUDY, tp, fp, tn, fn)
        out[anomaly] = AnomalyCounts(
            anomaly, dm, dm_s,
            MatchedSampleTable(anomaly, Endpoint.SENSITIVITY, tp, 0, 0, fn),
            MatchedSampleTable(anomaly, Endpoint.SPECIFICITY, tn, 0, 0, fp))
    return out


def test_synthetic_from_custom_counts():
    want = _small_counts()
    ds = synthetic_dataset(want, seed=5, n_images=4)
    assert ds.n_images == 4 and ds.n_teeth == 12
    got = counts_from_dataset(ds, curves=False)
    for anomaly in want:
        assert _cells(got[anomaly]) == _cells(want[anomaly])
    assert got[A.BONE_LOSS].control.positives == 0


def test_synthetic_rejects_unequal_totals():
    want = _small_counts()
    ac = want[A.CALCULUS]
    want[A.CALCULUS] = AnomalyCounts(ac.anomaly, ac.control, ac.study,
                                     MatchedSampleTable(A.CALCULUS, Endpoint.SENSITIVITY, 2, 0, 0, 2), ac.spec)
    with pytest.raises(ValueError, match="same number of teeth"):
        synthetic_dataset(want)


def test_synthetic_is_deterministic():
    assert synthetic_dataset(seed=4) == synthetic_dataset(seed=4)
    assert synthetic_dataset(seed=4) != synthetic_dataset(seed=5)
