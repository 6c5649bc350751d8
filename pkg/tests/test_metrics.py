import numpy as np
import pytest

from aftstar.errors import InvariantError, MetricError
from aftstar.metrics import (
    ExperimentRecord,
    LearningCurve,
    alc,
    auc,
    balance_ratio,
    macro_auc,
    read_curve_csv,
    write_curve_csv,
)
from aftstar.pool import Candidate, Patch

from oracles import auc_pairwise


def annotated(cid, label):
    c = Candidate(id=cid, patches=[Patch(0, np.zeros(2))], true_label=label)
    c.annotated_label = label
    return c


# --- AUC ----------------------------------------------------------------------

def test_auc_perfect_ranking():
    assert auc([0.9, 0.8, 0.3], [1, 1, 0]) == 1.0


def test_auc_hand_computed():
    assert auc([0.2, 0.7, 0.5, 0.4], [1, 0, 1, 0]) == 0.25


def test_auc_all_ties_is_half():
    assert auc([0.4, 0.4, 0.4, 0.4], [1, 0, 1, 0]) == 0.5


def test_auc_single_class_undefined():
    with pytest.raises(MetricError):
        auc([0.1, 0.2], [1, 1])
    with pytest.raises(MetricError):
        auc([0.1, 0.2], [0, 0])


def test_auc_matches_brute_force_pairwise():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        scores = np.round(rng.random(n), 2)  # induce ties
        assert abs(auc(scores, labels) - auc_pairwise(scores, labels)) < 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(3)
    scores = rng.random(40)
    labels = rng.integers(0, 2, size=40)
    labels[0], labels[1] = 0, 1
    base = auc(scores, labels)
    assert auc(np.exp(scores * 3.0), labels) == pytest.approx(base, abs=1e-12)
    assert auc(2.0 * scores - 5.0, labels) == pytest.approx(base, abs=1e-12)


def test_macro_auc_binary_consistency():
    rng = np.random.default_rng(4)
    p1 = rng.random(30)
    probs = np.stack([1 - p1, p1], axis=1)
    labels = rng.integers(0, 2, size=30)
    labels[:2] = [0, 1]
    macro = macro_auc(probs, labels)
    a0 = auc(probs[:, 0], (labels == 0).astype(int))
    a1 = auc(probs[:, 1], (labels == 1).astype(int))
    assert macro == pytest.approx((a0 + a1) / 2, abs=1e-12)


# --- ALC ------------------------------------------------------------------------

def test_alc_constant_curve():
    assert alc([(100, 0.9), (200, 0.9), (300, 0.9)], 400) == pytest.approx(0.9)


def test_alc_two_point_trapezoid():
    assert alc([(0, 0.5), (400, 0.9)], 400) == pytest.approx(0.7)


def test_alc_flat_extension():
    assert alc([(0, 0.8), (200, 0.8)], 400) == pytest.approx(0.8)


def test_alc_requires_two_points():
    with pytest.raises(MetricError):
        alc([(0, 0.5)], 100)


def test_alc_requires_increasing_queries():
    with pytest.raises(MetricError):
        alc([(10, 0.5), (10, 0.6)], 100)


def test_alc_dominating_curve_not_smaller():
    rng = np.random.default_rng(11)
    for _ in range(50):
        qs = np.sort(rng.choice(np.arange(1, 200), size=6, replace=False))
        lower = rng.random(6)
        upper = np.clip(lower + rng.random(6) * 0.2, 0, 1)
        assert alc(list(zip(qs, upper)), 200) >= alc(list(zip(qs, lower)), 200) - 1e-12


# --- balance ratio ----------------------------------------------------------------

def test_balance_ratio_counting():
    cands = [annotated("a", 0), annotated("b", 0), annotated("c", 1), annotated("d", 1)]
    assert balance_ratio(cands, positive_class=0) == 0.5
    assert balance_ratio([annotated("x", 0)], positive_class=0) == 1.0
    mixed = [annotated(f"p{i}", 0) for i in range(3)] + [
        annotated(f"n{i}", 1) for i in range(7)
    ]
    assert balance_ratio(mixed, positive_class=0) == pytest.approx(0.3)


def test_balance_ratio_empty_undefined():
    with pytest.raises(MetricError):
        balance_ratio([])


def test_balance_ratio_requires_annotation():
    c = Candidate(id="u", patches=[Patch(0, np.zeros(2))], true_label=0)
    with pytest.raises(InvariantError):
        balance_ratio([c])


# --- learning curve / CSV -----------------------------------------------------------

def records_fixture():
    return [
        ExperimentRecord(0, 0, 0, 0.5, 0.0, 0),
        ExperimentRecord(1, 20, 20, 0.8, 0.25, 3),
        ExperimentRecord(2, 40, 40, 0.9, 0.3, 1),
    ]


def test_learning_curve_alc_recomputable():
    records = records_fixture()
    curve = LearningCurve.from_records(records, total_pool=100)
    assert curve.alc == pytest.approx(
        alc([(r.queries_cum, r.test_auc) for r in records], 100)
    )


def test_learning_curve_requires_increasing_queries():
    records = [
        ExperimentRecord(0, 0, 0, 0.5, 0.0, 0),
        ExperimentRecord(1, 0, 20, 0.8, 0.25, 3),
    ]
    with pytest.raises(MetricError):
        LearningCurve.from_records(records, total_pool=100)


def test_curve_csv_round_trip(tmp_path):
    records = records_fixture()
    path = tmp_path / "curve.csv"
    write_curve_csv(records, path)
    header = path.read_text().splitlines()[0]
    assert header == (
        "step,queries_cum,labeled_count,test_auc,"
        "selected_positive_fraction,misclassified_pre_fit"
    )
    assert read_curve_csv(path) == records
