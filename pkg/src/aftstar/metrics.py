"""Candidate-level evaluation: AUC, learning curves, ALC, class balance.

AUC uses the rank (Mann-Whitney) formulation with midranks for ties,
equivalent to ``(wins + 0.5 * ties) / (positives * negatives)`` over all
positive-negative score pairs. ALC is the trapezoidal integral of test
AUC over the fraction of the pool queried, extended flat to both axis
ends, so curves stopped early remain comparable on a [0, 1] x-axis.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantError, MetricError
from .pool import Candidate

FLOAT_FMT = "%.17g"
CURVE_HEADER = [
    "step",
    "queries_cum",
    "labeled_count",
    "test_auc",
    "selected_positive_fraction",
    "misclassified_pre_fit",
]


@dataclass(frozen=True)
class ExperimentRecord:
    """One learning-curve point. The step-0 row is the untrained baseline
    (no batch => selected_positive_fraction 0.0)."""

    step: int
    queries_cum: int
    labeled_count: int
    test_auc: float
    selected_positive_fraction: float
    misclassified_count_pre_fit: int


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0], dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outscores a random negative
    (ties count one half)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError("scores and labels must be 1-d and equal length")
    if not np.isin(labels, (0, 1)).all():
        raise MetricError("labels must be binary 0/1")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC undefined without both a positive and a negative")
    ranks = _midranks(scores)
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def macro_auc(prob_matrix, labels: Sequence[int]) -> float:
    """Macro-averaged one-vs-rest AUC for multiclass runs."""
    prob_matrix = np.asarray(prob_matrix, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if prob_matrix.ndim != 2 or prob_matrix.shape[0] != labels.shape[0]:
        raise MetricError("probability matrix rows must match labels")
    per_class = [
        auc(prob_matrix[:, k], (labels == k).astype(int))
        for k in range(prob_matrix.shape[1])
    ]
    return float(np.mean(per_class))


def alc(curve: Sequence[tuple[int, float]], total_pool: int) -> float:
    """Area under (queries / total_pool, auc), flat-extended to x=0 and x=1."""
    if len(curve) < 2:
        raise MetricError("a learning curve needs at least 2 points")
    queries = np.asarray([q for q, _ in curve], dtype=float)
    aucs = np.asarray([a for _, a in curve], dtype=float)
    if total_pool < 1:
        raise MetricError("total_pool must be >= 1")
    if (np.diff(queries) <= 0).any():
        raise MetricError("queries must be strictly increasing")
    if queries[-1] > total_pool:
        raise MetricError("curve extends past the pool size")
    x = queries / total_pool
    area = float(np.trapezoid(aucs, x))
    area += float(x[0] * aucs[0])
    area += float((1.0 - x[-1]) * aucs[-1])
    return area


def balance_ratio(selected: Iterable[Candidate], positive_class: int = 0) -> float:
    """Fraction of selected (annotated) candidates labeled positive."""
    selected = list(selected)
    if not selected:
        raise MetricError("balance ratio undefined for an empty selection")
    labels = []
    for c in selected:
        if c.annotated_label is None:
            raise InvariantError(f"candidate {c.id!r} is not annotated")
        labels.append(c.annotated_label)
    return float(np.mean([lab == positive_class for lab in labels]))


@dataclass(frozen=True)
class LearningCurve:
    records: tuple[ExperimentRecord, ...]
    alc: float

    @classmethod
    def from_records(
        cls, records: Sequence[ExperimentRecord], total_pool: int
    ) -> "LearningCurve":
        if any(
            b.queries_cum <= a.queries_cum for a, b in zip(records, records[1:])
        ):
            raise MetricError("queries_cum must be strictly increasing")
        value = alc([(r.queries_cum, r.test_auc) for r in records], total_pool)
        return cls(records=tuple(records), alc=value)


def write_curve_csv(records: Sequence[ExperimentRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.step,
                    r.queries_cum,
                    r.labeled_count,
                    FLOAT_FMT % r.test_auc,
                    FLOAT_FMT % r.selected_positive_fraction,
                    r.misclassified_count_pre_fit,
                ]
            )


def read_curve_csv(path: str | Path) -> list[ExperimentRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CURVE_HEADER:
            raise MetricError(f"{path}: unexpected curve header {header}")
        out = []
        for row in reader:
            out.append(
                ExperimentRecord(
                    step=int(row[0]),
                    queries_cum=int(row[1]),
                    labeled_count=int(row[2]),
                    test_auc=float(row[3]),
                    selected_positive_fraction=float(row[4]),
                    misclassified_count_pre_fit=int(row[5]),
                )
            )
    return out


def write_summary_json(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")


def record_to_dict(record: ExperimentRecord) -> dict:
    return asdict(record)
