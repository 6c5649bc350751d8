"""Candidate/patch data model and the labeled/unlabeled pool partition.

A *candidate* is the unit of annotation. It owns ``m`` patches (feature
vectors) that all inherit the candidate's label once annotated. The pool
partitions candidate ids into a disjoint unlabeled set ``U`` and labeled
set ``L``; every query step moves a batch from ``U`` to ``L``.

Dataset CSV format (written/read by :mod:`aftstar.datagen`):
UTF-8, header ``candidate_id,label,f0,...,f{d-1}``, one row per patch.
Rows of one candidate need not be contiguous; the label column repeats the
candidate's class index identically on every row of that candidate.

``true_label`` is oracle-side ground truth: it is read only by
:mod:`aftstar.oracle` (annotation queries, evaluation labels), never by
the selection path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import LabelDomainError, PartitionError, ShapeError


@dataclass(eq=False)
class Patch:
    """One feature vector belonging to a candidate."""

    patch_index: int
    features: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 1:
            raise ShapeError(f"patch features must be 1-d, got shape {self.features.shape}")
        if not np.isfinite(self.features).all():
            raise ShapeError("patch features must be finite")


@dataclass(eq=False)
class Candidate:
    """An annotation unit owning ``m >= 1`` patches of equal dimension.

    ``annotated_label`` is present exactly when the candidate has been
    queried; all patches then inherit it.
    """

    id: str
    patches: list[Patch]
    true_label: int = field(repr=False, default=0)
    annotated_label: int | None = None

    def __post_init__(self) -> None:
        if not self.patches:
            raise ShapeError(f"candidate {self.id!r} has no patches")
        d = self.patches[0].features.shape[0]
        for j, p in enumerate(self.patches):
            if p.patch_index != j:
                raise ShapeError(
                    f"candidate {self.id!r}: patch_index must be contiguous from 0"
                )
            if p.features.shape[0] != d:
                raise ShapeError(f"candidate {self.id!r}: patches disagree on dimension")
        self._features: np.ndarray | None = None

    @property
    def num_patches(self) -> int:
        return len(self.patches)

    @property
    def feature_dim(self) -> int:
        return self.patches[0].features.shape[0]

    @property
    def feature_matrix(self) -> np.ndarray:
        """All patch features stacked into an (m, d) array (cached)."""
        if self._features is None:
            self._features = np.stack([p.features for p in self.patches])
        return self._features


@dataclass(eq=False)
class PoolState:
    """Disjoint partition of candidate ids into unlabeled U and labeled L.

    Invariants: ``unlabeled & labeled == set()`` and
    ``unlabeled | labeled`` equals the initial candidate set; ``step``
    counts completed query steps and ``len(labeled)`` never decreases.
    """

    candidates: dict[str, Candidate]
    unlabeled: frozenset[str]
    labeled: frozenset[str]
    step: int = 0
    num_classes: int = 2


def make_pool(candidates: Iterable[Candidate], num_classes: int) -> PoolState:
    """Build an all-unlabeled pool over the given candidates.

    Clears any annotated_label left over from a previous run so the
    "annotated iff queried" invariant holds from step 0.
    """
    if num_classes < 2:
        raise LabelDomainError("num_classes must be >= 2")
    by_id: dict[str, Candidate] = {}
    for c in candidates:
        if c.id in by_id:
            raise PartitionError(f"duplicate candidate id {c.id!r}")
        c.annotated_label = None
        by_id[c.id] = c
    return PoolState(
        candidates=by_id,
        unlabeled=frozenset(by_id),
        labeled=frozenset(),
        step=0,
        num_classes=num_classes,
    )


def move_to_labeled(
    pool: PoolState, ids: Iterable[str], labels: Mapping[str, int]
) -> PoolState:
    """Move ``ids`` from U to L, recording their annotated labels.

    An empty move is legal and still advances ``step`` by one.
    """
    ids = list(ids)
    id_set = set(ids)
    if len(id_set) != len(ids):
        raise PartitionError("duplicate ids in move")
    stray = id_set - set(pool.unlabeled)
    if stray:
        raise PartitionError(f"ids not in unlabeled set: {sorted(stray)}")
    for cid in ids:
        if cid not in labels:
            raise LabelDomainError(f"no label supplied for {cid!r}")
        label = labels[cid]
        if not (0 <= int(label) < pool.num_classes):
            raise LabelDomainError(
                f"label {label!r} for {cid!r} outside [0, {pool.num_classes})"
            )
    for cid in ids:
        pool.candidates[cid].annotated_label = int(labels[cid])
    return PoolState(
        candidates=pool.candidates,
        unlabeled=pool.unlabeled - id_set,
        labeled=pool.labeled | id_set,
        step=pool.step + 1,
        num_classes=pool.num_classes,
    )
