"""Two-round transductive training loop with confidence-ranked promotion.

Round 1 fits on the training block of the transductive kernel matrix and
scores every test sample. The most confident predictions (raw maximum OVA
score) are appended to the training indices with their predicted labels as
pseudo-labels, and round 2 re-fits and re-scores all test samples against
the enlarged block. Promoted samples stay in the test set, so their final
labels come from round 2 and may differ from their pseudo-labels. Ground
truth for test samples is never consulted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from tskc.classifier import encode_ova, krr_fit_ova, predict_ova
from tskc.errors import DataError
from tskc.matrix import KernelMatrix, submatrix
from tskc.validation import check_class_labels


@dataclass(frozen=True)
class TkcConfig:
    """Promotion count r, ridge regularization, and class count."""

    r: int = 1000
    lam: float = 1e-5
    c: int = 2

    def __post_init__(self) -> None:
        if self.r < 0:
            raise ValueError("r must be non-negative")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.c < 2:
            raise ValueError("c must be at least 2")


@dataclass
class TkcTrace:
    """Full audit record of one run over n test samples.

    Test-sample indices are 0-based positions within the test set. Labels
    are 1-based class indices. ``promoted_class_counts`` records how the
    pseudo-labels were distributed over classes.
    """

    round1_labels: np.ndarray
    round1_scores: np.ndarray
    promotion_order: np.ndarray
    promoted: np.ndarray
    pseudo_labels: np.ndarray
    final_labels: np.ndarray
    final_scores: np.ndarray
    promoted_class_counts: dict[int, int]
    rounds: int

    def report_lines(self) -> list[str]:
        """Line-oriented audit report, one test sample per line."""
        promoted = set(self.promoted.tolist())
        lines = ["index\tround1_label\tround1_score\tpromoted\tfinal_label"]
        for i in range(self.final_labels.size):
            lines.append(
                f"{i}\t{int(self.round1_labels[i])}\t{float(self.round1_scores[i])!r}"
                f"\t{int(i in promoted)}\t{int(self.final_labels[i])}"
            )
        return lines


def rank_by_confidence(scores) -> np.ndarray:
    """Indices sorted by score descending; ties broken by ascending index."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("scores must be a vector")
    return np.argsort(-arr, kind="stable").astype(np.int64)


def _require_transductive(kddot: KernelMatrix) -> None:
    if kddot.stage != "transductive":
        raise ValueError(f"expected a transductive-stage matrix, got {kddot.stage!r}")


def _fit_predict(
    kddot: KernelMatrix,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    labels: np.ndarray,
    cfg: TkcConfig,
) -> tuple[np.ndarray, np.ndarray]:
    K_train = submatrix(kddot, train_idx, train_idx)
    K_test = submatrix(kddot, test_idx, train_idx)
    coef = krr_fit_ova(K_train, encode_ova(labels, cfg.c), cfg.lam)
    return predict_ova(K_test @ coef)


def _empty_trace(rounds: int) -> TkcTrace:
    empty_int = np.zeros(0, dtype=np.int64)
    empty_float = np.zeros(0, dtype=np.float64)
    return TkcTrace(
        round1_labels=empty_int,
        round1_scores=empty_float,
        promotion_order=empty_int.copy(),
        promoted=empty_int.copy(),
        pseudo_labels=empty_int.copy(),
        final_labels=empty_int.copy(),
        final_scores=empty_float.copy(),
        promoted_class_counts={},
        rounds=rounds,
    )


def run_tkc(kddot: KernelMatrix, train_labels, cfg: TkcConfig) -> TkcTrace:
    """Execute both learning rounds and return the full trace.

    Promotes the min(r, n) most confident round-1 test predictions into the
    training indices before round 2. With r=0 the second round re-fits the
    identical system, so the final labels equal the round-1 labels.
    """
    _require_transductive(kddot)
    m, n = kddot.m, kddot.n
    if m == 0:
        raise DataError("kernel matrix has no training samples")
    labels = check_class_labels(train_labels, cfg.c)
    if labels.size != m:
        raise ValueError(f"got {labels.size} training labels for {m} training samples")
    if n == 0:
        return _empty_trace(rounds=2)

    train_idx = np.arange(m, dtype=np.int64)
    test_idx = np.arange(m, m + n, dtype=np.int64)
    active_labels = labels
    round1_labels = round1_scores = order = keep = pseudo = None
    predicted = confidence = None

    for round_no in (1, 2):
        predicted, confidence = _fit_predict(kddot, train_idx, test_idx, active_labels, cfg)
        if round_no == 1:
            order = rank_by_confidence(confidence)
            keep = order[: min(cfg.r, n)]
            pseudo = predicted[keep]
            round1_labels, round1_scores = predicted, confidence
            active_labels = np.concatenate([labels, pseudo])
            train_idx = np.concatenate([train_idx, test_idx[keep]])

    return TkcTrace(
        round1_labels=round1_labels,
        round1_scores=round1_scores,
        promotion_order=order,
        promoted=keep,
        pseudo_labels=pseudo,
        final_labels=predicted,
        final_scores=confidence,
        promoted_class_counts=dict(sorted(Counter(pseudo.tolist()).items())),
        rounds=2,
    )


def run_single_round(kddot: KernelMatrix, train_labels, cfg: TkcConfig) -> TkcTrace:
    """Single inductive fit/predict on the same matrix blocks (no promotion)."""
    _require_transductive(kddot)
    m, n = kddot.m, kddot.n
    if m == 0:
        raise DataError("kernel matrix has no training samples")
    labels = check_class_labels(train_labels, cfg.c)
    if labels.size != m:
        raise ValueError(f"got {labels.size} training labels for {m} training samples")
    if n == 0:
        return _empty_trace(rounds=1)
    train_idx = np.arange(m, dtype=np.int64)
    test_idx = np.arange(m, m + n, dtype=np.int64)
    predicted, confidence = _fit_predict(kddot, train_idx, test_idx, labels, cfg)
    empty = np.zeros(0, dtype=np.int64)
    return TkcTrace(
        round1_labels=predicted,
        round1_scores=confidence,
        promotion_order=rank_by_confidence(confidence),
        promoted=empty,
        pseudo_labels=empty.copy(),
        final_labels=predicted.copy(),
        final_scores=confidence.copy(),
        promoted_class_counts={},
        rounds=1,
    )
