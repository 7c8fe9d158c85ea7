"""One-versus-all kernel ridge classification in dual form.

The binary classifier solves (K + lam*I) alpha = t by Cholesky
factorization; kernel ridge regression in dual form carries no bias term,
so the bias slot is always 0. OVA targets encode class j as +1 in column j
and -1 elsewhere, and predictions take the per-row argmax of the scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from tskc.errors import NumericalError
from tskc.validation import check_class_labels, check_square_matrix, classes_by_first_appearance

RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class DualModel:
    """Per-training-sample dual weights of one binary classifier."""

    alpha: np.ndarray
    bias: float = 0.0


def encode_ova(labels, c: int) -> np.ndarray:
    """One-versus-all target matrix: row i is -1 except +1 at column labels[i]."""
    arr = check_class_labels(labels, c)
    targets = np.full((arr.size, c), -1.0)
    targets[np.arange(arr.size), arr - 1] = 1.0
    return targets


def _solve_regularized(K_train, targets: np.ndarray, lam: float) -> np.ndarray:
    """Solve (K + lam*I) A = targets column-wise and verify the residuals."""
    K = check_square_matrix(K_train, "K_train")
    if not lam > 0:
        raise ValueError("lam must be positive")
    if targets.shape[0] != K.shape[0]:
        raise ValueError(
            f"targets have {targets.shape[0]} rows, kernel matrix has {K.shape[0]}"
        )
    regularized = K.copy()
    regularized[np.diag_indices_from(regularized)] += lam
    try:
        factor = linalg.cho_factor(regularized, lower=True, check_finite=False)
        coef = linalg.cho_solve(factor, targets, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(
            f"kernel system is not positive definite after adding lam={lam!r}"
        ) from exc
    residual = regularized @ coef - targets
    for j in range(targets.shape[1]):
        target_norm = np.linalg.norm(targets[:, j])
        residual_norm = np.linalg.norm(residual[:, j])
        relative = residual_norm / target_norm if target_norm > 0 else residual_norm
        if not relative <= RESIDUAL_TOLERANCE:
            raise NumericalError(
                f"solve residual {relative:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}"
                f" for target column {j}"
            )
    return coef


def krr_fit(K_train, targets, lam: float) -> DualModel:
    """Fit one binary kernel ridge model on a precomputed training kernel."""
    t = np.asarray(targets, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("targets must be a vector")
    alpha = _solve_regularized(K_train, t[:, np.newaxis], lam)[:, 0]
    return DualModel(alpha=alpha, bias=0.0)


def krr_fit_ova(K_train, ova_targets, lam: float) -> np.ndarray:
    """Fit all OVA columns with one factorization; returns dual weights (m, c)."""
    targets = np.asarray(ova_targets, dtype=np.float64)
    if targets.ndim != 2:
        raise ValueError("OVA targets must be a matrix")
    return _solve_regularized(K_train, targets, lam)


def score(K_test, model: DualModel) -> np.ndarray:
    """Scores of test samples: kernel rows against training samples times alpha."""
    K = np.asarray(K_test, dtype=np.float64)
    if K.ndim != 2:
        raise ValueError("K_test must be a matrix")
    if K.shape[1] != model.alpha.shape[0]:
        raise ValueError(
            f"K_test has {K.shape[1]} columns, model has {model.alpha.shape[0]} weights"
        )
    return K @ model.alpha + model.bias


def predict_ova(S_ova) -> tuple[np.ndarray, np.ndarray]:
    """Per-row argmax class (1-based) and maximum score.

    Ties go to the lowest class index.
    """
    scores = np.asarray(S_ova, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] < 2:
        raise ValueError("S_ova must be a matrix with at least two columns")
    predicted = np.argmax(scores, axis=1).astype(np.int64) + 1
    confidence = scores[np.arange(scores.shape[0]), predicted - 1]
    return predicted, confidence


class KernelRidgeOva(BaseEstimator, ClassifierMixin):
    """One-versus-all kernel ridge classifier on precomputed kernels.

    ``fit`` takes the training Gram matrix; ``decision_function`` and
    ``predict`` take kernel rows of new samples against the training set.
    Classes are ordered by first appearance in ``y``.

    Parameters
    ----------
    lam : float, default=1e-5
        Ridge regularization added to the kernel diagonal.
    """

    def __init__(self, lam: float = 1e-5):
        self.lam = lam

    def fit(self, K, y):
        K = check_square_matrix(K, "K")
        y = np.asarray(y)
        if y.shape[0] != K.shape[0]:
            raise ValueError(f"y has {y.shape[0]} entries, K has {K.shape[0]} rows")
        classes, encoded = classes_by_first_appearance(y)
        if classes.size < 2:
            raise ValueError("need at least two classes")
        self.classes_ = classes
        self.dual_coef_ = krr_fit_ova(K, encode_ova(encoded, classes.size), self.lam)
        self.n_train_ = K.shape[0]
        return self

    def decision_function(self, K) -> np.ndarray:
        check_is_fitted(self, "dual_coef_")
        K = np.asarray(K, dtype=np.float64)
        if K.ndim != 2 or K.shape[1] != self.n_train_:
            raise ValueError(f"K must have {self.n_train_} columns, got shape {K.shape}")
        return K @ self.dual_coef_

    def predict(self, K) -> np.ndarray:
        predicted, _ = predict_ova(self.decision_function(K))
        return self.classes_[predicted - 1]
