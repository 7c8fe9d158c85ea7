"""Scikit-learn style front end for the transductive string-kernel classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from tskc.matrix import transductive_pipeline
from tskc.ngrams import KernelConfig
from tskc.tkc import TkcConfig, TkcTrace, run_single_round, run_tkc
from tskc.validation import check_texts, classes_by_first_appearance


class TransductiveStringKernelClassifier(BaseEstimator, ClassifierMixin):
    """Cross-domain text classifier built on transductive string kernels.

    The kernel matrix is computed jointly over the training texts and the
    texts passed to ``predict``, so the feature space adapts to each test
    set; calling ``predict`` on a different test set yields a different
    (re-adapted) model. With ``two_rounds`` enabled, the most confident
    first-round test predictions are promoted into the training set with
    their pseudo-labels before a second fit. Test labels are never used.

    Parameters
    ----------
    family : {"presence", "intersection", "spectrum"}, default="presence"
        String-kernel family.
    p_min, p_max : int, default=5 and 8
        Inclusive character n-gram length range.
    lowercase : bool, default=True
        Case-fold texts before n-gram extraction.
    r : int, default=1000
        Number of test samples promoted between rounds (clamped to the
        test-set size).
    lam : float, default=1e-5
        Ridge regularization of the dual solve.
    two_rounds : bool, default=True
        Run the promotion round; False gives the single-round variant.
    threads : int, default=1
        Worker threads for kernel-matrix construction; results are
        identical for every value.
    """

    def __init__(
        self,
        family: str = "presence",
        p_min: int = 5,
        p_max: int = 8,
        lowercase: bool = True,
        r: int = 1000,
        lam: float = 1e-5,
        two_rounds: bool = True,
        threads: int = 1,
    ):
        self.family = family
        self.p_min = p_min
        self.p_max = p_max
        self.lowercase = lowercase
        self.r = r
        self.lam = lam
        self.two_rounds = two_rounds
        self.threads = threads

    def _kernel_config(self) -> KernelConfig:
        return KernelConfig(
            family=self.family, p_min=self.p_min, p_max=self.p_max, lowercase=self.lowercase
        )

    def fit(self, X, y):
        """Store the training texts and labels; classes are ordered by first
        appearance in ``y``."""
        self._kernel_config()
        texts = check_texts(X)
        y = np.asarray(y)
        if y.shape[0] != len(texts):
            raise ValueError(f"got {y.shape[0]} labels for {len(texts)} documents")
        if not texts:
            raise ValueError("at least one training document is required")
        classes, encoded = classes_by_first_appearance(y)
        if classes.size < 2:
            raise ValueError("need at least two classes")
        self.classes_ = classes
        self.train_texts_ = texts
        self.train_label_ids_ = encoded
        return self

    def predict_with_trace(self, X) -> tuple[np.ndarray, TkcTrace]:
        """Predicted labels plus the full run trace for the given test texts."""
        check_is_fitted(self, "train_texts_")
        texts = check_texts(X)
        kddot = transductive_pipeline(
            self.train_texts_, texts, self._kernel_config(), threads=self.threads
        )
        cfg = TkcConfig(r=self.r, lam=self.lam, c=int(self.classes_.size))
        runner = run_tkc if self.two_rounds else run_single_round
        trace = runner(kddot, self.train_label_ids_, cfg)
        return self.classes_[trace.final_labels - 1], trace

    def predict(self, X) -> np.ndarray:
        labels, _ = self.predict_with_trace(X)
        return labels
