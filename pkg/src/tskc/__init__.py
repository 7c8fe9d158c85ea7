"""Transductive string kernels for cross-domain text classification.

The package computes blended character n-gram kernels over the union of a
training and a test corpus, passes the full matrix through normalization,
an RBF map, and a self-product so that features adapt to the test set, and
classifies with a two-round one-versus-all kernel ridge scheme that
promotes confident test predictions into the training set between rounds.
"""

__version__ = "0.1.0"

from tskc.classifier import (
    DualModel,
    KernelRidgeOva,
    encode_ova,
    krr_fit,
    krr_fit_ova,
    predict_ova,
    score,
)
from tskc.corpus import (
    Document,
    ExperimentSpec,
    IngestReport,
    ingest_mdsd,
    load_canonical,
    make_split,
    save_canonical,
)
from tskc.errors import DataError, NumericalError
from tskc.estimator import TransductiveStringKernelClassifier
from tskc.evaluation import (
    EvalResult,
    McNemarResult,
    ReportEntry,
    accuracy,
    format_report,
    format_report_tsv,
    mcnemar,
)
from tskc.matrix import (
    KernelMatrix,
    build_full_matrix,
    load_matrix,
    normalize,
    rbf_transform,
    save_matrix,
    submatrix,
    transductive_pipeline,
    transductive_product,
)
from tskc.ngrams import (
    FAMILIES,
    KernelConfig,
    NGramProfile,
    blended_kernel,
    extract_profile,
    kernel_value,
    preprocess,
)
from tskc.tkc import TkcConfig, TkcTrace, rank_by_confidence, run_single_round, run_tkc

__all__ = [
    "__version__",
    "DataError",
    "Document",
    "DualModel",
    "EvalResult",
    "ExperimentSpec",
    "FAMILIES",
    "IngestReport",
    "KernelConfig",
    "KernelMatrix",
    "KernelRidgeOva",
    "McNemarResult",
    "NGramProfile",
    "NumericalError",
    "ReportEntry",
    "TkcConfig",
    "TkcTrace",
    "TransductiveStringKernelClassifier",
    "accuracy",
    "blended_kernel",
    "build_full_matrix",
    "encode_ova",
    "extract_profile",
    "format_report",
    "format_report_tsv",
    "ingest_mdsd",
    "kernel_value",
    "krr_fit",
    "krr_fit_ova",
    "load_canonical",
    "load_matrix",
    "make_split",
    "mcnemar",
    "normalize",
    "predict_ova",
    "preprocess",
    "rank_by_confidence",
    "rbf_transform",
    "run_single_round",
    "run_tkc",
    "save_canonical",
    "save_matrix",
    "score",
    "submatrix",
    "transductive_pipeline",
    "transductive_product",
]
