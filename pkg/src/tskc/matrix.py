"""Dense train+test kernel-matrix pipeline.

The full matrix over Z = train then test goes through four stages: raw
pairwise kernel values, diagonal normalization, an elementwise RBF map,
and a closing product of the RBF matrix with its transpose. Row i of the
RBF matrix acts as the feature vector of sample i, so the final product
is the linear kernel over features that already encode similarity to
every test sample; swapping the test set changes the training block too.

All raw kernel values are integer-valued and every accumulation stays
below 2**53, so the raw stage is exact in float64 and independent of
worker scheduling.
"""

from __future__ import annotations

import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from tskc.errors import DataError
from tskc.ngrams import KernelConfig, preprocess
from tskc.validation import check_texts

STAGES = ("raw", "normalized", "rbf", "transductive")
_STAGE_CODE = {name: code for code, name in enumerate(STAGES)}

_MAGIC = b"TSKM"
_FORMAT_VERSION = 1
# magic, version byte, m (u64 LE), n (u64 LE), stage code (u8)
_HEADER = struct.Struct("<4sBQQB")

_BLOCK_ROWS = 512


@dataclass
class KernelMatrix:
    """Dense symmetric kernel matrix over m training plus n test samples."""

    values: np.ndarray
    m: int
    n: int
    stage: str

    def __post_init__(self) -> None:
        if self.m < 0 or self.n < 0:
            raise ValueError("m and n must be non-negative")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}; expected one of {STAGES}")
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        size = self.m + self.n
        if values.shape != (size, size):
            raise ValueError(f"values must have shape ({size}, {size}), got {values.shape}")
        self.values = values

    @property
    def size(self) -> int:
        return self.m + self.n


def _run_blocks(size: int, threads: int, task) -> None:
    """Run ``task(start, stop)`` over row blocks, optionally on a thread pool.

    Blocks cover disjoint output rows, so results are identical for every
    thread count.
    """
    blocks = [(start, min(start + _BLOCK_ROWS, size)) for start in range(0, size, _BLOCK_ROWS)]
    if threads <= 1 or len(blocks) <= 1:
        for start, stop in blocks:
            task(start, stop)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda block: task(*block), blocks))


def _ngram_count_matrix(texts: list[str], p: int) -> sparse.csr_matrix:
    """Documents-by-ngrams occurrence-count matrix for one n-gram length."""
    vocabulary: dict[str, int] = {}
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for text in texts:
        span = len(text) - p + 1
        if span > 0:
            counts = Counter(text[i : i + p] for i in range(span))
            for gram, count in counts.items():
                indices.append(vocabulary.setdefault(gram, len(vocabulary)))
                data.append(count)
        indptr.append(len(indices))
    counts = sparse.csr_matrix(
        (
            np.asarray(data, dtype=np.float64),
            np.asarray(indices, dtype=np.int64),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(texts), len(vocabulary)),
    )
    counts.sort_indices()
    return counts


def _add_gram(left: sparse.csr_matrix, out: np.ndarray, threads: int) -> None:
    """Accumulate ``left @ left.T`` into ``out`` by row blocks."""
    right = left.T.tocsr()

    def add_rows(start: int, stop: int) -> None:
        out[start:stop] += (left[start:stop] @ right).toarray()

    _run_blocks(left.shape[0], threads, add_rows)


def _add_family_gram(counts: sparse.csr_matrix, family: str, out: np.ndarray, threads: int) -> None:
    if family == "spectrum":
        _add_gram(counts, out, threads)
        return
    if family == "presence":
        binary = counts.copy()
        binary.data = np.ones_like(binary.data)
        _add_gram(binary, out, threads)
        return
    # intersection: min(a, b) == sum over t >= 1 of [a >= t] * [b >= t].
    # Counts >= 2 are rare for long n-grams, so levels past the first shrink fast.
    coo = counts.tocoo()
    level = 1
    while True:
        mask = coo.data >= level
        if not mask.any():
            return
        indicator = sparse.csr_matrix(
            (np.ones(int(mask.sum()), dtype=np.float64), (coo.row[mask], coo.col[mask])),
            shape=counts.shape,
        )
        _add_gram(indicator, out, threads)
        level += 1


def build_full_matrix(
    train_texts, test_texts, cfg: KernelConfig, threads: int = 1
) -> KernelMatrix:
    """Blended kernel matrix over the concatenation of train and test texts.

    Entry (i, j) equals :func:`tskc.ngrams.blended_kernel` on samples i and j
    of Z, with training samples first. An empty test set degenerates to an
    ordinary training Gram matrix; an empty training set is an error.
    """
    train = [preprocess(text, cfg) for text in check_texts(train_texts)]
    test = [preprocess(text, cfg) for text in check_texts(test_texts)]
    if not train:
        raise DataError("training set is empty")
    texts = train + test
    out = np.zeros((len(texts), len(texts)), dtype=np.float64)
    for p in cfg.lengths:
        _add_family_gram(_ngram_count_matrix(texts, p), cfg.family, out, threads)
    return KernelMatrix(out, len(train), len(test), "raw")


def normalize(matrix: KernelMatrix) -> KernelMatrix:
    """Divide each entry by the square root of the product of its diagonals.

    A degenerate diagonal (sample with no n-grams, self-similarity 0) is
    treated as self-similar and orthogonal to everything: its off-diagonal
    entries become 0 and its diagonal 1. Applying normalize to an already
    normalized matrix returns it unchanged.
    """
    if matrix.stage not in ("raw", "normalized"):
        raise ValueError(f"cannot normalize a matrix at stage {matrix.stage!r}")
    values = matrix.values
    diagonal = np.diag(values).copy()
    degenerate = diagonal <= 0.0
    scale = np.sqrt(np.where(degenerate, 1.0, diagonal))
    normalized = values / scale[np.newaxis, :]
    normalized /= scale[:, np.newaxis]
    if degenerate.any():
        normalized[degenerate, :] = 0.0
        normalized[:, degenerate] = 0.0
    np.fill_diagonal(normalized, 1.0)
    # Cauchy-Schwarz bounds entries by 1 exactly; clamp float rounding overshoot.
    np.clip(normalized, 0.0, 1.0, out=normalized)
    return KernelMatrix(normalized, matrix.m, matrix.n, "normalized")


def rbf_transform(matrix: KernelMatrix) -> KernelMatrix:
    """Map each normalized entry k to exp(-1 + k), elementwise."""
    if matrix.stage != "normalized":
        raise ValueError(f"rbf_transform expects a normalized matrix, got {matrix.stage!r}")
    return KernelMatrix(np.exp(matrix.values - 1.0), matrix.m, matrix.n, "rbf")


def _mirror_upper(values: np.ndarray) -> None:
    """Copy the upper triangle onto the lower one, in place."""
    for i in range(values.shape[0] - 1):
        values[i + 1 :, i] = values[i, i + 1 :]


def transductive_product(matrix: KernelMatrix, threads: int = 1) -> KernelMatrix:
    """Product of the RBF matrix with its transpose.

    The RBF matrix is symmetric, so its transpose is the same array and the
    result is its square. The upper triangle is mirrored exactly so the
    output is bit-symmetric despite float rounding in the multiply.
    """
    if matrix.stage != "rbf":
        raise ValueError(f"transductive_product expects an rbf matrix, got {matrix.stage!r}")
    tilde = matrix.values
    product = np.empty_like(tilde)

    def multiply_rows(start: int, stop: int) -> None:
        np.dot(tilde[start:stop], tilde, out=product[start:stop])

    _run_blocks(matrix.size, threads, multiply_rows)
    _mirror_upper(product)
    return KernelMatrix(product, matrix.m, matrix.n, "transductive")


def transductive_pipeline(
    train_texts,
    test_texts,
    cfg: KernelConfig,
    threads: int = 1,
    stage: str = "transductive",
) -> KernelMatrix:
    """Run the matrix pipeline up to the requested stage."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    matrix = build_full_matrix(train_texts, test_texts, cfg, threads=threads)
    if stage == "raw":
        return matrix
    matrix = normalize(matrix)
    if stage == "normalized":
        return matrix
    matrix = rbf_transform(matrix)
    if stage == "rbf":
        return matrix
    return transductive_product(matrix, threads=threads)


def submatrix(matrix: KernelMatrix, rows, cols) -> np.ndarray:
    """Sub-matrix by row/column selection, order preserving, duplicates kept."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    for name, idx in (("row", rows), ("column", cols)):
        if idx.ndim != 1:
            raise ValueError(f"{name} indices must be one-dimensional")
        if idx.size and (idx.min() < 0 or idx.max() >= matrix.size):
            raise IndexError(f"{name} index out of range for {matrix.size} samples")
    return matrix.values[np.ix_(rows, cols)]


def save_matrix(matrix: KernelMatrix, path) -> None:
    """Write the cache file: TSKM magic, version, m, n, stage, then row-major
    float64 little-endian values."""
    header = _HEADER.pack(_MAGIC, _FORMAT_VERSION, matrix.m, matrix.n, _STAGE_CODE[matrix.stage])
    payload = np.ascontiguousarray(matrix.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_matrix(path) -> KernelMatrix:
    """Read a cache file written by :func:`save_matrix`, bit-exactly."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: truncated header, file ends at byte {len(blob)}")
    magic, version, m, n, stage_code = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, not a kernel-matrix cache")
    if version != _FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if stage_code >= len(STAGES):
        raise DataError(f"{path}: unknown stage code {stage_code}")
    size = int(m) + int(n)
    expected = _HEADER.size + size * size * 8
    if len(blob) != expected:
        raise DataError(
            f"{path}: payload size mismatch, expected {expected} bytes,"
            f" file ends at byte {len(blob)}"
        )
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(size, size).copy()
    return KernelMatrix(values, int(m), int(n), STAGES[stage_code])
