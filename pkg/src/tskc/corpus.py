"""Review-corpus ingestion, canonical storage, and experiment splits.

The Multi-Domain Sentiment Dataset ships per-domain ``positive.review`` and
``negative.review`` files in a pseudo-XML layout that is not well formed,
so ingestion uses a tolerant tag scanner rather than an XML parser. Star
ratings above 3 become positive labels, below 3 negative; 3-star reviews
are excluded. The canonical on-disk format is a UTF-8 TSV with one document
per line and tab/newline/backslash escaped inside the text field.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from tskc.errors import DataError
from tskc.ngrams import KernelConfig
from tskc.tkc import TkcConfig

LABEL_NEGATIVE = 1
LABEL_POSITIVE = 2
LABEL_NAMES = {LABEL_NEGATIVE: "negative", LABEL_POSITIVE: "positive"}
LABEL_IDS = {"negative": LABEL_NEGATIVE, "positive": LABEL_POSITIVE}
NUM_CLASSES = 2

MDSD_DOMAINS = ("books", "dvd", "electronics", "kitchen")
_REVIEW_FILES = ("negative.review", "positive.review")

_REVIEW_BLOCK = re.compile(r"<review>(.*?)</review>", re.DOTALL)
_RATING = re.compile(r"<rating>(.*?)</rating>", re.DOTALL)
_REVIEW_TEXT = re.compile(r"<review_text>(.*?)</review_text>", re.DOTALL)


@dataclass(frozen=True)
class Document:
    """One text sample with optional polarity label and domain tag."""

    id: str
    domain: str
    label: int | None
    text: str


@dataclass(frozen=True)
class ExperimentSpec:
    """Which domains train and test, and with which kernel and run settings."""

    mode: str
    sources: tuple[str, ...]
    target: str
    kernel: KernelConfig = KernelConfig()
    tkc: TkcConfig = TkcConfig()

    def __post_init__(self) -> None:
        if self.mode not in ("multi_source", "single_source"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.sources:
            raise ValueError("at least one source domain is required")
        if self.mode == "single_source" and len(self.sources) != 1:
            raise ValueError("single_source mode takes exactly one source domain")
        if self.target in self.sources:
            raise ValueError(f"target domain {self.target!r} must not be a source domain")


@dataclass
class IngestReport:
    """Ingested documents plus per-record errors and dataset-integrity warnings."""

    documents: list[Document]
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    excluded_neutral: int = 0
    replacement_count: int = 0

    def domain_label_counts(self) -> dict[str, dict[str, int]]:
        counts: dict[str, dict[str, int]] = {}
        for doc in self.documents:
            per_domain = counts.setdefault(doc.domain, {"negative": 0, "positive": 0})
            if doc.label is not None:
                per_domain[LABEL_NAMES[doc.label]] += 1
        return counts


def _rating_to_label(rating: float) -> int | None:
    if rating > 3.0:
        return LABEL_POSITIVE
    if rating < 3.0:
        return LABEL_NEGATIVE
    return None


def _parse_review_file(path: str, domain: str, stem: str, report: IngestReport) -> list[Document]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        report.errors.append(f"{path}: unreadable ({err})")
        return []
    text = raw.decode("utf-8", errors="replace")
    report.replacement_count += text.count("\ufffd") - raw.count(b"\xef\xbf\xbd")
    docs: list[Document] = []
    for block_index, match in enumerate(_REVIEW_BLOCK.finditer(text)):
        block = match.group(1)
        where = f"{path}: review #{block_index}"
        rating_match = _RATING.search(block)
        if rating_match is None:
            report.errors.append(f"{where}: missing rating")
            continue
        try:
            rating = float(rating_match.group(1).strip())
        except ValueError:
            report.errors.append(f"{where}: unparseable rating {rating_match.group(1).strip()!r}")
            continue
        text_match = _REVIEW_TEXT.search(block)
        if text_match is None:
            report.errors.append(f"{where}: missing review text")
            continue
        body = text_match.group(1).strip()
        if not body:
            report.errors.append(f"{where}: empty review text")
            continue
        label = _rating_to_label(rating)
        if label is None:
            report.excluded_neutral += 1
            continue
        docs.append(Document(f"{domain}/{stem}/{block_index:05d}", domain, label, body))
    return docs


def ingest_mdsd(path, domains=None) -> IngestReport:
    """Scan per-domain review files under ``path`` into Documents.

    Unreadable or malformed records are collected as errors and skipped;
    ingestion continues. Domains missing the expected 1000/1000 label
    balance produce warnings, not failures.
    """
    if not os.path.isdir(path):
        raise DataError(f"dataset directory not found: {path}")
    if domains is None:
        domains = sorted(
            entry
            for entry in os.listdir(path)
            if os.path.isdir(os.path.join(path, entry))
            and any(os.path.isfile(os.path.join(path, entry, f)) for f in _REVIEW_FILES)
        )
    report = IngestReport(documents=[])
    for domain in domains:
        found_any = False
        for filename in _REVIEW_FILES:
            file_path = os.path.join(path, domain, filename)
            if not os.path.isfile(file_path):
                report.warnings.append(f"{domain}: missing {filename}")
                continue
            found_any = True
            stem = filename.rsplit(".", 1)[0]
            report.documents.extend(_parse_review_file(file_path, domain, stem, report))
        if not found_any:
            report.warnings.append(f"{domain}: no review files found")
    report.documents.sort(key=lambda doc: (doc.domain, doc.id))
    for domain, counts in report.domain_label_counts().items():
        if counts["negative"] != 1000 or counts["positive"] != 1000:
            report.warnings.append(
                f"{domain}: expected 1000 negative and 1000 positive reviews,"
                f" found {counts['negative']}/{counts['positive']}"
            )
    return report


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


_UNESCAPE = re.compile(r"\\(.)")
_UNESCAPE_MAP = {"\\": "\\", "t": "\t", "n": "\n"}


def _unescape(text: str, line_number: int) -> str:
    def replace(match: re.Match) -> str:
        char = match.group(1)
        if char not in _UNESCAPE_MAP:
            raise DataError(f"line {line_number}: invalid escape sequence \\{char}")
        return _UNESCAPE_MAP[char]

    trailing = len(text) - len(text.rstrip("\\"))
    if trailing % 2 == 1:
        # An odd run of trailing backslashes leaves one without an escape target.
        raise DataError(f"line {line_number}: dangling backslash in text field")
    return _UNESCAPE.sub(replace, text)


def save_canonical(documents, path) -> None:
    """Write the canonical TSV: id, domain, label name, escaped text."""
    lines = []
    for doc in documents:
        label_name = "unlabeled" if doc.label is None else LABEL_NAMES[doc.label]
        lines.append(f"{doc.id}\t{doc.domain}\t{label_name}\t{_escape(doc.text)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines))
        if lines:
            fh.write("\n")


def load_canonical(path) -> list[Document]:
    """Read a canonical TSV written by :func:`save_canonical`."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        content = fh.read()
    documents: list[Document] = []
    seen_ids: set[str] = set()
    for line_number, line in enumerate(content.split("\n"), start=1):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"line {line_number}: expected 4 tab-separated fields, got {len(fields)}")
        doc_id, domain, label_name, text = fields
        if label_name == "unlabeled":
            label = None
        elif label_name in LABEL_IDS:
            label = LABEL_IDS[label_name]
        else:
            raise DataError(f"line {line_number}: unknown label {label_name!r}")
        if not doc_id or not domain:
            raise DataError(f"line {line_number}: empty id or domain field")
        if doc_id in seen_ids:
            raise DataError(f"line {line_number}: duplicate document id {doc_id!r}")
        seen_ids.add(doc_id)
        documents.append(Document(doc_id, domain, label, _unescape(text, line_number)))
    return documents


def make_split(documents, spec: ExperimentSpec) -> tuple[list[Document], list[Document]]:
    """Training and test document lists for one experiment setting.

    Training documents are the labeled documents of the source domains;
    test documents are all documents of the target domain. Both lists are
    ordered ascending by (domain, id), so the split is deterministic.
    """
    by_domain: dict[str, list[Document]] = {}
    for doc in documents:
        by_domain.setdefault(doc.domain, []).append(doc)
    train: list[Document] = []
    for domain in spec.sources:
        labeled = [doc for doc in by_domain.get(domain, []) if doc.label is not None]
        if not labeled:
            raise DataError(f"source domain {domain!r} has no labeled documents")
        train.extend(labeled)
    test = list(by_domain.get(spec.target, []))
    if not test:
        raise DataError(f"target domain {spec.target!r} has no documents")
    train.sort(key=lambda doc: (doc.domain, doc.id))
    test.sort(key=lambda doc: (doc.domain, doc.id))
    return train, test
