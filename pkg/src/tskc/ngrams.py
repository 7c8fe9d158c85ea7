"""Character n-gram profiles and string-kernel functions.

Texts are compared through the character n-grams they share. Three kernel
families are supported: presence bits (each shared n-gram counts once),
intersection (minimum of the two occurrence counts), and spectrum (product
of the occurrence counts). A blended kernel sums the per-length values over
a range of n-gram lengths.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

FAMILIES = ("presence", "intersection", "spectrum")


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family plus n-gram length range; fully determines the kernel.

    Texts are treated as sequences of Unicode scalar values. Whitespace and
    punctuation are kept; with ``lowercase`` enabled the text is case-folded
    via ``str.lower`` before n-grams are extracted.
    """

    family: str = "presence"
    p_min: int = 5
    p_max: int = 8
    lowercase: bool = True

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.p_min < 1:
            raise ValueError("p_min must be >= 1")
        if self.p_max < self.p_min:
            raise ValueError("p_max must be >= p_min")

    @property
    def lengths(self) -> range:
        """The inclusive n-gram length range."""
        return range(self.p_min, self.p_max + 1)


@dataclass(frozen=True)
class NGramProfile:
    """Occurrence counts of every contiguous length-p substring of one text.

    ``total`` equals the number of n-gram positions, i.e. ``max(0, L - p + 1)``
    for a text of L characters. Profiles are immutable once built.
    """

    p: int
    counts: dict[str, int]
    total: int


def preprocess(text: str, cfg: KernelConfig) -> str:
    """Apply the configured text normalization (currently just case folding)."""
    return text.lower() if cfg.lowercase else text


def extract_profile(text: str, p: int) -> NGramProfile:
    """Count all contiguous length-p substrings of ``text``.

    Text shorter than p yields an empty profile. The text is used as given;
    apply :func:`preprocess` first when a :class:`KernelConfig` is in play.
    """
    if p < 1:
        raise ValueError("n-gram length p must be >= 1")
    span = len(text) - p + 1
    if span <= 0:
        return NGramProfile(p, {}, 0)
    counts = Counter(text[i : i + p] for i in range(span))
    return NGramProfile(p, dict(counts), span)


def kernel_value(a: NGramProfile, b: NGramProfile, family: str) -> float:
    """Evaluate one kernel family on two profiles of equal n-gram length.

    The sum runs over n-grams present in both profiles, so disjoint or empty
    profiles score 0. Counts are exact integers, hence the float result is
    exact and symmetric in the arguments.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")
    if a.p != b.p:
        raise ValueError(f"profiles have mismatched n-gram lengths ({a.p} vs {b.p})")
    small, large = (a.counts, b.counts) if len(a.counts) <= len(b.counts) else (b.counts, a.counts)
    total = 0.0
    if family == "presence":
        for gram in small:
            if gram in large:
                total += 1.0
    elif family == "intersection":
        for gram, count in small.items():
            other = large.get(gram)
            if other is not None:
                total += count if count < other else other
    else:  # spectrum
        for gram, count in small.items():
            other = large.get(gram)
            if other is not None:
                total += count * other
    return total


def blended_kernel(x: str, y: str, cfg: KernelConfig) -> float:
    """Sum the kernel over every n-gram length in the configured range."""
    x = preprocess(x, cfg)
    y = preprocess(y, cfg)
    total = 0.0
    for p in cfg.lengths:
        total += kernel_value(extract_profile(x, p), extract_profile(y, p), cfg.family)
    return total
