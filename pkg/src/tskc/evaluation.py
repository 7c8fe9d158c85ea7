"""Accuracy, paired McNemar significance tests, and experiment reports.

The McNemar test counts discordant pairs b (first classifier correct,
second wrong) and c (the reverse). With b + c >= 25 the continuity
corrected chi-squared statistic (|b - c| - 1)^2 / (b + c) is compared to
the critical value 6.635 at level 0.01; below that, an exact two-sided
binomial test decides. The exact branch compares integers, so the
decision never depends on float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CHI2_CRITICAL_0_01 = 6.635
MIN_DISCORDANT_FOR_CHI2 = 25
SIGNIFICANCE_LEVEL = 0.01


@dataclass(frozen=True)
class EvalResult:
    """Accuracy over n samples plus per-gold-class (correct, total) counts."""

    accuracy: float
    n: int
    correct: int
    per_class: dict[int, tuple[int, int]]


@dataclass(frozen=True)
class McNemarResult:
    """Discordant counts, test statistic, p-value, and the 0.01 decision.

    ``statistic`` is the continuity-corrected chi-squared value (0 when
    there are no discordant pairs); with the exact_binomial method the
    decision comes from the exact p-value instead.
    """

    b: int
    c: int
    statistic: float
    p_value: float
    significant_at_0_01: bool
    method: str


def accuracy(pred, gold) -> EvalResult:
    """Fraction of positions where the prediction matches the gold label."""
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise ValueError(f"prediction and gold shapes differ: {pred.shape} vs {gold.shape}")
    if pred.size == 0:
        raise ValueError("need at least one sample")
    hits = pred == gold
    per_class: dict[int, tuple[int, int]] = {}
    for value in sorted(set(gold.tolist())):
        of_class = gold == value
        per_class[int(value)] = (int(hits[of_class].sum()), int(of_class.sum()))
    correct = int(hits.sum())
    return EvalResult(
        accuracy=correct / pred.size, n=int(pred.size), correct=correct, per_class=per_class
    )


def mcnemar(pred_a, pred_b, gold) -> McNemarResult:
    """Paired McNemar test of two prediction vectors against gold labels."""
    pred_a = np.asarray(pred_a)
    pred_b = np.asarray(pred_b)
    gold = np.asarray(gold)
    if not (pred_a.shape == pred_b.shape == gold.shape) or gold.ndim != 1:
        raise ValueError("prediction and gold vectors must share one shape")
    a_correct = pred_a == gold
    b_correct = pred_b == gold
    b = int(np.sum(a_correct & ~b_correct))
    c = int(np.sum(~a_correct & b_correct))
    total = b + c
    if total == 0:
        return McNemarResult(
            b=0, c=0, statistic=0.0, p_value=1.0, significant_at_0_01=False,
            method="exact_binomial",
        )
    statistic = (abs(b - c) - 1) ** 2 / total
    if total >= MIN_DISCORDANT_FOR_CHI2:
        p_value = math.erfc(math.sqrt(statistic / 2.0))
        significant = statistic > CHI2_CRITICAL_0_01
        method = "chi_squared_corrected"
    else:
        tail = sum(math.comb(total, k) for k in range(max(b, c), total + 1))
        # p = 2 * tail / 2**total; compare in integers: p <= 0.01.
        significant = 200 * tail <= 2**total
        p_value = min(1.0, 2.0 * tail / 2.0**total)
        method = "exact_binomial"
    return McNemarResult(
        b=b, c=c, statistic=statistic, p_value=p_value,
        significant_at_0_01=significant, method=method,
    )


@dataclass(frozen=True)
class ReportEntry:
    """One method evaluated in one source->target setting."""

    method: str
    sources: tuple[str, ...]
    target: str
    accuracy_percent: float
    significant: bool = False
    mcnemar_statistic: float | None = None
    mcnemar_method: str | None = None


def setting_label(sources, target: str) -> str:
    """Compact setting name, e.g. DEK->B, falling back to full domain names."""
    initials = [domain[:1].upper() for domain in sources]
    if all(initials) and len(set(initials)) == len(initials):
        return f"{''.join(sorted(initials))}->{target[:1].upper()}"
    return f"{'+'.join(sources)}->{target}"


def format_report(entries) -> str:
    """Plain-text table: rows are methods, columns are settings.

    Accuracy is shown in percent with one decimal; a trailing ``*`` marks
    entries significantly better than the baseline at the 0.01 level.
    """
    entries = list(entries)
    methods: list[str] = []
    settings: list[str] = []
    cells: dict[tuple[str, str], str] = {}
    for entry in entries:
        setting = setting_label(entry.sources, entry.target)
        if entry.method not in methods:
            methods.append(entry.method)
        if setting not in settings:
            settings.append(setting)
        marker = "*" if entry.significant else ""
        cells[(entry.method, setting)] = f"{entry.accuracy_percent:.1f}{marker}"
    header = ["method"] + settings
    rows = [[method] + [cells.get((method, s), "-") for s in settings] for method in methods]
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
             for row in [header] + rows]
    return "\n".join(lines) + "\n"


def format_report_tsv(entries) -> str:
    """Machine-readable report, one entry per line."""
    lines = [
        "method\tsource_domains\ttarget_domain\taccuracy_percent"
        "\tsignificant_vs_baseline\tmcnemar_statistic\tmcnemar_method"
    ]
    for entry in entries:
        statistic = "" if entry.mcnemar_statistic is None else repr(float(entry.mcnemar_statistic))
        method_name = entry.mcnemar_method or ""
        lines.append(
            f"{entry.method}\t{'+'.join(entry.sources)}\t{entry.target}"
            f"\t{entry.accuracy_percent:.1f}\t{int(entry.significant)}"
            f"\t{statistic}\t{method_name}"
        )
    return "\n".join(lines) + "\n"
