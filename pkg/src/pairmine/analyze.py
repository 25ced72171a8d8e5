"""Dataset diagnostics: label balance, hypothesis length, premise to
hypothesis word overlap, and PMI rankings of label-associated words.

All functions are pure over immutable example lists; the input is the
export format of the annotation service.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ArgumentError
from .text import token_types

LABELS = ("E", "C", "N")


@dataclass(frozen=True)
class LabeledExample:
    premise: str
    hypothesis: str
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ArgumentError(f"label must be one of {LABELS}, got {self.label!r}")
        if not self.premise.strip() or not self.hypothesis.strip():
            raise ArgumentError("premise and hypothesis must be non-empty")


def load_examples(path, split: str | None = None) -> list[LabeledExample]:
    """Read annotation-service export JSONL, optionally one split only."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if "_provenance" in row:
                continue
            if split is not None and row.get("split") != split:
                continue
            label = row.get("label") or row.get("gold")
            if label is None:
                continue
            out.append(
                LabeledExample(
                    premise=row["premise"], hypothesis=row["hypothesis"], label=label
                )
            )
    return out


def word_type_overlap(ex: LabeledExample) -> float:
    """|premise types ∩ hypothesis types| / |union|."""
    p = token_types(ex.premise)
    h = token_types(ex.hypothesis)
    if not p or not h:
        raise ArgumentError("overlap undefined when a side has no token types")
    return len(p & h) / len(p | h)


@dataclass(frozen=True)
class DatasetStats:
    n_pairs: int
    label_pct: dict[str, float]
    hl_mean: dict[str, float]
    hl_std: dict[str, float]
    overlap_pct: dict[str, float]
    overlap_excluded: int

    def as_dict(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "label_pct": self.label_pct,
            "hl_mean": self.hl_mean,
            "hl_std": self.hl_std,
            "overlap_pct": self.overlap_pct,
            "overlap_excluded": self.overlap_excluded,
        }


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _population_std(values: list[float]) -> float:
    mu = _mean(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / len(values))


def dataset_stats(ds: list[LabeledExample]) -> DatasetStats:
    """Per-label hypothesis length (whitespace tokens; population std),
    per-label mean overlap in percent, and the label percentages.
    Examples with an empty normalized side are excluded from the overlap
    average and counted."""
    if not ds:
        raise ArgumentError("dataset is empty")
    by_label: dict[str, list[LabeledExample]] = {label: [] for label in LABELS}
    for ex in ds:
        by_label[ex.label].append(ex)

    label_pct = {label: 100.0 * len(by_label[label]) / len(ds) for label in LABELS}
    hl_mean: dict[str, float] = {}
    hl_std: dict[str, float] = {}
    overlap_pct: dict[str, float] = {}
    excluded = 0
    for label in LABELS:
        examples = by_label[label]
        if not examples:
            hl_mean[label] = 0.0
            hl_std[label] = 0.0
            overlap_pct[label] = 0.0
            continue
        lengths = [float(len(ex.hypothesis.split())) for ex in examples]
        hl_mean[label] = _mean(lengths)
        hl_std[label] = _population_std(lengths)
        overlaps = []
        for ex in examples:
            try:
                overlaps.append(word_type_overlap(ex))
            except ArgumentError:
                excluded += 1
        overlap_pct[label] = 100.0 * _mean(overlaps) if overlaps else 0.0
    return DatasetStats(
        n_pairs=len(ds),
        label_pct=label_pct,
        hl_mean=hl_mean,
        hl_std=hl_std,
        overlap_pct=overlap_pct,
        overlap_excluded=excluded,
    )


DEFAULT_SMOOTHING_K = 100.0


@dataclass(frozen=True)
class PmiRanking:
    per_label: dict[str, list[tuple[str, float]]]
    smoothing_k: float
    vocabulary_size: int


def pmi(ds: list[LabeledExample], smoothing_k: float = DEFAULT_SMOOTHING_K) -> PmiRanking:
    """PMI(w, l) = ln[p(w,l) / (p(w) p(l))] over add-k smoothed counts of
    (hypothesis word type, label) co-occurrences, a word counted once per
    hypothesis. Marginals are column and row sums of the smoothed table,
    so per-word joints sum exactly to the word marginal. Rankings are
    descending with lexicographic tie-break."""
    if not ds:
        raise ArgumentError("dataset is empty")
    if smoothing_k < 0:
        raise ArgumentError("smoothing_k must be non-negative")
    joint: dict[tuple[str, str], int] = {}
    vocab: set[str] = set()
    for ex in ds:
        for word in token_types(ex.hypothesis):
            vocab.add(word)
            key = (word, ex.label)
            joint[key] = joint.get(key, 0) + 1
    words = sorted(vocab)
    total = sum(joint.values())
    Z = total + smoothing_k * len(words) * len(LABELS)
    if Z <= 0:
        raise ArgumentError("smoothed table is empty; nothing to rank")

    label_totals = {
        label: sum(joint.get((w, label), 0) for w in words) for label in LABELS
    }
    per_label: dict[str, list[tuple[str, float]]] = {}
    for label in LABELS:
        p_l = (label_totals[label] + smoothing_k * len(words)) / Z
        scored = []
        for word in words:
            word_total = sum(joint.get((word, lab), 0) for lab in LABELS)
            p_w = (word_total + smoothing_k * len(LABELS)) / Z
            p_wl = (joint.get((word, label), 0) + smoothing_k) / Z
            scored.append((word, math.log(p_wl / (p_w * p_l))))
        scored.sort(key=lambda item: (-item[1], item[0]))
        per_label[label] = scored
    return PmiRanking(per_label=per_label, smoothing_k=smoothing_k, vocabulary_size=len(words))


@dataclass(frozen=True)
class ReportTable:
    rows: dict[str, list[tuple[str, float]]]  # label -> top-k (word, score)

    def as_json(self) -> dict:
        return {
            label: [{"word": w, "pmi": s} for w, s in entries]
            for label, entries in self.rows.items()
        }

    def as_text(self) -> str:
        lines = []
        width = max(
            [len(w) for entries in self.rows.values() for w, _ in entries] + [4]
        )
        for label in LABELS:
            if label not in self.rows:
                continue
            lines.append(f"label {label}:")
            for word, score in self.rows[label]:
                lines.append(f"  {word:<{width}}  {score:+.4f}")
        return "\n".join(lines)


def top_k_report(ranking: PmiRanking, k: int) -> ReportTable:
    if k < 1:
        raise ArgumentError("k must be >= 1")
    return ReportTable(
        rows={label: entries[:k] for label, entries in ranking.per_label.items()}
    )


def render_stats_text(stats: DatasetStats) -> str:
    lines = [f"pairs: {stats.n_pairs}"]
    lines.append(
        "labels: "
        + "  ".join(f"{label} {stats.label_pct[label]:.1f}%" for label in LABELS)
    )
    for label in LABELS:
        lines.append(
            f"  {label}: hypothesis length {stats.hl_mean[label]:.1f}"
            f" ± {stats.hl_std[label]:.1f} tokens,"
            f" overlap {stats.overlap_pct[label]:.1f}%"
        )
    if stats.overlap_excluded:
        lines.append(f"overlap excluded: {stats.overlap_excluded}")
    return "\n".join(lines)
