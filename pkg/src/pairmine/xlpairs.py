"""Candidate pairs from translated parallel text.

Two inputs meet here: an alignment table of scored bilingual sentence
pairs (an English side and a foreign side) and a translation table mapping
alignment ids to machine-translated English renderings of the foreign
side. Joining them yields English pairs whose two sides said roughly the
same thing in different languages, which makes them near-paraphrases
rather than near-duplicates. No reranking is applied to these pairs.

Machine translation itself is out of scope; any external system may
produce the translation table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import ArgumentError
from .pairgen import CandidatePair, ORIGIN_TRANSLATE, normalized_text

DEFAULT_MIN_SCORE = 1.04
DEFAULT_LANGS = frozenset({"de", "fr", "id", "ja", "cs"})


@dataclass(frozen=True)
class AlignedPair:
    align_id: int
    align_score: float
    english: str
    foreign: str
    lang: str


@dataclass(frozen=True)
class TranslationRecord:
    align_id: int
    translated_english: str
    mt_system: str = ""


@dataclass
class AlignmentTable:
    rows: list[AlignedPair]
    skipped: int


def ingest_alignments(
    path,
    lang_filter: frozenset[str] | set[str] = DEFAULT_LANGS,
    min_score: float = DEFAULT_MIN_SCORE,
    default_lang: str | None = None,
) -> AlignmentTable:
    """Read a tab-separated alignment file.

    Columns: score, english sentence, foreign sentence, and optionally a
    language code; rows without the fourth column take default_lang. The
    alignment id is the 1-based line number, so ids stay stable however
    the filter settings change. Rows below min_score, outside lang_filter,
    or malformed are skipped and counted.
    """
    lang_filter = frozenset(lang_filter)
    rows: list[AlignedPair] = []
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) == 3:
                raw_score, english, foreign = parts
                lang = default_lang
            elif len(parts) == 4:
                raw_score, english, foreign, lang = parts
            else:
                skipped += 1
                continue
            try:
                score = float(raw_score)
            except ValueError:
                skipped += 1
                continue
            if (
                lang is None
                or lang not in lang_filter
                or score < min_score
                or not english.strip()
                or not foreign.strip()
            ):
                skipped += 1
                continue
            rows.append(
                AlignedPair(
                    align_id=line_no,
                    align_score=score,
                    english=english,
                    foreign=foreign,
                    lang=lang,
                )
            )
    return AlignmentTable(rows=rows, skipped=skipped)


def load_translations(path) -> dict[int, TranslationRecord]:
    """Read the translation table: "align_id \\t translated_text" with an
    optional third column naming the MT system. A repeated align_id is an
    error; rows with an empty translation or malformed id are ignored."""
    table: dict[int, TranslationRecord] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                continue
            raw_id, text = parts[0], parts[1]
            mt_system = parts[2] if len(parts) == 3 else ""
            try:
                align_id = int(raw_id)
            except ValueError:
                continue
            if not text.strip():
                continue
            if align_id in table:
                raise ArgumentError(f"duplicate align_id {align_id} in translations")
            table[align_id] = TranslationRecord(
                align_id=align_id, translated_english=text, mt_system=mt_system
            )
    return table


def join_translations(
    aligned: list[AlignedPair],
    translations_path,
    premise_side: str = "translated",
) -> tuple[list[CandidatePair], int]:
    """Pair each alignment's English side with the translation of its
    foreign side. Alignments without a translation, and pairs whose two
    sides normalize to the same text, are dropped (the second return value
    counts the drops). Output is ordered by align_id; pairs carry no
    features or score since these candidates skip reranking.
    """
    if premise_side not in ("translated", "original"):
        raise ArgumentError("premise_side must be 'translated' or 'original'")
    translations = load_translations(translations_path)
    pairs: list[CandidatePair] = []
    dropped = 0
    for row in sorted(aligned, key=lambda r: r.align_id):
        record = translations.get(row.align_id)
        if record is None:
            dropped += 1
            continue
        translated = record.translated_english
        if normalized_text(translated) == normalized_text(row.english):
            dropped += 1
            continue
        translated_ref = f"t{row.align_id}"
        english_ref = f"e{row.align_id}"
        if premise_side == "translated":
            premise_id, premise = translated_ref, translated
            hypothesis_id, hypothesis = english_ref, row.english
        else:
            premise_id, premise = english_ref, row.english
            hypothesis_id, hypothesis = translated_ref, translated
        pairs.append(
            CandidatePair(
                pair_id=f"xl-{row.align_id:08d}",
                premise_id=premise_id,
                hypothesis_id=hypothesis_id,
                premise_text=premise,
                hypothesis_text=hypothesis,
                origin=ORIGIN_TRANSLATE,
            )
        )
    return pairs, dropped


def balance_by_language(
    table: AlignmentTable, per_language: int | None = None
) -> AlignmentTable:
    """Trim every language to an equal quota (the smallest language's count
    unless given), keeping the highest-scoring alignments; ties fall to the
    smaller align_id. The trimmed rows are added to the skip count."""
    by_lang: dict[str, list[AlignedPair]] = {}
    for row in table.rows:
        by_lang.setdefault(row.lang, []).append(row)
    if not by_lang:
        return AlignmentTable(rows=[], skipped=table.skipped)
    quota = per_language
    if quota is None:
        quota = min(len(rows) for rows in by_lang.values())
    if quota < 0:
        raise ArgumentError("per_language must be non-negative")
    kept: list[AlignedPair] = []
    for lang in sorted(by_lang):
        rows = sorted(by_lang[lang], key=lambda r: (-r.align_score, r.align_id))
        kept.extend(rows[:quota])
    kept.sort(key=lambda r: r.align_id)
    dropped = len(table.rows) - len(kept)
    return AlignmentTable(rows=kept, skipped=table.skipped + dropped)


def language_counts(rows: Iterable[AlignedPair]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.lang] = counts.get(row.lang, 0) + 1
    return dict(sorted(counts.items()))


def write_summary_json(path, table: AlignmentTable, pairs, dropped: int) -> None:
    payload = {
        "alignments_kept": len(table.rows),
        "alignments_skipped": table.skipped,
        "pairs_emitted": len(pairs),
        "pairs_dropped": dropped,
        "by_language": language_counts(table.rows),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
