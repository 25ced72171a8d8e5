"""Tokenization and sentence splitting shared by every stage.

Token normalization must be identical wherever token types are consumed
(feature extraction, the stub oracle, overlap statistics), so it lives in
one place.
"""

from __future__ import annotations

import re
import string

_PUNCT = string.punctuation + "“”‘’…—–"

# Abbreviations that never end a sentence (matched case-insensitively
# against the word right before a period).
TITLE_ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof rev fr hon st jr sr gen col sgt lt capt cmdr maj gov
    sen rep pres supt det insp adm messrs mme mlle etc vs eg ie al inc ltd
    co corp dept univ assn bros approx est cf
    jan feb mar apr jun jul aug sep sept oct nov dec
    mon tue tues wed thu thurs fri sat sun
    """.split()
)

# Abbreviations that suppress a split only when a number follows (e.g. "No. 5").
NUMERIC_ABBREVIATIONS = frozenset("no vol fig figs pp op sec min hr ch pt".split())

_CLOSERS = "\"')]}’”"
_OPENERS = "\"'([{‘“"
_TERMINATORS = ".!?"

_PARAGRAPH_RE = re.compile(r"\n\s*\n")


def normalize_token(token: str) -> str:
    """Lowercase and strip surrounding punctuation; '' if nothing remains."""
    return token.strip(_PUNCT).lower()


def tokens(text: str) -> list[str]:
    """Normalized tokens with multiplicity, in order."""
    out = []
    for raw in text.split():
        tok = normalize_token(raw)
        if tok:
            out.append(tok)
    return out


def token_types(text: str) -> frozenset[str]:
    return frozenset(tokens(text))


def _word_before(text: str, dot: int) -> str:
    """Maximal alphabetic run immediately preceding position `dot`."""
    j = dot
    while j > 0 and text[j - 1].isalpha():
        j -= 1
    return text[j:dot]


def _is_boundary(text: str, term_start: int, term_end: int, after: int) -> bool:
    """Decide whether the terminator run text[term_start:term_end] (with any
    closing quotes absorbed up to `after`) ends a sentence."""
    n = len(text)
    if after >= n:
        return True
    if not text[after].isspace():
        return False  # mid-token, e.g. "3.5" or "U.S.A"
    k = after
    while k < n and text[k].isspace():
        k += 1
    if k >= n:
        return True
    nxt = text[k]
    if not (nxt.isupper() or nxt.isdigit() or nxt in _OPENERS):
        return False
    if term_end - term_start == 1 and text[term_start] == ".":
        word = _word_before(text, term_start)
        low = word.lower()
        if low in TITLE_ABBREVIATIONS:
            return False
        if len(word) == 1 and word.isupper():
            return False  # initials: "J. Smith"
        if low in NUMERIC_ABBREVIATIONS and nxt.isdigit():
            return False
    return True


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence splitter on {. ! ?}.

    Joining the returned sentences with single spaces reproduces the input
    modulo whitespace normalization; no length filtering happens here.
    """
    out: list[str] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINATORS:
            term_start = i
            while i < n and text[i] in _TERMINATORS:
                i += 1
            term_end = i
            while i < n and text[i] in _CLOSERS:
                i += 1
            if _is_boundary(text, term_start, term_end, i):
                piece = text[start:i].strip()
                if piece:
                    out.append(piece)
                start = i
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def paragraphs(text: str) -> list[str]:
    """Blank-line separated blocks, empties dropped."""
    return [p for p in (_PARAGRAPH_RE.split(text)) if p.strip()]
