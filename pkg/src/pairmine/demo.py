"""Self-contained demo fixture: a synthetic corpus, toy word vectors,
alignment/translation tables, and ready-to-run configs.

Each generated document is a small story built around one base sentence:
a couple of near-duplicates (high word overlap), a few partial rewrites
(moderate overlap), and unrelated filler (low overlap). Retrieval over
such a corpus surfaces a mix the overlap-stub oracle labels E/C/N, which
gives the tuning objective a real signal at toy scale.

Everything is deterministic for a given seed.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np

from .config import derive_seed

SUBJECTS = (
    "captain", "gardener", "merchant", "painter", "engineer", "farmer",
    "librarian", "sailor", "teacher", "astronomer", "baker", "courier",
    "doctor", "fisherman", "mayor", "violinist",
)
VERBS = (
    "repaired", "watched", "carried", "sold", "painted", "measured",
    "planted", "followed", "counted", "cleaned", "borrowed", "described",
    "examined", "gathered", "moved", "opened", "guarded", "traded",
    "weighed", "sketched",
)
OBJECTS = (
    "lantern", "bridge", "telescope", "wagon", "barrel", "ladder",
    "compass", "bucket", "engine", "basket", "anchor", "bell",
    "cabinet", "fence", "kettle", "mirror", "rope", "saddle",
    "shovel", "table",
)
PLACES = (
    "harbor", "market", "orchard", "station", "library", "mill",
    "workshop", "garden", "plaza", "lighthouse", "warehouse", "meadow",
    "courtyard", "foundry", "pier", "granary",
)
TIMES = (
    "yesterday", "today", "early", "late", "quietly", "carefully",
    "slowly", "quickly", "twice", "again", "alone", "together",
)
MODIFIERS = (
    "old", "red", "heavy", "small", "wooden", "broken", "bright",
    "narrow", "tall", "quiet", "rusty", "green", "crooked", "smooth",
    "wide", "pale", "sturdy", "faded", "round", "long", "cold", "warm",
    "dusty", "clean",
)
FILLER_SUBJECTS = (
    "storm", "orchestra", "festival", "committee", "glacier", "caravan",
    "satellite", "volcano", "parliament", "monsoon", "circus", "archive",
)
FILLER_VERBS = (
    "erupted", "convened", "dissolved", "migrated", "echoed", "expanded",
    "collapsed", "lingered", "shimmered", "accelerated", "drifted", "vanished",
)
FILLER_OBJECTS = (
    "symphony", "treaty", "equation", "eclipse", "manifesto", "monument",
    "spiral", "horizon", "pendulum", "mosaic", "citadel", "labyrinth",
)

#: words deliberately absent from the vector table
OOV_WORDS = ("qoph", "zyxt", "vril")

VECTOR_DIM = 32
LANGS = ("cs", "de", "fr", "id", "ja")


def _base_sentence(rng: random.Random) -> tuple[str, dict]:
    slots = {
        "subj": rng.choice(SUBJECTS),
        "verb": rng.choice(VERBS),
        "obj": rng.choice(OBJECTS),
        "place": rng.choice(PLACES),
        "time": rng.choice(TIMES),
        "mod": rng.choice(MODIFIERS),
    }
    text = (
        f"The {slots['subj']} {slots['verb']} the {slots['mod']} "
        f"{slots['obj']} near the {slots['place']} {slots['time']}."
    )
    return text, slots


def _near_duplicate(rng: random.Random, slots: dict) -> str:
    changed = dict(slots)
    slot = rng.choice(("time", "mod"))
    changed[slot] = rng.choice(TIMES if slot == "time" else MODIFIERS)
    return (
        f"The {changed['subj']} {changed['verb']} the {changed['mod']} "
        f"{changed['obj']} near the {changed['place']} {changed['time']}."
    )


def _partial(rng: random.Random, slots: dict) -> str:
    verb = rng.choice(VERBS)
    place = rng.choice(PLACES)
    mod = rng.choice(MODIFIERS)
    extra = rng.choice(MODIFIERS)
    return (
        f"A {mod} {slots['subj']} {verb} one {extra} {slots['obj']} "
        f"beside a {place} entrance."
    )


def _unrelated(rng: random.Random, oov: bool = False) -> str:
    subj = rng.choice(FILLER_SUBJECTS)
    verb = rng.choice(FILLER_VERBS)
    obj = rng.choice(FILLER_OBJECTS)
    tail = rng.choice(FILLER_OBJECTS)
    last = rng.choice(OOV_WORDS) if oov else rng.choice(FILLER_VERBS)
    return f"One distant {subj} {verb} while the {obj} {last} behind every {tail}."


def _story(rng: random.Random) -> list[str]:
    base, slots = _base_sentence(rng)
    sentences = [base]
    sentences.extend(_near_duplicate(rng, slots) for _ in range(2))
    sentences.extend(_partial(rng, slots) for _ in range(3))
    sentences.extend(_unrelated(rng) for _ in range(3))
    return sentences


def _word_vector(word: str, seed: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(seed, "wordvec", word))
    vec = rng.standard_normal(VECTOR_DIM)
    return vec / np.linalg.norm(vec)


def _vocabulary() -> list[str]:
    words = {"the", "a", "one", "near", "beside", "entrance", "while", "behind",
             "every", "distant"}
    for pool in (SUBJECTS, VERBS, OBJECTS, PLACES, TIMES, MODIFIERS,
                 FILLER_SUBJECTS, FILLER_VERBS, FILLER_OBJECTS):
        words.update(pool)
    return sorted(words)


def _write_vectors(path: Path, seed: int) -> None:
    vocab = _vocabulary()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {VECTOR_DIM}\n")
        for word in vocab:
            values = " ".join(f"{v:.6f}" for v in _word_vector(word, seed))
            fh.write(f"{word} {values}\n")


def _write_docs(path: Path, seed: int, n_docs: int) -> int:
    rng = random.Random(derive_seed(seed, "docs"))
    n_sentences = 0
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_docs):
            sentences = _story(rng)
            if i % 50 == 25:
                # an all-out-of-vocabulary sentence: embeds to zero
                sentences.append(f"{OOV_WORDS[0].capitalize()} {OOV_WORDS[1]} {OOV_WORDS[2]}.")
            n_sentences += len(sentences)
            fh.write(
                json.dumps(
                    {"id": f"d{i:04d}", "text": " ".join(sentences), "source": "demo"},
                    sort_keys=True,
                )
                + "\n"
            )
    return n_sentences


def _foreign_text(rng: random.Random, lang: str) -> str:
    syllables = ("ka", "mo", "re", "li", "tu", "sa", "ne", "vo")
    words = [
        "".join(rng.choice(syllables) for _ in range(rng.randint(2, 3)))
        for _ in range(rng.randint(4, 7))
    ]
    return f"{lang}: " + " ".join(words)


def _write_alignments(
    align_path: Path, trans_path: Path, seed: int, n_rows: int = 25
) -> None:
    rng = random.Random(derive_seed(seed, "alignments"))
    align_lines = []
    trans_lines = []
    for i in range(n_rows):
        lang = LANGS[i % len(LANGS)]
        base, _ = _base_sentence(rng)
        english = base
        foreign = _foreign_text(rng, lang)
        # two rows fall below the mining threshold on purpose
        score = 0.95 if i in (3, 11) else round(1.05 + rng.random() * 0.4, 4)
        align_lines.append(f"{score}\t{english}\t{foreign}\t{lang}")
        line_no = i + 1
        if i in (7, 15, 19):
            continue  # translations intentionally missing for these
        if i == 5:
            translated = english  # self-match: joined pair must be dropped
        else:
            words = english[:-1].split()
            words[1], words[2] = words[2], words[1]
            translated = " ".join(words) + "."
        trans_lines.append(f"{line_no}\t{translated}\tdemo-mt")
    align_path.write_text("\n".join(align_lines) + "\n", encoding="utf-8")
    trans_path.write_text("\n".join(trans_lines) + "\n", encoding="utf-8")


_CONFIG_FIXED = """\
# demo pipeline: fixed mining parameters
[corpus]
documents = "docs.jsonl"
profile = "generic"

[vectors]
path = "vectors.txt"

[index]
d_out = 16
nprobe = {nprobe}

[mining]
n_queries = {n_queries}
k_cap = 400

[mining.params]
weights = [0.45, 0.30, 0.0, 0.0, 0.15, 0.0, 0.0, 0.0]
K = 300
N = 25.0

[oracle]
kind = "stub_heuristic"

[translate]
alignments = "alignments.tsv"
translations = "translations.tsv"

[output]
dir = "out"

[run]
seed = {seed}
"""

_CONFIG_TUNE = """\
# demo pipeline: tuned mining parameters
[corpus]
documents = "docs.jsonl"
profile = "generic"

[vectors]
path = "vectors.txt"

[index]
d_out = 16
nprobe = {nprobe}

[mining]
n_queries = {n_queries}
k_cap = 400

[tune]
budget = {budget}
strategy = "tpe_like"

[tune.space]
k_min = 50
k_max = 400
k_step = 50

[oracle]
kind = "stub_heuristic"

[output]
dir = "out-tune"

[run]
seed = {seed}
"""


def generate(
    out_dir,
    seed: int = 7,
    n_docs: int = 556,
    n_queries: int = 100,
    tune_budget: int = 30,
) -> dict:
    """Write the full demo fixture; returns a manifest of what was made.

    nprobe in the emitted configs equals the cluster-count rule's value for
    the corpus size, so demo searches probe every cell (exact retrieval).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_sentences = _write_docs(out / "docs.jsonl", seed, n_docs)
    _write_vectors(out / "vectors.txt", seed)
    _write_alignments(out / "alignments.tsv", out / "translations.tsv", seed)

    from .vindex import cluster_count

    nprobe = cluster_count(n_sentences)
    n_queries = min(n_queries, n_sentences)
    (out / "config.toml").write_text(
        _CONFIG_FIXED.format(nprobe=nprobe, n_queries=n_queries, seed=seed),
        encoding="utf-8",
    )
    (out / "config-tune.toml").write_text(
        _CONFIG_TUNE.format(
            nprobe=nprobe, n_queries=n_queries, seed=seed, budget=tune_budget
        ),
        encoding="utf-8",
    )
    return {
        "documents": n_docs,
        "sentences": n_sentences,
        "vocabulary": len(_vocabulary()),
        "configs": ["config.toml", "config-tune.toml"],
        "out_dir": str(out),
    }
