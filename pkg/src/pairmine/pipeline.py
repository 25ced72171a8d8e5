"""Pipeline stages behind the command line.

Stages run in dependency order; each writes its artifacts under the
config's output directory, stamped with the config hash, the global seed,
and the tool version. A stage whose artifact already carries the current
config hash is skipped unless forced. Missing upstream artifacts raise
errors naming the stage to run first.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import analyze as analyze_mod
from . import embed
from .annosvc.budget import preset_plan
from .config import PipelineConfig, config_hash, derive_seed, validate_paths
from .corpus import Corpus, ingest
from .errors import ArgumentError, MissingArtifactError
from .pairgen import (
    MiningParams,
    mine,
    prepare,
    read_pairs_jsonl,
    write_pairs_jsonl,
)
from .tune import TuneContext, objective, optimize, predict, write_report
from .vindex import build, cluster_count, load_index, save_index, train_clusters, train_pca
from .xlpairs import (
    balance_by_language,
    ingest_alignments,
    join_translations,
    write_summary_json,
)

STAGE_ORDER = ("ingest", "embed", "index", "tune", "mine-sim", "mine-translate", "analyze")


@dataclass
class StageResult:
    stage: str
    artifacts: list[str]
    cached: bool
    detail: str = ""


def _provenance(cfg: PipelineConfig) -> dict:
    return {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "tool_version": __version__,
    }


def _out(cfg: PipelineConfig, name: str) -> Path:
    return Path(cfg.output_dir) / name


def _read_provenance(path: Path) -> dict | None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
        if not first:
            return None
        row = json.loads(first)
    except (OSError, json.JSONDecodeError):
        return None
    if isinstance(row, dict) and "_provenance" in row:
        return row["_provenance"]
    return None


def _json_provenance(path: Path) -> dict | None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None
    if isinstance(payload, dict):
        return payload.get("_provenance")
    return None


def _is_current(path: Path, cfg: PipelineConfig, json_doc: bool = False) -> bool:
    if not path.exists():
        return False
    prov = _json_provenance(path) if json_doc else _read_provenance(path)
    return bool(prov) and prov.get("config_hash") == config_hash(cfg)


def _write_json(path: Path, payload: dict, cfg: PipelineConfig) -> None:
    payload = dict(payload)
    payload["_provenance"] = _provenance(cfg)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- corpus and vectors -------------------------------------------------------


def load_corpus(cfg: PipelineConfig) -> Corpus:
    return ingest(cfg.corpus.documents, cfg.corpus.profile)


def stage_ingest(cfg: PipelineConfig, force: bool = False) -> StageResult:
    out = _out(cfg, "sentences.jsonl")
    if not force and _is_current(out, cfg):
        return StageResult("ingest", [str(out)], cached=True)
    corpus = load_corpus(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"_provenance": _provenance(cfg)}, sort_keys=True) + "\n")
        for sent in corpus.sentences:
            fh.write(
                json.dumps(
                    {
                        "sent_id": sent.sent_id,
                        "doc_id": sent.doc_ref,
                        "text": sent.text,
                        "position": sent.position,
                        "lead": sent.is_lead_paragraph,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    detail = f"{len(corpus)} sentences from {len(corpus.doc_index)} documents"
    if corpus.skipped_records:
        detail += f", {corpus.skipped_records} records skipped"
    return StageResult("ingest", [str(out)], cached=False, detail=detail)


def stage_embed(cfg: PipelineConfig, force: bool = False) -> StageResult:
    out = _out(cfg, "embeddings.bin")
    meta_path = _out(cfg, "embeddings-meta.json")
    if not force and out.exists() and _is_current(meta_path, cfg, json_doc=True):
        return StageResult("embed", [str(out), str(meta_path)], cached=True)
    corpus = load_corpus(cfg)
    store = embed.load_vectors(cfg.vectors.path)
    matrix = embed.encode_corpus(corpus, store, unit_norm=cfg.vectors.unit_norm)
    out.parent.mkdir(parents=True, exist_ok=True)
    embed.save_cache(out, matrix)
    nonzero = int(embed.nonzero_rows(matrix).shape[0])
    _write_json(
        meta_path,
        {
            "sentences": int(matrix.shape[0]),
            "dim": int(matrix.shape[1]),
            "nonzero": nonzero,
            "vocabulary": len(store.table),
        },
        cfg,
    )
    return StageResult(
        "embed",
        [str(out), str(meta_path)],
        cached=False,
        detail=f"{matrix.shape[0]} vectors, dim {matrix.shape[1]}, {nonzero} nonzero",
    )


def load_embeddings(cfg: PipelineConfig) -> np.ndarray:
    path = _out(cfg, "embeddings.bin")
    if not path.exists() or not _is_current(_out(cfg, "embeddings-meta.json"), cfg, json_doc=True):
        raise MissingArtifactError(
            "embeddings not built for this config; run `pairmine run embed` first",
            "embed",
        )
    return embed.load_cache(path)


# --- index ---------------------------------------------------------------------


def seed_sentences(cfg: PipelineConfig, corpus: Corpus) -> dict[str, list[int]]:
    """Which sentences each index holds.

    news: one index per source; within a source, up to per_month_seed_cap
    sentences sampled per (year, month) partition (undated documents pool
    under one partition). wiki: one index over lead-paragraph sentences.
    generic: one index over everything.
    """
    if corpus.profile == "generic":
        return {"main": [s.sent_id for s in corpus.sentences]}
    if corpus.profile == "wiki":
        ids = [s.sent_id for s in corpus.sentences if s.is_lead_paragraph]
        return {"main": ids}
    groups: dict[str, dict[tuple, list[int]]] = {}
    for sent in corpus.sentences:
        doc = corpus.document_for(sent)
        partition = doc.date if doc.date is not None else ("undated",)
        groups.setdefault(doc.source, {}).setdefault(partition, []).append(sent.sent_id)
    cap = cfg.index.per_month_seed_cap
    out: dict[str, list[int]] = {}
    for source in sorted(groups):
        chosen: list[int] = []
        for partition in sorted(groups[source]):
            pool = sorted(groups[source][partition])
            if len(pool) <= cap:
                chosen.extend(pool)
            else:
                rng = random.Random(derive_seed(cfg.seed, "seeds", source, partition))
                chosen.extend(sorted(rng.sample(pool, cap)))
        out[source] = sorted(chosen)
    return out


def stage_index(cfg: PipelineConfig, force: bool = False) -> StageResult:
    meta_path = _out(cfg, "index-meta.json")
    if not force and _is_current(meta_path, cfg, json_doc=True):
        meta = json.loads(meta_path.read_text())
        paths = [entry["path"] for entry in meta["indexes"]]
        if all(Path(p).exists() for p in paths):
            return StageResult("index", paths + [str(meta_path)], cached=True)
    corpus = load_corpus(cfg)
    matrix = load_embeddings(cfg)
    entries = []
    artifacts = []
    for name, ids in seed_sentences(cfg, corpus).items():
        ids = [i for i in ids if float(np.abs(matrix[i]).sum()) > 0.0]
        if not ids:
            raise ArgumentError(f"index {name!r} has no nonzero seed vectors")
        seeds = matrix[ids].astype(np.float64)
        x = cfg.index.cluster_count or cluster_count(len(ids))
        distinct = np.unique(seeds, axis=0).shape[0]
        x = min(x, distinct)
        d_out = min(cfg.index.d_out, seeds.shape[1])
        pca = train_pca(seeds, d_out, seed=derive_seed(cfg.seed, "pca", name))
        reduced = pca.apply(seeds)
        centroids = train_clusters(
            reduced.astype(np.float64), x, seed=derive_seed(cfg.seed, "kmeans", name)
        )
        index = build(zip(ids, seeds), pca, centroids)
        path = _out(cfg, f"index-{name}.pmidx")
        path.parent.mkdir(parents=True, exist_ok=True)
        save_index(path, index)
        artifacts.append(str(path))
        entries.append(
            {
                "name": name,
                "path": str(path),
                "clusters": int(x),
                "n_seed": len(ids),
                "d_out": int(d_out),
            }
        )
    _write_json(meta_path, {"indexes": entries}, cfg)
    artifacts.append(str(meta_path))
    detail = ", ".join(f"{e['name']}: {e['n_seed']} seeds / {e['clusters']} cells" for e in entries)
    return StageResult("index", artifacts, cached=False, detail=detail)


def load_indexes(cfg: PipelineConfig):
    meta_path = _out(cfg, "index-meta.json")
    if not _is_current(meta_path, cfg, json_doc=True):
        raise MissingArtifactError(
            "no index built for this config; run `pairmine run index` first", "index"
        )
    meta = json.loads(meta_path.read_text())
    indexes = []
    for entry in sorted(meta["indexes"], key=lambda e: e["name"]):
        if not Path(entry["path"]).exists():
            raise MissingArtifactError(
                f"index file {entry['path']} is missing; run `pairmine run index` first",
                "index",
            )
        indexes.append(load_index(entry["path"]))
    return indexes


# --- mining -----------------------------------------------------------------------


def _mining_params(cfg: PipelineConfig) -> MiningParams:
    if cfg.mining.params is not None:
        return cfg.mining.params
    best_path = _out(cfg, "best-params.json")
    if not _is_current(best_path, cfg, json_doc=True):
        raise MissingArtifactError(
            "config uses a tune space but no tuned parameters exist; "
            "run `pairmine run tune` first",
            "tune",
        )
    payload = json.loads(best_path.read_text())
    return MiningParams.from_dict(payload["params"])


def stage_mine_sim(cfg: PipelineConfig, force: bool = False) -> StageResult:
    out = _out(cfg, "pairs-sim.jsonl")
    if not force and _is_current(out, cfg):
        return StageResult("mine-sim", [str(out)], cached=True)
    params = _mining_params(cfg)
    corpus = load_corpus(cfg)
    matrix = load_embeddings(cfg)
    indexes = load_indexes(cfg)
    ctx = prepare(
        corpus,
        matrix,
        indexes,
        n_queries=cfg.mining.n_queries,
        k_cap=params.K,
        nprobe=cfg.index.nprobe,
        seed=derive_seed(cfg.seed, "queries"),
    )
    pairs = mine(ctx, params)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_pairs_jsonl(out, pairs, header=_provenance(cfg))
    return StageResult(
        "mine-sim", [str(out)], cached=False, detail=f"{len(pairs)} pairs selected"
    )


def stage_tune(cfg: PipelineConfig, force: bool = False) -> StageResult:
    if cfg.tune is None:
        raise ArgumentError("config pins fixed mining params; nothing to tune")
    report_path = _out(cfg, "tuning-report.json")
    best_path = _out(cfg, "best-params.json")
    if not force and _is_current(report_path, cfg, json_doc=True) and _is_current(
        best_path, cfg, json_doc=True
    ):
        return StageResult("tune", [str(report_path), str(best_path)], cached=True)
    corpus = load_corpus(cfg)
    matrix = load_embeddings(cfg)
    indexes = load_indexes(cfg)
    ctx = prepare(
        corpus,
        matrix,
        indexes,
        n_queries=cfg.mining.n_queries,
        k_cap=max(cfg.tune.space.k_choices),
        nprobe=cfg.index.nprobe,
        seed=derive_seed(cfg.seed, "queries"),
    )
    tctx = TuneContext(
        mining=ctx,
        oracle=cfg.oracle,
        subsample=cfg.tune.subsample or None,
    )
    result = optimize(
        lambda params: objective(params, tctx),
        cfg.tune.space,
        budget=cfg.tune.budget,
        seed=derive_seed(cfg.seed, "tune"),
        strategy=cfg.tune.strategy,
    )
    report_path.parent.mkdir(parents=True, exist_ok=True)
    write_report(report_path, result, header=_provenance(cfg))
    _write_json(
        best_path,
        {
            "params": result.best_params.to_dict(),
            "objective_nats": result.best_objective
            if result.best_objective != float("inf")
            else None,
        },
        cfg,
    )
    return StageResult(
        "tune",
        [str(report_path), str(best_path)],
        cached=False,
        detail=f"best objective {result.best_objective:.6f} nats over {cfg.tune.budget} trials",
    )


def stage_mine_translate(cfg: PipelineConfig, force: bool = False) -> StageResult:
    if cfg.translate is None:
        raise ArgumentError("config has no [translate] section")
    out = _out(cfg, "pairs-translate.jsonl")
    summary_path = _out(cfg, "translate-summary.json")
    if not force and _is_current(out, cfg):
        return StageResult("mine-translate", [str(out), str(summary_path)], cached=True)
    table = ingest_alignments(
        cfg.translate.alignments,
        lang_filter=frozenset(cfg.translate.languages),
        min_score=cfg.translate.min_score,
        default_lang=cfg.translate.default_lang or None,
    )
    if cfg.translate.balance:
        table = balance_by_language(table)
    pairs, dropped = join_translations(
        table.rows, cfg.translate.translations, premise_side=cfg.translate.premise_side
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    write_pairs_jsonl(out, pairs, header=_provenance(cfg))
    write_summary_json(summary_path, table, pairs, dropped)
    return StageResult(
        "mine-translate",
        [str(out), str(summary_path)],
        cached=False,
        detail=f"{len(pairs)} pairs, {dropped} dropped, {table.skipped} alignments skipped",
    )


def stage_analyze(cfg: PipelineConfig, force: bool = False) -> StageResult:
    stats_path = _out(cfg, "stats.json")
    pmi_path = _out(cfg, "pmi.json")
    report_path = _out(cfg, "report.md")
    outputs = [str(stats_path), str(pmi_path), str(report_path)]
    if not force and _is_current(stats_path, cfg, json_doc=True) and _is_current(
        pmi_path, cfg, json_doc=True
    ):
        return StageResult("analyze", outputs, cached=True)
    pairs_path = _out(cfg, "pairs-sim.jsonl")
    if not _is_current(pairs_path, cfg):
        raise MissingArtifactError(
            "no mined pairs for this config; run `pairmine run mine-sim` first",
            "mine-sim",
        )
    pairs = read_pairs_jsonl(pairs_path)
    labels = predict(cfg.oracle, pairs)
    examples = [
        analyze_mod.LabeledExample(
            premise=p.premise_text, hypothesis=p.hypothesis_text, label=label
        )
        for p, label in zip(pairs, labels)
    ]
    if not examples:
        raise ArgumentError("mined pair file is empty; nothing to analyze")
    stats = analyze_mod.dataset_stats(examples)
    ranking = analyze_mod.pmi(examples)
    top = analyze_mod.top_k_report(ranking, k=3)
    _write_json(stats_path, stats.as_dict(), cfg)
    _write_json(
        pmi_path,
        {
            "smoothing_k": ranking.smoothing_k,
            "vocabulary_size": ranking.vocabulary_size,
            "top": top.as_json(),
        },
        cfg,
    )
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write("# Dataset report\n\n")
        fh.write(f"config hash: `{config_hash(cfg)}`, seed {cfg.seed}\n\n")
        fh.write("## Statistics\n\n```\n")
        fh.write(analyze_mod.render_stats_text(stats))
        fh.write("\n```\n\n## Top PMI words per label\n\n```\n")
        fh.write(top.as_text())
        fh.write("\n```\n")
    return StageResult(
        "analyze", outputs, cached=False, detail=f"{len(examples)} labeled examples"
    )


# --- orchestration -------------------------------------------------------------------


_STAGE_FNS = {
    "ingest": stage_ingest,
    "embed": stage_embed,
    "index": stage_index,
    "tune": stage_tune,
    "mine-sim": stage_mine_sim,
    "mine-translate": stage_mine_translate,
    "analyze": stage_analyze,
}


def run_stage(cfg: PipelineConfig, stage: str, force: bool = False) -> list[StageResult]:
    """Run one stage, or `all` (every applicable stage in dependency
    order, which stops before the interactive serve step)."""
    validate_paths(cfg)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    if stage == "all":
        results = []
        for name in STAGE_ORDER:
            if name == "tune" and cfg.tune is None:
                continue
            if name == "mine-translate" and cfg.translate is None:
                continue
            results.append(_STAGE_FNS[name](cfg, force=force))
        return results
    if stage not in _STAGE_FNS:
        raise ArgumentError(f"unknown stage {stage!r}; expected one of {STAGE_ORDER} or all")
    return [_STAGE_FNS[stage](cfg, force=force)]


def budget_summary(cfg: PipelineConfig, total: float) -> dict:
    plan = preset_plan(total, cfg.service.budget_preset)
    return {
        "preset": cfg.service.budget_preset,
        "total_budget": plan.total_budget,
        "unit_cost": plan.unit_cost,
        "units_per_example": plan.units_per_example,
        "max_examples": plan.max_examples,
    }
