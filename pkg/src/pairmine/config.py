"""Declarative pipeline configuration.

One TOML file drives every stage. Parsing produces typed sections with
defaults filled in; the config hash is computed over the parsed values
(sorted-key JSON), so formatting and comments never change identity.
A config carries exactly one mining branch: fixed parameters, or a tune
search space whose winner later stages consume.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ArgumentError
from .corpus import PROFILES
from .pairgen import FEATURE_NAMES, MiningParams
from .tune import OracleBinding, SearchSpace
from .xlpairs import DEFAULT_LANGS, DEFAULT_MIN_SCORE


@dataclass(frozen=True)
class CorpusConfig:
    documents: str
    profile: str = "generic"


@dataclass(frozen=True)
class VectorsConfig:
    path: str
    unit_norm: bool = True


@dataclass(frozen=True)
class IndexConfig:
    d_out: int = 64
    nprobe: int = 16
    cluster_count: int = 0  # 0 = size rule
    per_month_seed_cap: int = 100


@dataclass(frozen=True)
class MiningConfig:
    n_queries: int = 100
    k_cap: int = 1000
    params: MiningParams | None = None


@dataclass(frozen=True)
class TuneConfig:
    space: SearchSpace
    budget: int = 100
    strategy: str = "tpe_like"
    subsample: int = 0  # 0 = score the full selection


@dataclass(frozen=True)
class TranslateConfig:
    alignments: str
    translations: str
    min_score: float = DEFAULT_MIN_SCORE
    languages: tuple[str, ...] = tuple(sorted(DEFAULT_LANGS))
    default_lang: str = ""
    premise_side: str = "translated"
    balance: bool = False


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8411
    lease_seconds: int = 1800
    budget_preset: str = "label_round1"
    admin_token: str = ""
    ui_dir: str = ""


@dataclass(frozen=True)
class PipelineConfig:
    corpus: CorpusConfig
    vectors: VectorsConfig
    index: IndexConfig
    mining: MiningConfig
    oracle: OracleBinding
    output_dir: str
    seed: int
    tune: TuneConfig | None = None
    translate: TranslateConfig | None = None
    service: ServiceConfig = field(default_factory=ServiceConfig)


def _require(table: dict, key: str, section: str):
    if key not in table:
        raise ArgumentError(f"config section [{section}] is missing {key!r}")
    return table[key]


def _known_keys(table: dict, allowed: set[str], section: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ArgumentError(
            f"unknown keys in [{section}]: {sorted(unknown)} (allowed: {sorted(allowed)})"
        )


def parse_config(path) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ArgumentError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ArgumentError(f"config parse error in {path}: {exc}")
    return _build(raw, config_dir=Path(path).resolve().parent)


def _resolve(base: Path, value: str) -> str:
    p = Path(value)
    return str(p if p.is_absolute() else base / p)


def _build(raw: dict, config_dir: Path) -> PipelineConfig:
    _known_keys(
        raw,
        {"corpus", "vectors", "index", "mining", "tune", "oracle", "translate",
         "service", "output", "run"},
        "top level",
    )

    corpus_t = raw.get("corpus", {})
    _known_keys(corpus_t, {"documents", "profile"}, "corpus")
    profile = corpus_t.get("profile", "generic")
    if profile not in PROFILES:
        raise ArgumentError(f"corpus.profile must be one of {PROFILES}")
    corpus = CorpusConfig(
        documents=_resolve(config_dir, str(_require(corpus_t, "documents", "corpus"))),
        profile=profile,
    )

    vectors_t = raw.get("vectors", {})
    _known_keys(vectors_t, {"path", "unit_norm"}, "vectors")
    vectors = VectorsConfig(
        path=_resolve(config_dir, str(_require(vectors_t, "path", "vectors"))),
        unit_norm=bool(vectors_t.get("unit_norm", True)),
    )

    index_t = raw.get("index", {})
    _known_keys(index_t, {"d_out", "nprobe", "cluster_count", "per_month_seed_cap"}, "index")
    index = IndexConfig(
        d_out=int(index_t.get("d_out", 64)),
        nprobe=int(index_t.get("nprobe", 16)),
        cluster_count=int(index_t.get("cluster_count", 0)),
        per_month_seed_cap=int(index_t.get("per_month_seed_cap", 100)),
    )
    if index.d_out < 1 or index.nprobe < 1 or index.cluster_count < 0:
        raise ArgumentError("index settings must be positive (cluster_count may be 0)")

    mining_t = dict(raw.get("mining", {}))
    _known_keys(mining_t, {"n_queries", "k_cap", "params"}, "mining")
    params_t = mining_t.get("params")
    params = None
    if params_t is not None:
        _known_keys(params_t, {"weights", "K", "N"}, "mining.params")
        weights = tuple(float(w) for w in _require(params_t, "weights", "mining.params"))
        if len(weights) != len(FEATURE_NAMES):
            raise ArgumentError(
                f"mining.params.weights needs {len(FEATURE_NAMES)} entries"
            )
        params = MiningParams(
            weights=weights,
            K=int(_require(params_t, "K", "mining.params")),
            N=float(_require(params_t, "N", "mining.params")),
        )
    mining = MiningConfig(
        n_queries=int(mining_t.get("n_queries", 100)),
        k_cap=int(mining_t.get("k_cap", 1000)),
        params=params,
    )
    if mining.n_queries < 1 or mining.k_cap < 1:
        raise ArgumentError("mining.n_queries and mining.k_cap must be >= 1")

    tune = None
    if "tune" in raw:
        tune_t = dict(raw["tune"])
        _known_keys(tune_t, {"budget", "strategy", "subsample", "space"}, "tune")
        space_t = tune_t.get("space", {})
        _known_keys(
            space_t,
            {"weight_low", "weight_high", "k_min", "k_max", "k_step", "n_low", "n_high"},
            "tune.space",
        )
        k_min = int(space_t.get("k_min", 50))
        k_max = int(space_t.get("k_max", 1000))
        k_step = int(space_t.get("k_step", 50))
        if k_step < 1 or k_min > k_max:
            raise ArgumentError("tune.space k bounds are malformed")
        space = SearchSpace(
            weight_low=float(space_t.get("weight_low", 0.0)),
            weight_high=float(space_t.get("weight_high", 1.0)),
            k_choices=tuple(range(k_min, k_max + 1, k_step)),
            n_low=float(space_t.get("n_low", 1.0)),
            n_high=float(space_t.get("n_high", 50.0)),
        )
        tune = TuneConfig(
            space=space,
            budget=int(tune_t.get("budget", 100)),
            strategy=str(tune_t.get("strategy", "tpe_like")),
            subsample=int(tune_t.get("subsample", 0)),
        )
        if tune.budget < 1:
            raise ArgumentError("tune.budget must be >= 1")
        if tune.strategy not in ("random", "tpe_like"):
            raise ArgumentError("tune.strategy must be random or tpe_like")

    if (mining.params is None) == (tune is None):
        raise ArgumentError(
            "config needs exactly one of [mining.params] (fixed) or [tune] (search)"
        )

    oracle_t = raw.get("oracle", {"kind": "stub_heuristic"})
    _known_keys(oracle_t, {"kind", "locator"}, "oracle")
    kind = str(oracle_t.get("kind", "stub_heuristic"))
    locator = str(oracle_t.get("locator", ""))
    if kind == "predictions_file" and locator:
        locator = _resolve(config_dir, locator)
    oracle = OracleBinding(kind=kind, locator=locator)

    translate = None
    if "translate" in raw:
        tr = raw["translate"]
        _known_keys(
            tr,
            {"alignments", "translations", "min_score", "languages", "default_lang",
             "premise_side", "balance"},
            "translate",
        )
        translate = TranslateConfig(
            alignments=_resolve(config_dir, str(_require(tr, "alignments", "translate"))),
            translations=_resolve(config_dir, str(_require(tr, "translations", "translate"))),
            min_score=float(tr.get("min_score", DEFAULT_MIN_SCORE)),
            languages=tuple(sorted(str(v) for v in tr.get("languages", sorted(DEFAULT_LANGS)))),
            default_lang=str(tr.get("default_lang", "")),
            premise_side=str(tr.get("premise_side", "translated")),
            balance=bool(tr.get("balance", False)),
        )
        if translate.premise_side not in ("translated", "original"):
            raise ArgumentError("translate.premise_side must be translated or original")

    service_t = raw.get("service", {})
    _known_keys(
        service_t,
        {"port", "lease_seconds", "budget_preset", "admin_token", "ui_dir"},
        "service",
    )
    service = ServiceConfig(
        port=int(service_t.get("port", 8411)),
        lease_seconds=int(service_t.get("lease_seconds", 1800)),
        budget_preset=str(service_t.get("budget_preset", "label_round1")),
        admin_token=str(service_t.get("admin_token", "")),
        ui_dir=str(service_t.get("ui_dir", "")),
    )

    output_t = raw.get("output", {})
    _known_keys(output_t, {"dir"}, "output")
    output_dir = _resolve(config_dir, str(output_t.get("dir", "out")))

    run_t = raw.get("run", {})
    _known_keys(run_t, {"seed"}, "run")
    seed = int(run_t.get("seed", 0))
    if seed < 0:
        raise ArgumentError("run.seed must be non-negative")

    return PipelineConfig(
        corpus=corpus,
        vectors=vectors,
        index=index,
        mining=mining,
        oracle=oracle,
        output_dir=output_dir,
        seed=seed,
        tune=tune,
        translate=translate,
        service=service,
    )


def validate_paths(cfg: PipelineConfig) -> None:
    """Check that every referenced input exists, before any stage runs."""
    missing = [p for p in _input_paths(cfg) if not Path(p).exists()]
    if missing:
        raise ArgumentError(f"config references missing paths: {missing}")


def _input_paths(cfg: PipelineConfig) -> list[str]:
    paths = [cfg.corpus.documents, cfg.vectors.path]
    if cfg.oracle.kind == "predictions_file":
        paths.append(cfg.oracle.locator)
    if cfg.translate is not None:
        paths.extend([cfg.translate.alignments, cfg.translate.translations])
    return paths


def config_hash(cfg: PipelineConfig) -> str:
    """Identity of the parsed config: sha256 over sorted-key JSON of the
    values, truncated to 16 hex digits."""
    blob = json.dumps(asdict(cfg), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def derive_seed(seed: int, *labels) -> int:
    """Stable per-stage sub-seed: hash of the global seed and a label path."""
    h = hashlib.sha256()
    h.update(str(seed).encode())
    for label in labels:
        h.update(b"\x00")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:4], "big")
