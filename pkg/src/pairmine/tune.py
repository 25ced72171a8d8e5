"""Mining-parameter search driven by an external NLI oracle.

The objective for a parameter setting: mine pairs, ask the oracle for a
label per pair, form the empirical label distribution, and measure its KL
divergence from uniform (in nats). A budgeted black-box optimizer walks
the space of feature weights, retrieval depth K, and selection N.

The oracle is a seam, not a model: predictions can come from a file, an
external command, or a built-in overlap stub that exists only to make
tuning testable offline.
"""

from __future__ import annotations

import hashlib
import json
import math
import shlex
import subprocess
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, OracleError
from .pairgen import CandidatePair, MiningContext, MiningParams, mine_arrays
from .text import token_types

LABELS = ("E", "C", "N")
SMOOTH_EPS = 1e-6
STUB_HIGH = 0.6
STUB_LOW = 0.15

_LABEL_ALIASES = {
    "e": "E",
    "entail": "E",
    "entailment": "E",
    "c": "C",
    "contra": "C",
    "contradiction": "C",
    "n": "N",
    "neutral": "N",
}


def canonical_label(raw: str) -> str:
    label = _LABEL_ALIASES.get(raw.strip().lower())
    if label is None:
        raise OracleError(f"unknown label string {raw!r}")
    return label


@dataclass(frozen=True)
class LabelDistribution:
    p_entail: float
    p_contra: float
    p_neutral: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_entail, self.p_contra, self.p_neutral)


@dataclass(frozen=True)
class OracleBinding:
    kind: str  # predictions_file | external_command | stub_heuristic
    locator: str = ""

    def __post_init__(self):
        if self.kind not in ("predictions_file", "external_command", "stub_heuristic"):
            raise ArgumentError(f"unknown oracle kind {self.kind!r}")
        if self.kind != "stub_heuristic" and not self.locator:
            raise ArgumentError(f"oracle kind {self.kind} needs a locator")


def oracle_fingerprint(oracle: OracleBinding) -> str:
    """Content-sensitive identity for prediction caching: a file-backed
    oracle is fingerprinted by its bytes, a command by its text."""
    h = hashlib.sha256(oracle.kind.encode())
    if oracle.kind == "predictions_file":
        with open(oracle.locator, "rb") as fh:
            h.update(fh.read())
    else:
        h.update(oracle.locator.encode())
    return h.hexdigest()[:16]


def stub_label(premise: str, hypothesis: str) -> str:
    """Overlap-threshold rule: symmetric word-type overlap >= 0.6 reads as
    entailment, <= 0.15 as neutral, anything between as contradiction."""
    p = token_types(premise)
    h = token_types(hypothesis)
    union = p | h
    overlap = len(p & h) / len(union) if union else 1.0
    if overlap >= STUB_HIGH:
        return "E"
    if overlap <= STUB_LOW:
        return "N"
    return "C"


def load_predictions(path) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise OracleError(f"malformed prediction row: {line!r}")
            table[parts[0]] = canonical_label(parts[1])
    return table


def _run_external(command: str, pairs: list[CandidatePair]) -> list[str]:
    payload = "".join(
        json.dumps(
            {
                "pair_id": p.pair_id,
                "premise_text": p.premise_text,
                "hypothesis_text": p.hypothesis_text,
            }
        )
        + "\n"
        for p in pairs
    )
    proc = subprocess.run(
        shlex.split(command),
        input=payload,
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise OracleError(
            f"oracle command failed with status {proc.returncode}: {proc.stderr.strip()}"
        )
    lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
    if len(lines) != len(pairs):
        raise OracleError(f"oracle returned {len(lines)} labels for {len(pairs)} pairs")
    return [canonical_label(ln) for ln in lines]


def predict(oracle: OracleBinding, pairs: list[CandidatePair]) -> list[str]:
    """One label per pair, order-aligned with the input."""
    if oracle.kind == "stub_heuristic":
        return [stub_label(p.premise_text, p.hypothesis_text) for p in pairs]
    if oracle.kind == "predictions_file":
        table = load_predictions(oracle.locator)
        labels = []
        for p in pairs:
            label = table.get(p.pair_id)
            if label is None:
                raise OracleError(f"no prediction for pair_id {p.pair_id}")
            labels.append(label)
        return labels
    return _run_external(oracle.locator, pairs)


def empirical_distribution(labels: list[str]) -> LabelDistribution:
    """Relative frequencies with epsilon-smoothed counts so a degenerate
    label set still yields strictly positive probabilities."""
    if not labels:
        raise ArgumentError("cannot form a distribution from zero labels")
    counts = Counter(labels)
    unknown = set(counts) - set(LABELS)
    if unknown:
        raise ArgumentError(f"unknown labels in input: {sorted(unknown)}")
    total = len(labels) + 3 * SMOOTH_EPS
    return LabelDistribution(
        p_entail=(counts.get("E", 0) + SMOOTH_EPS) / total,
        p_contra=(counts.get("C", 0) + SMOOTH_EPS) / total,
        p_neutral=(counts.get("N", 0) + SMOOTH_EPS) / total,
    )


def kl_uniform(q: LabelDistribution) -> float:
    """KL(uniform || q) in nats."""
    third = 1.0 / 3.0
    return sum(third * math.log(third / qi) for qi in q.as_tuple())


@dataclass
class TuneContext:
    """Prepared mining context plus the oracle seam and its label cache."""

    mining: MiningContext
    oracle: OracleBinding
    subsample: int | None = None
    fingerprint: str = ""
    _cache: dict[tuple[int, int], str] = field(default_factory=dict)
    _file_table: dict[str, str] | None = None

    def __post_init__(self):
        if not self.fingerprint:
            self.fingerprint = oracle_fingerprint(self.oracle)
        if self.subsample is not None and self.subsample < 1:
            raise ArgumentError("subsample must be >= 1")

    def labels_for(self, qids: np.ndarray, hids: np.ndarray) -> list[str]:
        keys = [(int(q), int(h)) for q, h in zip(qids, hids)]
        misses = [k for k in keys if k not in self._cache]
        if misses:
            self._resolve(misses)
        return [self._cache[k] for k in keys]

    def _resolve(self, keys: list[tuple[int, int]]) -> None:
        corpus = self.mining.corpus
        if self.oracle.kind == "stub_heuristic":
            for qid, hid in keys:
                self._cache[(qid, hid)] = stub_label(
                    corpus.sentence(qid).text, corpus.sentence(hid).text
                )
            return
        if self.oracle.kind == "predictions_file":
            if self._file_table is None:
                self._file_table = load_predictions(self.oracle.locator)
            for qid, hid in keys:
                pair_id = self.mining.pair_id(qid, hid)
                label = self._file_table.get(pair_id)
                if label is None:
                    raise OracleError(f"no prediction for pair_id {pair_id}")
                self._cache[(qid, hid)] = label
            return
        pairs = [
            CandidatePair(
                pair_id=self.mining.pair_id(qid, hid),
                premise_id=str(qid),
                hypothesis_id=str(hid),
                premise_text=corpus.sentence(qid).text,
                hypothesis_text=corpus.sentence(hid).text,
                origin="sim",
            )
            for qid, hid in keys
        ]
        for key, label in zip(keys, _run_external(self.oracle.locator, pairs)):
            self._cache[key] = label


def objective(params: MiningParams, ctx: TuneContext) -> float:
    """mine -> predict -> empirical distribution -> KL to uniform.

    An empty selection cannot be scored and returns +inf, which the
    optimizer records as a failed trial rather than an error.
    """
    qids, hids, _, _ = mine_arrays(ctx.mining, params)
    if qids.shape[0] == 0:
        return math.inf
    if ctx.subsample is not None and qids.shape[0] > ctx.subsample:
        qids = qids[: ctx.subsample]
        hids = hids[: ctx.subsample]
    labels = ctx.labels_for(qids, hids)
    return kl_uniform(empirical_distribution(labels))


# --- search space and optimizer ----------------------------------------------

N_WEIGHTS = 8


@dataclass(frozen=True)
class SearchSpace:
    weight_low: float = 0.0
    weight_high: float = 1.0
    k_choices: tuple[int, ...] = tuple(range(50, 1001, 50))
    n_low: float = 1.0
    n_high: float = 50.0

    def __post_init__(self):
        if not self.weight_low < self.weight_high:
            raise ArgumentError("weight bounds must satisfy low < high")
        if not self.n_low < self.n_high:
            raise ArgumentError("N bounds must satisfy low < high")
        if not (0 < self.n_low and self.n_high <= 100):
            raise ArgumentError("N bounds must lie in (0, 100]")
        if not self.k_choices:
            raise ArgumentError("k_choices must be non-empty")
        if any(k < 1 for k in self.k_choices):
            raise ArgumentError("k_choices must be positive")
        if list(self.k_choices) != sorted(set(self.k_choices)):
            raise ArgumentError("k_choices must be strictly increasing")

    def sample(self, rng: np.random.Generator) -> MiningParams:
        weights = tuple(
            float(v) for v in rng.uniform(self.weight_low, self.weight_high, N_WEIGHTS)
        )
        K = int(self.k_choices[int(rng.integers(len(self.k_choices)))])
        N = float(rng.uniform(self.n_low, self.n_high))
        return MiningParams(weights=weights, K=K, N=N)


@dataclass
class TuneResult:
    best_params: MiningParams
    best_objective: float
    trace: list[tuple[MiningParams, float]]


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


N_STARTUP = 10
N_CANDIDATES = 24
TPE_GAMMA = 0.25
_PDF_FLOOR = 1e-12


def _kde_logpdf(x: np.ndarray, centers: np.ndarray, bw: float, low: float, high: float):
    """Log density of a Parzen mixture over `centers` plus one uniform
    pseudo-component over [low, high] that keeps tails strictly positive."""
    n = centers.shape[0]
    diffs = (x[:, None] - centers[None, :]) / bw
    kernel = np.exp(-0.5 * diffs * diffs) / (bw * math.sqrt(2 * math.pi))
    mix = (kernel.sum(axis=1) + 1.0 / (high - low)) / (n + 1)
    return np.log(np.maximum(mix, _PDF_FLOOR))


def _kde_sample(
    rng: np.random.Generator, centers: np.ndarray, bw: float, low: float, high: float, size: int
) -> np.ndarray:
    n = centers.shape[0]
    picks = rng.integers(n + 1, size=size)
    out = np.empty(size)
    for i, pick in enumerate(picks):
        if pick == n:
            out[i] = rng.uniform(low, high)
        else:
            out[i] = centers[pick] + bw * rng.standard_normal()
    return np.clip(out, low, high)


def _bandwidth(low: float, high: float, n: int) -> float:
    return max((high - low) / max(n, 1) ** 0.5, (high - low) * 0.05)


def _categorical_logp(values: list[int], choices: tuple[int, ...]) -> np.ndarray:
    counts = Counter(values)
    probs = np.array(
        [(counts.get(c, 0) + 1.0) / (len(values) + len(choices)) for c in choices]
    )
    return np.log(probs)


def _tpe_propose(
    rng: np.random.Generator, space: SearchSpace, history: list[tuple[MiningParams, float]]
) -> MiningParams:
    finite = [(p, o) for p, o in history if math.isfinite(o)]
    if len(finite) < 2:
        return space.sample(rng)
    ranked = sorted(range(len(finite)), key=lambda i: (finite[i][1], i))
    n_below = max(1, math.ceil(TPE_GAMMA * len(finite)))
    below = [finite[i][0] for i in ranked[:n_below]]
    above = [finite[i][0] for i in ranked[n_below:]] or below

    dims: list[np.ndarray] = []  # candidate values per dimension
    logl = np.zeros(N_CANDIDATES)
    for d in range(N_WEIGHTS):
        lo, hi = space.weight_low, space.weight_high
        b_centers = np.array([p.weights[d] for p in below])
        a_centers = np.array([p.weights[d] for p in above])
        bw_b = _bandwidth(lo, hi, len(b_centers))
        bw_a = _bandwidth(lo, hi, len(a_centers))
        cand = _kde_sample(rng, b_centers, bw_b, lo, hi, N_CANDIDATES)
        logl += _kde_logpdf(cand, b_centers, bw_b, lo, hi)
        logl -= _kde_logpdf(cand, a_centers, bw_a, lo, hi)
        dims.append(cand)

    k_logp_b = _categorical_logp([p.K for p in below], space.k_choices)
    k_logp_a = _categorical_logp([p.K for p in above], space.k_choices)
    k_idx = rng.choice(len(space.k_choices), size=N_CANDIDATES, p=np.exp(k_logp_b))
    logl += k_logp_b[k_idx] - k_logp_a[k_idx]

    lo, hi = space.n_low, space.n_high
    b_centers = np.array([p.N for p in below])
    a_centers = np.array([p.N for p in above])
    bw_b = _bandwidth(lo, hi, len(b_centers))
    bw_a = _bandwidth(lo, hi, len(a_centers))
    n_cand = _kde_sample(rng, b_centers, bw_b, lo, hi, N_CANDIDATES)
    logl += _kde_logpdf(n_cand, b_centers, bw_b, lo, hi)
    logl -= _kde_logpdf(n_cand, a_centers, bw_a, lo, hi)

    best = int(np.argmax(logl))
    return MiningParams(
        weights=tuple(float(dims[d][best]) for d in range(N_WEIGHTS)),
        K=int(space.k_choices[int(k_idx[best])]),
        N=float(n_cand[best]),
    )


def optimize(
    eval_fn,
    space: SearchSpace,
    budget: int,
    seed: int,
    strategy: str = "tpe_like",
) -> TuneResult:
    """Budgeted minimization of eval_fn over the search space.

    `random` draws every trial independently; `tpe_like` models the top
    quantile of finished trials against the rest with per-dimension kernel
    densities and proposes the candidate maximizing their density ratio.
    Trial t draws from a generator keyed by (seed, t), so a longer budget
    extends rather than reshuffles the trial stream.
    """
    if budget < 1:
        raise ArgumentError("budget must be >= 1")
    if strategy not in ("random", "tpe_like"):
        raise ArgumentError(f"unknown strategy {strategy!r}")
    trace: list[tuple[MiningParams, float]] = []
    best_params: MiningParams | None = None
    best_objective = math.inf
    for trial in range(budget):
        rng = _trial_rng(seed, trial)
        if strategy == "random" or trial < N_STARTUP:
            params = space.sample(rng)
        else:
            params = _tpe_propose(rng, space, trace)
        value = float(eval_fn(params))
        trace.append((params, value))
        if value < best_objective or best_params is None:
            best_params = params
            best_objective = value
    return TuneResult(best_params=best_params, best_objective=best_objective, trace=trace)


def write_report(path, result: TuneResult, header: dict | None = None) -> None:
    def entry(i: int, params: MiningParams, value: float) -> dict:
        row = {"trial": i, "params": params.to_dict()}
        if math.isfinite(value):
            row["objective"] = value
        else:
            row["objective"] = None
            row["failed"] = True
        return row

    payload = {
        "best_params": result.best_params.to_dict(),
        "best_objective": result.best_objective
        if math.isfinite(result.best_objective)
        else None,
        "objective_unit": "nats",
        "trace": [entry(i, p, v) for i, (p, v) in enumerate(result.trace)],
    }
    if header is not None:
        payload["_provenance"] = header
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
