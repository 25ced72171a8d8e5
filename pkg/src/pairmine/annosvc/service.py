"""Event-sourced annotation service core.

Every mutation appends one event to a JSONL log and applies it to the
in-memory state through the same dispatcher that replay uses, so loading
the log reconstructs the exact service state at any point. Three task
kinds flow through: write (a premise, answered with three hypotheses, one
per relation), label (a pair, answered with one label), and validate (a
labeled pair, answered by four further workers; the payload's initial
label plus those four votes make the five-vote gold pool).
"""

from __future__ import annotations

import hashlib
import json
import random
import secrets
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

from ..errors import (
    ArgumentError,
    ConflictError,
    MissingArtifactError,
    PreconditionError,
)
from ..pairgen import CandidatePair, ORIGIN_WRITTEN, normalized_text

TASK_KINDS = ("write", "label", "validate")
VOTE_LABELS = ("E", "C", "N", "IDU")
GOLD_ELIGIBLE = ("E", "C", "N")
VOTES_FOR_GOLD = 5
GOLD_MAJORITY = 3
DEFAULT_LEASE_SECONDS = 30 * 60
WRITE_FIELDS = ("entail_text", "contra_text", "neutral_text")
_WRITE_LABELS = ("E", "C", "N")


# --- pure aggregation and splitting ------------------------------------------


@dataclass(frozen=True)
class GoldResult:
    pair_id: str
    votes: tuple[str, ...]
    gold: str | None


def gold_from_votes(pair_id: str, votes: Iterable[str]) -> GoldResult:
    """Majority gold over exactly five votes. A label needs at least three
    of the five; IDU fills vote slots but can never be the gold label."""
    votes = tuple(votes)
    if len(votes) != VOTES_FOR_GOLD:
        raise PreconditionError(
            f"pair {pair_id} has {len(votes)} votes, need exactly {VOTES_FOR_GOLD}"
        )
    unknown = set(votes) - set(VOTE_LABELS)
    if unknown:
        raise ArgumentError(f"unknown vote labels: {sorted(unknown)}")
    counts = Counter(v for v in votes if v in GOLD_ELIGIBLE)
    gold = None
    for label in GOLD_ELIGIBLE:
        if counts.get(label, 0) >= GOLD_MAJORITY:
            gold = label
            break
    return GoldResult(pair_id=pair_id, votes=tuple(sorted(votes)), gold=gold)


@dataclass(frozen=True)
class AgreementStats:
    pct_individual_eq_gold: float | None
    pct_no_gold: float


def agreement_stats(results: list[GoldResult]) -> AgreementStats:
    """Table-2-style agreement: the share of items with no gold label, and
    among golded items the share of individual votes that equal the gold
    (IDU votes count as non-matching)."""
    if not results:
        raise ArgumentError("agreement needs at least one aggregated item")
    no_gold = sum(1 for r in results if r.gold is None)
    golded = [r for r in results if r.gold is not None]
    pct_no_gold = 100.0 * no_gold / len(results)
    if not golded:
        return AgreementStats(pct_individual_eq_gold=None, pct_no_gold=pct_no_gold)
    matching = sum(sum(1 for v in r.votes if v == r.gold) for r in golded)
    pct_eq = 100.0 * matching / (VOTES_FOR_GOLD * len(golded))
    return AgreementStats(pct_individual_eq_gold=pct_eq, pct_no_gold=pct_no_gold)


def split(ids: list[str], test_n: int, seed: int) -> tuple[list[str], list[str]]:
    """Deterministic train/test partition: test_n ids drawn without
    replacement from the sorted id list, the rest are train."""
    if test_n < 0:
        raise ArgumentError("test_n must be non-negative")
    if test_n > len(ids):
        raise ArgumentError(f"test_n={test_n} exceeds dataset size {len(ids)}")
    pool = sorted(ids)
    if len(set(pool)) != len(pool):
        raise ArgumentError("dataset ids must be unique")
    test = set(random.Random(seed).sample(pool, test_n))
    train = [i for i in pool if i not in test]
    return train, sorted(test)


# --- service state ------------------------------------------------------------


@dataclass
class Task:
    task_id: str
    kind: str
    payload: dict
    batch_id: str
    votes_needed: int
    status: str = "open"  # open | assigned | done
    assigned_to: str | None = None
    lease_expires: float | None = None

    def pair_id(self) -> str | None:
        return self.payload.get("pair_id")


@dataclass
class Worker:
    worker_id: str
    token: str
    metadata: dict = field(default_factory=dict)


@dataclass
class Batch:
    batch_id: str
    kind: str
    fingerprint: str
    task_ids: list[str] = field(default_factory=list)


@dataclass
class AnnotationRecord:
    record_id: str
    task_id: str
    worker_id: str
    response: dict
    timestamp: float


@dataclass
class Dataset:
    dataset_id: str
    examples: list[dict]  # {pair_id, premise, hypothesis, label, split}
    gold_results: list[GoldResult]


def _batch_fingerprint(kind: str, items: list[dict]) -> str:
    blob = json.dumps({"kind": kind, "items": items}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24]


class AnnotationService:
    """In-memory state plus an append-only event log.

    All mutations funnel through _record(), which appends the event and
    applies it under one lock; replay applies the same events in order.
    The clock and token maker are injectable for tests.
    """

    def __init__(
        self,
        log_path=None,
        clock: Callable[[], float] = time.time,
        token_maker: Callable[[], str] = lambda: secrets.token_hex(16),
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
    ):
        self._log_path = log_path
        self._clock = clock
        self._token_maker = token_maker
        self.lease_seconds = lease_seconds
        self._lock = threading.RLock()
        self._log_fh = None

        self.workers: dict[str, Worker] = {}
        self.tokens: dict[str, str] = {}  # token -> worker_id
        self.batches: dict[str, Batch] = {}
        self.tasks: dict[str, Task] = {}
        self.records: list[AnnotationRecord] = []
        self.datasets: dict[str, Dataset] = {}
        self.written_pairs: list[CandidatePair] = []
        self._fingerprints: dict[str, str] = {}  # batch fingerprint -> batch_id
        self._answered: set[tuple[str, str]] = set()  # (task_id, worker_id)
        self._voted_pairs: set[tuple[str, str]] = set()  # (worker_id, pair_id)
        self._task_order: list[str] = []
        self._counters = {"worker": 0, "batch": 0, "task": 0, "record": 0}
        self._idempotency: dict[str, dict] = {}

        if log_path is not None:
            self._open_log()

    # --- event plumbing --------------------------------------------------

    def _open_log(self):
        try:
            with open(self._log_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))
        except FileNotFoundError:
            pass
        self._log_fh = open(self._log_path, "a", encoding="utf-8")

    def close(self):
        with self._lock:
            if self._log_fh is not None:
                self._log_fh.close()
                self._log_fh = None

    def _record(self, event: dict) -> None:
        event["ts"] = self._clock()
        if self._log_fh is not None:
            self._log_fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._log_fh.flush()
        self._apply(event)

    def _next_id(self, kind: str, prefix: str) -> str:
        # peek only; the counter advances when the event is applied
        return f"{prefix}{self._counters[kind] + 1:06d}"

    def _apply(self, event: dict) -> None:
        handler = getattr(self, f"_apply_{event['event']}")
        handler(event)

    # --- workers ----------------------------------------------------------

    def register_worker(self, metadata: dict | None = None) -> Worker:
        with self._lock:
            worker_id = self._next_id("worker", "w")
            token = self._token_maker()
            self._record(
                {
                    "event": "worker",
                    "worker_id": worker_id,
                    "token": token,
                    "metadata": metadata or {},
                }
            )
            return self.workers[worker_id]

    def _apply_worker(self, ev: dict) -> None:
        worker = Worker(ev["worker_id"], ev["token"], ev.get("metadata", {}))
        self.workers[worker.worker_id] = worker
        self.tokens[worker.token] = worker.worker_id
        self._counters["worker"] += 1

    def worker_by_token(self, token: str) -> Worker | None:
        worker_id = self.tokens.get(token)
        return self.workers.get(worker_id) if worker_id else None

    # --- batches ----------------------------------------------------------

    def import_batch(self, items: list[dict], kind: str) -> tuple[str, int]:
        """Create one open task per item; returns (batch_id, new task count).
        Re-importing a byte-identical batch is a no-op returning the
        original batch_id."""
        if kind not in TASK_KINDS:
            raise ArgumentError(f"unknown task kind {kind!r}")
        if not items:
            raise ArgumentError("batch must contain at least one item")
        items = [dict(item) for item in items]
        for item in items:
            self._check_item(item, kind)
        ids = [item["pair_id"] for item in items] if kind != "write" else [
            item["premise_id"] for item in items
        ]
        dupes = [i for i, c in Counter(ids).items() if c > 1]
        if dupes:
            raise ArgumentError(f"duplicate ids within batch: {sorted(dupes)[:5]}")
        fingerprint = _batch_fingerprint(kind, items)
        with self._lock:
            existing = self._fingerprints.get(fingerprint)
            if existing is not None:
                return existing, 0
            batch_id = self._next_id("batch", "b")
            self._record(
                {
                    "event": "batch",
                    "batch_id": batch_id,
                    "kind": kind,
                    "fingerprint": fingerprint,
                    "items": items,
                }
            )
            return batch_id, len(items)

    @staticmethod
    def _check_item(item: dict, kind: str) -> None:
        if kind == "write":
            if not item.get("premise_id") or not str(item.get("premise_text", "")).strip():
                raise ArgumentError("write items need premise_id and premise_text")
            return
        for key in ("pair_id", "premise_text", "hypothesis_text"):
            if not str(item.get(key, "")).strip():
                raise ArgumentError(f"{kind} items need {key}")
        if kind == "validate" and item.get("label") not in GOLD_ELIGIBLE:
            raise ArgumentError(
                f"validate item {item.get('pair_id')} lacks an initial label"
            )

    def _apply_batch(self, ev: dict) -> None:
        kind = ev["kind"]
        batch = Batch(ev["batch_id"], kind, ev["fingerprint"])
        self.batches[batch.batch_id] = batch
        self._fingerprints[batch.fingerprint] = batch.batch_id
        self._counters["batch"] += 1
        votes_needed = VOTES_FOR_GOLD - 1 if kind == "validate" else 1
        for item in ev["items"]:
            task_id = f"t{self._counters['task'] + 1:06d}"
            self._counters["task"] += 1
            task = Task(
                task_id=task_id,
                kind=kind,
                payload=item,
                batch_id=batch.batch_id,
                votes_needed=votes_needed,
            )
            self.tasks[task_id] = task
            self._task_order.append(task_id)
            batch.task_ids.append(task_id)

    # --- assignment ---------------------------------------------------------

    def _expire_lease(self, task: Task, now: float) -> None:
        if task.status == "assigned" and task.lease_expires is not None:
            if now >= task.lease_expires:
                task.status = "open"
                task.assigned_to = None
                task.lease_expires = None

    def next_task(self, worker_id: str, batch_id: str) -> Task | None:
        """Assign the earliest open task in the batch that this worker can
        still answer; None when the batch holds nothing for them."""
        with self._lock:
            if worker_id not in self.workers:
                raise MissingArtifactError(f"unknown worker {worker_id}", "worker")
            batch = self.batches.get(batch_id)
            if batch is None:
                raise MissingArtifactError(f"unknown batch {batch_id}", "batch")
            now = self._clock()
            for task_id in batch.task_ids:
                task = self.tasks[task_id]
                self._expire_lease(task, now)
                if task.status != "open":
                    continue
                if (task_id, worker_id) in self._answered:
                    continue
                pair_id = task.pair_id()
                if pair_id is not None and (worker_id, pair_id) in self._voted_pairs:
                    continue
                self._record(
                    {
                        "event": "assign",
                        "task_id": task_id,
                        "worker_id": worker_id,
                        "expires": now + self.lease_seconds,
                    }
                )
                return task
            return None

    def _apply_assign(self, ev: dict) -> None:
        task = self.tasks[ev["task_id"]]
        task.status = "assigned"
        task.assigned_to = ev["worker_id"]
        task.lease_expires = ev["expires"]

    # --- submission -----------------------------------------------------------

    def submit(
        self,
        worker_id: str,
        task_id: str,
        response: dict,
        idempotency_key: str | None = None,
    ) -> dict:
        """Record one response. A repeated idempotency_key returns the
        original acknowledgment; a repeat without one is a conflict."""
        with self._lock:
            if idempotency_key is not None and idempotency_key in self._idempotency:
                return dict(self._idempotency[idempotency_key])
            task = self.tasks.get(task_id)
            if task is None:
                raise MissingArtifactError(f"unknown task {task_id}", "task")
            if (task_id, worker_id) in self._answered:
                raise ConflictError(f"worker {worker_id} already answered {task_id}")
            now = self._clock()
            self._expire_lease(task, now)
            if task.status != "assigned" or task.assigned_to != worker_id:
                raise PreconditionError(
                    f"task {task_id} is not assigned to worker {worker_id}"
                )
            clean = self._check_response(task, response)
            record_id = self._next_id("record", "r")
            self._record(
                {
                    "event": "response",
                    "record_id": record_id,
                    "task_id": task_id,
                    "worker_id": worker_id,
                    "response": clean,
                    "idempotency_key": idempotency_key,
                }
            )
            ack = {"record_id": record_id, "task_id": task_id, "status": task.status}
            if idempotency_key is not None:
                self._idempotency[idempotency_key] = dict(ack)
            return ack

    @staticmethod
    def _check_response(task: Task, response: dict) -> dict:
        if task.kind in ("label", "validate"):
            label = response.get("label")
            if label not in VOTE_LABELS:
                raise ArgumentError(f"label must be one of {VOTE_LABELS}")
            return {"label": label}
        texts = {}
        premise_norm = normalized_text(task.payload["premise_text"])
        for key in WRITE_FIELDS:
            text = str(response.get(key, "")).strip()
            if not text:
                raise ArgumentError(f"write response field {key} must be non-empty")
            if normalized_text(text) == premise_norm:
                raise ArgumentError(f"write response field {key} repeats the premise")
            texts[key] = text
        return texts

    def _apply_response(self, ev: dict) -> None:
        task = self.tasks[ev["task_id"]]
        record = AnnotationRecord(
            record_id=ev["record_id"],
            task_id=ev["task_id"],
            worker_id=ev["worker_id"],
            response=ev["response"],
            timestamp=ev.get("ts", 0.0),
        )
        self.records.append(record)
        self._counters["record"] += 1
        self._answered.add((record.task_id, record.worker_id))
        pair_id = task.pair_id()
        if pair_id is not None:
            self._voted_pairs.add((record.worker_id, pair_id))
        key = ev.get("idempotency_key")

        responses = sum(1 for r in self.records if r.task_id == task.task_id)
        if responses >= task.votes_needed:
            task.status = "done"
        else:
            task.status = "open"
        task.assigned_to = None
        task.lease_expires = None

        if task.kind == "write":
            premise_id = task.payload["premise_id"]
            premise = task.payload["premise_text"]
            for label, field_name in zip(_WRITE_LABELS, WRITE_FIELDS):
                self.written_pairs.append(
                    CandidatePair(
                        pair_id=f"wr-{task.task_id}-{label.lower()}",
                        premise_id=str(premise_id),
                        hypothesis_id=f"{record.record_id}-{label.lower()}",
                        premise_text=premise,
                        hypothesis_text=record.response[field_name],
                        origin=ORIGIN_WRITTEN,
                        label=label,
                    )
                )
        if key is not None and key not in self._idempotency:
            self._idempotency[key] = {
                "record_id": record.record_id,
                "task_id": task.task_id,
                "status": task.status,
            }

    # --- aggregation ------------------------------------------------------------

    def votes_for_pair(self, pair_id: str) -> list[str]:
        """All votes targeting a pair.

        A validate task owns the pair's whole vote pool: its payload's
        initial label (the labeling-round vote, carried forward at import)
        plus its collected responses. Label-task responses count only for
        pairs that never entered validation, since re-importing a labeled
        pair for validation transcribes that same vote into the payload.
        """
        validate_votes: list[str] = []
        label_votes: list[str] = []
        has_validate = False
        for task_id in self._task_order:
            task = self.tasks[task_id]
            if task.pair_id() != pair_id:
                continue
            task_votes = [
                r.response["label"] for r in self.records if r.task_id == task_id
            ]
            if task.kind == "validate":
                has_validate = True
                validate_votes.append(task.payload["label"])
                validate_votes.extend(task_votes)
            else:
                label_votes.extend(task_votes)
        return validate_votes if has_validate else label_votes

    def aggregate_gold(self, pair_id: str) -> GoldResult:
        votes = self.votes_for_pair(pair_id)
        return gold_from_votes(pair_id, votes)

    def provisional_label(self, pair_id: str) -> str | None:
        votes = self.votes_for_pair(pair_id)
        if len(votes) == 1 and votes[0] in GOLD_ELIGIBLE:
            return votes[0]
        return None

    # --- datasets ----------------------------------------------------------------

    def create_dataset(
        self, dataset_id: str, batch_ids: list[str], test_n: int, seed: int
    ) -> Dataset:
        """Materialize a labeled dataset from finished batches.

        Validate batches contribute five-vote gold pairs (no-gold pairs are
        kept in the aggregation record but excluded from examples); label
        batches contribute single-vote provisional labels; write batches
        contribute their written pairs with designated labels.
        """
        with self._lock:
            if dataset_id in self.datasets:
                raise ConflictError(f"dataset {dataset_id} already exists")
            if not batch_ids:
                raise ArgumentError("dataset needs at least one batch")
            for batch_id in batch_ids:
                if batch_id not in self.batches:
                    raise MissingArtifactError(f"unknown batch {batch_id}", "batch")
            self._record(
                {
                    "event": "dataset",
                    "dataset_id": dataset_id,
                    "batch_ids": list(batch_ids),
                    "test_n": test_n,
                    "seed": seed,
                }
            )
            return self.datasets[dataset_id]

    def _apply_dataset(self, ev: dict) -> None:
        examples: list[dict] = []
        gold_results: list[GoldResult] = []
        for batch_id in ev["batch_ids"]:
            batch = self.batches[batch_id]
            if batch.kind == "write":
                write_tasks = set(batch.task_ids)
                for pair in self.written_pairs:
                    task_ref = pair.pair_id.split("-")[1]
                    if task_ref in write_tasks:
                        examples.append(
                            {
                                "pair_id": pair.pair_id,
                                "premise": pair.premise_text,
                                "hypothesis": pair.hypothesis_text,
                                "label": pair.label,
                            }
                        )
                continue
            for task_id in batch.task_ids:
                task = self.tasks[task_id]
                pair_id = task.pair_id()
                if batch.kind == "validate":
                    result = self.aggregate_gold(pair_id)
                    gold_results.append(result)
                    label = result.gold
                else:
                    label = self.provisional_label(pair_id)
                if label is None:
                    continue
                examples.append(
                    {
                        "pair_id": pair_id,
                        "premise": task.payload["premise_text"],
                        "hypothesis": task.payload["hypothesis_text"],
                        "label": label,
                    }
                )
        ids = [ex["pair_id"] for ex in examples]
        _, test_ids = split(ids, min(ev["test_n"], len(ids)), ev["seed"])
        test_set = set(test_ids)
        for ex in examples:
            ex["split"] = "test" if ex["pair_id"] in test_set else "train"
        examples.sort(key=lambda ex: ex["pair_id"])
        self.datasets[ev["dataset_id"]] = Dataset(
            dataset_id=ev["dataset_id"], examples=examples, gold_results=gold_results
        )

    def export_dataset(self, dataset_id: str) -> list[dict]:
        dataset = self.datasets.get(dataset_id)
        if dataset is None:
            raise MissingArtifactError(f"unknown dataset {dataset_id}", "dataset")
        return [dict(ex) for ex in dataset.examples]

    def dataset_agreement(self, dataset_id: str) -> AgreementStats:
        dataset = self.datasets.get(dataset_id)
        if dataset is None:
            raise MissingArtifactError(f"unknown dataset {dataset_id}", "dataset")
        if not dataset.gold_results:
            raise ArgumentError(f"dataset {dataset_id} has no aggregated items")
        return agreement_stats(dataset.gold_results)

    # --- progress -------------------------------------------------------------------

    def progress(self, batch_id: str) -> dict:
        with self._lock:
            batch = self.batches.get(batch_id)
            if batch is None:
                raise MissingArtifactError(f"unknown batch {batch_id}", "batch")
            now = self._clock()
            counts = Counter()
            for task_id in batch.task_ids:
                task = self.tasks[task_id]
                self._expire_lease(task, now)
                counts[task.status] += 1
            records = sum(
                1 for r in self.records if self.tasks[r.task_id].batch_id == batch_id
            )
            return {
                "batch_id": batch_id,
                "kind": batch.kind,
                "total": len(batch.task_ids),
                "open": counts.get("open", 0),
                "assigned": counts.get("assigned", 0),
                "done": counts.get("done", 0),
                "records": records,
            }
