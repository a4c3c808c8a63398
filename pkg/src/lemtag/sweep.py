"""Hyperparameter grid execution with repeated seeded runs, an append-only
resumable run log, and rank-sum model selection over the dev metrics."""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

from scipy.stats import rankdata

from .errors import ConfigError, LemtagError
from .evaluation import classify_tokens, score
from .preprocess import SplitSet
from .tagger import TrainConfig, gold_column, predict_document, save_model
from .tagger import train as train_task

CEMB_SIZES = (100, 150, 200, 300)
CEMB_LAYERS = (1, 2)
HIDDEN_SIZES = (150, 200, 250, 300, 350)
LEMMA_EXTRA_HIDDEN = 170
MIN_RUNS_PER_CONFIG = 5

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")

#: Best parameters found after the full sweep, per task.
BEST_CONFIGS: dict[str, TrainConfig] = {
    "LEMMA": TrainConfig("LEMMA", cemb_layers=2, cemb_size=300, hidden_size=150,
                         target_metric="precision"),
    "POS": TrainConfig("POS", cemb_layers=2, cemb_size=200, hidden_size=350),
    "CAS": TrainConfig("CAS", cemb_layers=2, cemb_size=150, hidden_size=150),
    "DEGRE": TrainConfig("DEGRE", cemb_layers=2, cemb_size=200, hidden_size=250),
    "GENRE": TrainConfig("GENRE", cemb_layers=2, cemb_size=200, hidden_size=250),
    "MODE": TrainConfig("MODE", cemb_layers=2, cemb_size=150, hidden_size=200),
    "NOMB": TrainConfig("NOMB", cemb_layers=1, cemb_size=200, hidden_size=250),
    "PERS": TrainConfig("PERS", cemb_layers=2, cemb_size=150, hidden_size=350),
    "TEMPS": TrainConfig("TEMPS", cemb_layers=2, cemb_size=200, hidden_size=350),
}


def generate_grid(
    task: str,
    overrides: Mapping[str, Sequence] | None = None,
    **shared,
) -> list[TrainConfig]:
    """Cartesian product of the sweep dimensions for one task.

    overrides may replace "cemb_sizes", "cemb_layers" or "hidden_sizes";
    extra keyword arguments (max_epochs, noise_probability...) are applied
    to every generated config.  The lemma task gains the extra 170 hidden
    size; its target metric is precision, accuracy otherwise.
    """
    hidden: tuple = HIDDEN_SIZES
    if task == "LEMMA":
        hidden = tuple(sorted(HIDDEN_SIZES + (LEMMA_EXTRA_HIDDEN,)))
    dims = {
        "cemb_sizes": CEMB_SIZES,
        "cemb_layers": CEMB_LAYERS,
        "hidden_sizes": hidden,
    }
    for key, values in (overrides or {}).items():
        if key not in dims:
            raise ConfigError(f"unknown grid dimension {key!r}")
        if not values:
            raise ConfigError(f"override for {key} is empty")
        dims[key] = tuple(values)

    target = "precision" if task == "LEMMA" else "accuracy"
    configs = []
    for cemb_size, layers, hidden_size in itertools.product(
        sorted(dims["cemb_sizes"]), sorted(dims["cemb_layers"]), sorted(dims["hidden_sizes"])
    ):
        configs.append(
            TrainConfig(
                task=task,
                cemb_size=cemb_size,
                cemb_layers=layers,
                hidden_size=hidden_size,
                target_metric=target,
                **shared,
            )
        )
    return configs


# --- run log ----------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    config_index: int
    run_index: int
    seed: int
    status: str
    config: TrainConfig
    metrics: dict[str, float]
    model_path: str | None = None
    error: str | None = None
    timestamp: str = ""

    @property
    def run_id(self) -> str:
        return f"{self.config_index:03d}-{self.run_index:03d}"

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        data = json.loads(line)
        data["config"] = TrainConfig(**data["config"])
        return cls(**data)


@dataclass
class SweepLog:
    records: list[RunRecord]

    def successful(self) -> list[RunRecord]:
        return [r for r in self.records if r.status == "ok"]

    def completed_keys(self) -> set[tuple[int, int]]:
        return {(r.config_index, r.run_index) for r in self.records}

    @classmethod
    def load(cls, path: str | Path) -> "SweepLog":
        path = Path(path)
        if not path.exists():
            return cls([])
        records = [
            RunRecord.from_json(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return cls(records)


def derive_seed(base_seed: int, config_index: int, run_index: int) -> int:
    """Stable per-run seed from the base seed and grid coordinates."""
    digest = hashlib.sha256(
        f"{base_seed}:{config_index}:{run_index}".encode()
    ).digest()
    return int.from_bytes(digest[:4], "little")


def dev_metrics(model, splits: SplitSet) -> dict[str, float]:
    """accuracy/precision/recall/f1 on dev, overall and per token class."""
    classes = classify_tokens(splits.train, splits.dev)
    gold = [g for s in splits.dev for g in gold_column(s, model.task)]
    pred = [p for ps in predict_document(model, list(splits.dev)) for p in ps]
    table = score(gold, pred, classes)
    return {
        f"{name}_{subset}": getattr(metrics, name)
        for subset, metrics in table.rows.items()
        for name in METRIC_NAMES
    }


def _default_runner(model_dir: str | Path | None):
    def runner(config: TrainConfig, splits: SplitSet, run_id: str):
        model = train_task(config, splits)
        model_path = None
        if model_dir is not None:
            Path(model_dir).mkdir(parents=True, exist_ok=True)
            model_path = str(Path(model_dir) / f"{config.task}-{run_id}.lmtg")
            save_model(model, model_path)
        return dev_metrics(model, splits), model_path

    return runner


def run_sweep(
    configs: Sequence[TrainConfig],
    splits: SplitSet,
    runs_per_config: int = MIN_RUNS_PER_CONFIG,
    log_path: str | Path | None = None,
    model_dir: str | Path | None = None,
    base_seed: int = 0,
    runner: Callable | None = None,
    limit: int | None = None,
) -> SweepLog:
    """Train every config runs_per_config times with derived seeds.

    The log is append-only newline-delimited JSON; runs already present are
    skipped on restart, so an interrupted sweep resumes where it stopped.
    Failed runs are recorded with status "failed" and the sweep continues.
    limit caps the number of new runs executed in this call.
    """
    if not configs:
        raise ConfigError("empty sweep grid")
    runner = runner or _default_runner(model_dir)
    log = SweepLog.load(log_path) if log_path else SweepLog([])
    done = log.completed_keys()
    handle = open(log_path, "a", encoding="utf-8") if log_path else None
    executed = 0
    try:
        for config_index, config in enumerate(configs):
            for run_index in range(runs_per_config):
                if (config_index, run_index) in done:
                    continue
                if limit is not None and executed >= limit:
                    return log
                seed = derive_seed(base_seed, config_index, run_index)
                seeded = dataclasses.replace(config, seed=seed)
                run_id = f"{config_index:03d}-{run_index:03d}"
                try:
                    metrics, model_path = runner(seeded, splits, run_id)
                    record = RunRecord(
                        config_index, run_index, seed, "ok", seeded, metrics,
                        model_path, None, _now(),
                    )
                except LemtagError as exc:
                    record = RunRecord(
                        config_index, run_index, seed, "failed", seeded, {},
                        None, str(exc), _now(),
                    )
                log.records.append(record)
                executed += 1
                if handle:
                    handle.write(record.to_json() + "\n")
                    handle.flush()
    finally:
        if handle:
            handle.close()
    return log


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- rank-sum selection -----------------------------------------------------


def _default_exclusions() -> tuple[str, ...]:
    # unknown-target metrics rest on tiny supports and would skew the ranking
    return tuple(f"{name}_unknown_target" for name in METRIC_NAMES)


@dataclass(frozen=True)
class RankingPolicy:
    excluded: tuple[str, ...] = dataclasses.field(default_factory=_default_exclusions)

    def kept(self, names: Sequence[str]) -> list[str]:
        kept = [n for n in names if n not in self.excluded]
        if not kept:
            raise ConfigError("ranking policy excludes every metric")
        return kept


def rank_table(
    log: SweepLog, policy: RankingPolicy = RankingPolicy()
) -> list[tuple[str, float]]:
    """(run id, rank sum) per successful run, best (lowest) first.

    Each run is ranked on every kept metric, higher values ranking better;
    ties share the mean rank.
    """
    rows = log.successful()
    if not rows:
        raise LemtagError("no successful runs to rank")
    names = sorted({name for row in rows for name in row.metrics})
    kept = policy.kept(names)

    sums = [0.0] * len(rows)
    for name in kept:
        values = [-row.metrics.get(name, 0.0) for row in rows]
        for i, rank in enumerate(rankdata(values, method="average")):
            sums[i] += float(rank)
    pairs = list(zip((row.run_id for row in rows), sums))
    pairs.sort(key=lambda p: (p[1], p[0]))
    return pairs


def rank_models(log: SweepLog, policy: RankingPolicy = RankingPolicy()) -> str:
    """Run id with the lowest rank sum; ties break on the higher overall
    target metric, then the lower run id."""
    rows = log.successful()
    sums = dict(rank_table(log, policy))

    def sort_key(row: RunRecord):
        target_value = row.metrics.get(f"{row.config.target_metric}_all", 0.0)
        return (sums[row.run_id], -target_value, row.run_id)

    return min(rows, key=sort_key).run_id
