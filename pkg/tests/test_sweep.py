import json
import random

import pytest

from lemtag.errors import ConfigError, LemtagError, TrainingDiverged
from lemtag.preprocess import SplitSet
from lemtag.sweep import (
    BEST_CONFIGS,
    RankingPolicy,
    RunRecord,
    SweepLog,
    derive_seed,
    generate_grid,
    rank_models,
    rank_table,
    run_sweep,
)
from lemtag.synthetic import regular_language
from lemtag.tagger import TrainConfig

import rank_oracle


# --- grid generation --------------------------------------------------------


def test_grid_size_pos():
    assert len(generate_grid("POS")) == 40  # 4 cemb x 2 layers x 5 hidden


def test_grid_size_lemma_gains_170():
    grid = generate_grid("LEMMA")
    assert len(grid) == 48  # 4 x 2 x 6
    assert {c.hidden_size for c in grid} == {150, 170, 200, 250, 300, 350}


def test_grid_override():
    assert len(generate_grid("POS", {"hidden_sizes": [150]})) == 8


def test_grid_rejects_empty_override():
    with pytest.raises(ConfigError):
        generate_grid("POS", {"hidden_sizes": []})
    with pytest.raises(ConfigError):
        generate_grid("POS", {"depths": [1]})


def test_grid_target_metrics():
    assert all(c.target_metric == "precision" for c in generate_grid("LEMMA"))
    assert all(c.target_metric == "accuracy" for c in generate_grid("CAS"))


def test_grid_shares_fixed_hyperparameters():
    for config in generate_grid("GENRE"):
        assert config.dropout == 0.32
        assert config.learning_rate == 0.0049


def test_best_configs_cover_every_task():
    assert set(BEST_CONFIGS) == {
        "LEMMA", "POS", "CAS", "DEGRE", "GENRE", "MODE", "NOMB", "PERS", "TEMPS",
    }
    lemma = BEST_CONFIGS["LEMMA"]
    assert (lemma.cemb_layers, lemma.cemb_size, lemma.hidden_size) == (2, 300, 150)
    assert lemma.target_metric == "precision"
    nomb = BEST_CONFIGS["NOMB"]
    assert (nomb.cemb_layers, nomb.cemb_size, nomb.hidden_size) == (1, 200, 250)


# --- sweep execution --------------------------------------------------------


def _splits():
    doc = regular_language(20, seed=3, n_stems=6)
    sents = list(doc.sentences)
    return SplitSet(tuple(sents[:16]), tuple(sents[16:18]), tuple(sents[18:]), 0, (0.8, 0.1, 0.1))


def _stub_runner(fail_on=()):
    def runner(config, splits, run_id):
        if (config.cemb_size, config.seed % 5) in fail_on:
            raise TrainingDiverged("stub failure")
        rng = random.Random(config.seed)
        metrics = {
            f"{name}_{subset}": round(rng.random(), 6)
            for name in ("accuracy", "precision", "recall", "f1")
            for subset in ("all", "known", "unknown", "ambiguous", "unknown_target")
        }
        return metrics, None

    return runner


def test_run_sweep_row_count(tmp_path):
    grid = generate_grid("POS", {"cemb_sizes": [100, 150], "cemb_layers": [1], "hidden_sizes": [150]})
    log = run_sweep(grid, _splits(), runs_per_config=5, log_path=tmp_path / "log.jsonl", runner=_stub_runner())
    assert len(log.records) == 10
    lines = (tmp_path / "log.jsonl").read_text().splitlines()
    assert len(lines) == 10
    json.loads(lines[0])  # structured text, one record per line


def test_run_sweep_resume_produces_identical_log(tmp_path):
    grid = generate_grid("POS", {"cemb_sizes": [100, 150], "cemb_layers": [1], "hidden_sizes": [150]})
    splits = _splits()

    full_path = tmp_path / "full.jsonl"
    run_sweep(grid, splits, 5, full_path, runner=_stub_runner())

    resumed_path = tmp_path / "resumed.jsonl"
    partial = run_sweep(grid, splits, 5, resumed_path, runner=_stub_runner(), limit=7)
    assert len(partial.records) == 7
    resumed = run_sweep(grid, splits, 5, resumed_path, runner=_stub_runner())
    assert len(resumed.records) == 10

    def strip_ts(record):
        data = json.loads(record.to_json())
        data.pop("timestamp")
        return data

    full = SweepLog.load(full_path)
    assert [strip_ts(r) for r in resumed.records] == [strip_ts(r) for r in full.records]


def test_run_sweep_records_failures_and_continues(tmp_path):
    grid = generate_grid("POS", {"cemb_sizes": [100, 150], "cemb_layers": [1], "hidden_sizes": [150]})
    runner = _stub_runner(fail_on={(100, derive_seed(0, 0, 0) % 5)})
    log = run_sweep(grid, _splits(), 5, tmp_path / "log.jsonl", runner=runner)
    failed = [r for r in log.records if r.status == "failed"]
    assert failed and all(r.error for r in failed)
    assert len(log.records) == 10
    winner = rank_models(log)
    assert winner not in {r.run_id for r in failed}


def test_run_sweep_derived_seeds_are_stable_and_distinct():
    seeds = {derive_seed(0, c, r) for c in range(4) for r in range(5)}
    assert len(seeds) == 20
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert derive_seed(1, 1, 2) != derive_seed(0, 1, 2)


def test_run_sweep_rejects_empty_grid():
    with pytest.raises(ConfigError):
        run_sweep([], _splits(), 5, None, runner=_stub_runner())


# --- rank-sum selection -----------------------------------------------------


def _record(i, j, metrics, target="accuracy"):
    config = TrainConfig(task="POS", target_metric=target)
    return RunRecord(i, j, derive_seed(0, i, j), "ok", config, metrics, None, None, "t")


def _log(metric_rows, target="accuracy"):
    return SweepLog([_record(0, j, m, target) for j, m in enumerate(metric_rows)])


def test_rank_dominant_run_selected():
    rows = [
        {"accuracy_all": 0.9, "precision_all": 0.8},
        {"accuracy_all": 0.7, "precision_all": 0.6},
        {"accuracy_all": 0.5, "precision_all": 0.4},
    ]
    assert rank_models(_log(rows), RankingPolicy(excluded=())) == "000-000"


def test_rank_matches_bruteforce_oracle_randomized():
    rng = random.Random(99)
    names = [f"accuracy_{s}" for s in ("all", "known", "unknown")] + [
        f"precision_{s}" for s in ("all", "known", "unknown")
    ]
    for _ in range(20):
        rows = [{n: round(rng.random(), 3) for n in names} for _ in range(5)]
        log = _log(rows)
        oracle_rows = [(r.run_id, r.metrics) for r in log.records]
        assert rank_models(log, RankingPolicy(excluded=())) == rank_oracle.select(
            oracle_rows
        )


def test_rank_exclusion_counterexample():
    # run 0 wins only on the unknown-target metrics; with the default policy
    # the otherwise-better run 1 must be selected
    def row(overall, recall_overall, unknown_target):
        values = {f"{m}_all": overall for m in ("accuracy", "precision", "f1")}
        values["recall_all"] = recall_overall
        values.update(
            {f"{m}_unknown_target": unknown_target
             for m in ("accuracy", "precision", "recall", "f1")}
        )
        return values

    rows = [row(0.2, 0.9, 1.0), row(0.8, 0.8, 0.0), row(0.5, 0.5, 0.5)]
    log = _log(rows)
    with_all = rank_models(log, RankingPolicy(excluded=()))
    default = rank_models(log)
    oracle_rows = [(r.run_id, r.metrics) for r in log.records]
    assert default == rank_oracle.select(
        oracle_rows,
        excluded=tuple(
            f"{m}_unknown_target" for m in ("accuracy", "precision", "recall", "f1")
        ),
    )
    assert with_all == "000-000"  # wins only through unknown-target columns
    assert default == "000-001"  # excluded run not chosen


def test_rank_invariant_under_monotone_rescaling():
    rng = random.Random(5)
    names = ["accuracy_all", "precision_all", "recall_all"]
    rows = [{n: rng.random() for n in names} for _ in range(6)]
    log = _log(rows)
    selected = rank_models(log, RankingPolicy(excluded=()))
    rescaled = [
        {n: (v ** 3 if n == "precision_all" else v) for n, v in row.items()}
        for row in rows
    ]
    assert rank_models(_log(rescaled), RankingPolicy(excluded=())) == selected
    assert rank_table(_log(rescaled), RankingPolicy(excluded=()))[0] == rank_table(
        log, RankingPolicy(excluded=())
    )[0]


def test_rank_adding_universally_dominated_run_changes_nothing():
    rng = random.Random(8)
    names = ["accuracy_all", "precision_all", "recall_all", "f1_all"]
    rows = [{n: 0.3 + 0.7 * rng.random() for n in names} for _ in range(5)]
    log = _log(rows)
    selected = rank_models(log, RankingPolicy(excluded=()))
    dominated = {n: 0.01 for n in names}
    bigger = _log(rows + [dominated])
    assert rank_models(bigger, RankingPolicy(excluded=())) == selected


def test_rank_tie_break_on_target_metric_then_run_id():
    rows = [
        {"accuracy_all": 0.6, "precision_all": 0.4},
        {"accuracy_all": 0.4, "precision_all": 0.6},
    ]
    # symmetric ranks (1+2 each): higher accuracy_all (the target) wins
    assert rank_models(_log(rows), RankingPolicy(excluded=())) == "000-000"
    tied = [
        {"accuracy_all": 0.5, "precision_all": 0.5},
        {"accuracy_all": 0.5, "precision_all": 0.5},
    ]
    assert rank_models(_log(tied), RankingPolicy(excluded=())) == "000-000"


def test_rank_requires_surviving_metric_and_successful_run():
    log = _log([{"accuracy_all": 0.5}])
    with pytest.raises(ConfigError):
        rank_models(log, RankingPolicy(excluded=("accuracy_all",)))
    empty = SweepLog(
        [RunRecord(0, 0, 1, "failed", TrainConfig(task="POS"), {}, None, "x", "t")]
    )
    with pytest.raises(LemtagError):
        rank_models(empty)


def test_run_sweep_with_real_trainer(tmp_path):
    # exercises the default runner end to end: training, dev metrics over
    # all token classes, model artifacts written into a fresh directory
    doc = regular_language(14, seed=2, n_stems=5)
    sents = list(doc.sentences)
    splits = SplitSet(tuple(sents[:12]), tuple(sents[12:]), (), 0, (0.8, 0.1, 0.1))
    grid = generate_grid(
        "POS",
        {"cemb_sizes": [32], "cemb_layers": [1], "hidden_sizes": [32]},
        max_epochs=1,
        noise_probability=0.0,
    )
    log = run_sweep(grid, splits, 2, tmp_path / "log.jsonl", model_dir=tmp_path / "models")
    assert [r.status for r in log.records] == ["ok", "ok"]
    for record in log.records:
        assert set(record.metrics) >= {
            "accuracy_all", "precision_known", "recall_unknown",
            "f1_ambiguous", "accuracy_unknown_target",
        }
    winner = rank_models(log)
    artifacts = sorted(p.name for p in (tmp_path / "models").glob("*.lmtg"))
    assert artifacts == ["POS-000-000.lmtg", "POS-000-001.lmtg"]
    from lemtag.tagger import load_model

    selected = next(r for r in log.records if r.run_id == winner)
    model = load_model(selected.model_path, expected_task="POS")
    assert model.config.seed == selected.seed
