import json
import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from haneat.activation import ActivationKind
from haneat.config import EvolutionConfig
from haneat.errors import ConfigError, HaneatError
from haneat.experiment import (
    HETEROGENEOUS_ARM,
    ExperimentSpec,
    ablate_mutation,
    activation_histogram,
    compare,
    quantiles,
    run_experiment,
    run_fixtures,
    split_seed,
)
from haneat.genome import NodeGene, NodeRole, loads, minimal_genome


def sorted_quantile(values, q):
    ordered = sorted(values)
    position = (len(ordered) - 1) * q
    low = math.floor(position)
    high = min(low + 1, len(ordered) - 1)
    return ordered[low] + (position - low) * (ordered[high] - ordered[low])


def tiny_spec(tmp_path, **changes) -> ExperimentSpec:
    evolution = EvolutionConfig(population_size=10, max_generations=3)
    spec = ExperimentSpec(dataset="gaussian_1d", folds=2, replicates=1, out_dir=str(tmp_path), evolution=evolution)
    return replace(spec, **changes)


# ---------------- statistics ----------------
def test_quantiles_match_sort_reference():
    rng = np.random.default_rng(3)
    for _ in range(100):
        values = rng.normal(size=int(rng.integers(1, 60))).tolist()
        for q in (0.25, 0.5, 0.75):
            assert quantiles(values, q) == pytest.approx(sorted_quantile(values, q), rel=1e-12, abs=1e-12)


def test_quantile_edge_cases():
    assert quantiles([4.0], 0.25) == 4.0
    with pytest.raises(HaneatError):
        quantiles([], 0.5)
    with pytest.raises(ConfigError):
        quantiles([1.0], 1.5)


def test_activation_histogram(rng):
    bare = minimal_genome(1, 1, rng)
    assert activation_histogram([bare]) == ({}, True)
    mixed = replace(
        bare,
        nodes=bare.nodes
        + (
            NodeGene(10, NodeRole.HIDDEN, ActivationKind.RELU),
            NodeGene(11, NodeRole.HIDDEN, ActivationKind.RELU),
            NodeGene(12, NodeRole.HIDDEN, ActivationKind.GAUSSIAN),
        ),
    )
    histogram, empty = activation_histogram([mixed, bare])
    assert not empty
    assert histogram == pytest.approx({"step": 0.0, "relu": 2 / 3, "sigmoid": 0.0, "gaussian": 1 / 3})


def test_split_seeds():
    assert split_seed(1, 0, 0) == split_seed(1, 0, 0)
    assert len({split_seed(1, r, f) for r in range(5) for f in range(5)}) == 25


# ---------------- spec validation ----------------
@pytest.mark.parametrize(
    "changes",
    [
        {"mode": "tournament"},
        {"mode": "homogeneous"},
        {"mode": "homogeneous", "activation": "linear"},
        {"folds": 1},
        {"replicates": 0},
        {"rates": "0.1,abc"},
        {"rates": "1.5"},
        {"parallel": 0},
    ],
)
def test_invalid_specs(tmp_path, changes):
    with pytest.raises(ConfigError):
        tiny_spec(tmp_path, **changes).validate()


# ---------------- runs ----------------
def test_heterogeneous_run_writes_artifacts(tmp_path):
    result = run_experiment(tiny_spec(tmp_path))
    (summary,) = result.arms
    assert summary.arm == HETEROGENEOUS_ARM
    assert summary.runs == 2
    assert set(summary.test) == {"median", "q25", "q75"}

    root = tmp_path / "gaussian_1d"
    assert result.out_dir == root
    folds = pd.read_csv(root / "folds.csv")
    assert len(folds) == 200
    stored = json.loads((root / HETEROGENEOUS_ARM / "summary.json").read_text())
    assert stored["runs"] == 2 and "records" not in stored

    split = root / HETEROGENEOUS_ARM / "r00_f01"
    metrics = pd.read_csv(split / "metrics.csv")
    assert list(metrics.columns)[:3] == ["generation", "best_train_mse", "best_test_mse"]
    assert len(metrics) == 3
    assert list(pd.read_csv(split / "species.csv").columns) == ["generation", "species", "size", "best_fitness", "threshold"]
    assert len(pd.read_csv(split / "activations.csv")) == 3
    champion = loads((split / "champion.json").read_text())
    assert champion.fitness is not None


def test_equal_seeds_give_identical_artifacts(tmp_path):
    run_experiment(tiny_spec(tmp_path / "a"))
    run_experiment(tiny_spec(tmp_path / "b"))
    for name in ("metrics.csv", "species.csv", "champion.json"):
        first = (tmp_path / "a" / "gaussian_1d" / HETEROGENEOUS_ARM / "r00_f00" / name).read_bytes()
        second = (tmp_path / "b" / "gaussian_1d" / HETEROGENEOUS_ARM / "r00_f00" / name).read_bytes()
        assert first == second, name


def test_homogeneous_mode_names_arm_after_activation(tmp_path):
    result = run_experiment(tiny_spec(tmp_path, mode="homogeneous", activation="sigmoid"))
    assert [arm.arm for arm in result.arms] == ["sigmoid"]
    assert all(set(r.activations) == {"step", "relu", "sigmoid", "gaussian"} for r in result.arms[0].records)


def test_sweep_writes_series(tmp_path):
    result = ablate_mutation(tiny_spec(tmp_path, rates="0,0.5"), population=8)
    assert [arm.arm for arm in result.arms] == ["rate_0", "rate_0.5"]
    series = pd.read_csv(result.out_dir / "series.csv")
    assert list(series.columns) == ["arm", "generation", "mean_train_mse", "mean_test_mse"]
    assert len(series) == 2 * 3


def test_compare_writes_table_and_scatter(tmp_path):
    result = compare(tiny_spec(tmp_path, evolution=EvolutionConfig(population_size=8, max_generations=2)))
    assert [arm.arm for arm in result.arms] == [HETEROGENEOUS_ARM, "step", "relu", "sigmoid", "gaussian"]
    table = pd.read_csv(result.out_dir / "table.csv")
    assert list(table.columns) == ["dataset", "statistic", HETEROGENEOUS_ARM, "step", "relu", "sigmoid", "gaussian"]
    assert table.statistic.tolist() == ["mse", "q25", "q75", "median_nodes", "median_connections"]
    scatter = pd.read_csv(result.out_dir / "scatter.csv")
    assert len(scatter) == 5 * 2


def test_parallel_splits_match_serial(tmp_path):
    serial = run_experiment(tiny_spec(tmp_path / "serial"))
    parallel = run_experiment(tiny_spec(tmp_path / "parallel", parallel=2))
    assert serial.arms[0].to_dict() == parallel.arms[0].to_dict()


def test_run_fixtures(tmp_path):
    cfg = EvolutionConfig(population_size=8, max_generations=2)
    (summary,) = run_fixtures(cfg, ["sigmoid_1d"], seeds=2, out_dir=tmp_path)
    assert summary.runs == 2
    assert (tmp_path / "sigmoid_1d" / "summary.json").is_file()
    assert (tmp_path / "sigmoid_1d" / "seed01" / "champion.json").is_file()


# ---------------- directional checks at desk scale ----------------
@pytest.mark.slow
def test_activation_mutation_does_not_hurt_on_composite(tmp_path):
    spec = replace(
        tiny_spec(tmp_path, dataset="composite_fig3", replicates=10, rates="0,0.2"),
        evolution=EvolutionConfig(max_generations=750),
    )
    result = ablate_mutation(spec, population=50)
    medians = {arm.arm: arm.test["median"] for arm in result.arms}
    assert medians["rate_0.2"] <= medians["rate_0"]


@pytest.mark.slow
def test_cancer_label_error_band(tmp_path):
    spec = replace(
        tiny_spec(tmp_path, dataset="cancer", folds=5, replicates=2, parallel=4),
        evolution=EvolutionConfig(max_generations=500),
    )
    (summary,) = run_experiment(spec).arms
    assert 0.02 <= summary.test["median"] <= 0.10


@pytest.mark.slow
def test_heterogeneous_champions_are_not_larger(tmp_path):
    spec = replace(
        tiny_spec(tmp_path, dataset="composite_fig3", replicates=5, parallel=4),
        evolution=EvolutionConfig(max_generations=750, population_size=50),
    )
    arms = {arm.arm: arm for arm in compare(spec).arms}
    mixed = arms.pop(HETEROGENEOUS_ARM)
    best = min(arms.values(), key=lambda arm: arm.test["median"])
    assert mixed.median_connections <= best.median_connections
