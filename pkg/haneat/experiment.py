"""Cross-validated experiment grids, summaries and comparison tables."""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .activation import ActivationKind, hidden_catalog
from .config import EvolutionConfig, settings
from .data import Dataset, FIXTURES, export_folds, fixture_targets, make_folds, resolve_dataset
from .errors import ConfigError, HaneatError
from .evolution import METRIC_COLUMNS, homogeneous_config, run
from .genome import Genome, activation_counts, dumps

logger = logging.getLogger(__name__)

MODES = ("heterogeneous", "homogeneous", "sweep")
HETEROGENEOUS_ARM = "ha-neat"
DEFAULT_RATES = (0.0, 0.1, 0.2, 0.5, 1.0)
ABLATION_POPULATION = 50


@dataclass
class ExperimentSpec:
    dataset: str = "gaussian_1d"
    mode: str = "heterogeneous"
    activation: Optional[str] = None
    folds: int = 5
    replicates: int = 10
    out_dir: str = settings.out_dir
    seed: int = 0
    parallel: int = 1
    log_every: int = 0
    task: Optional[str] = None
    rates: str = ",".join(str(rate) for rate in DEFAULT_RATES)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)

    def validate(self) -> "ExperimentSpec":
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode '{self.mode}' (expected one of {', '.join(MODES)}).")
        if self.mode == "homogeneous":
            if not self.activation:
                raise ConfigError("Homogeneous mode needs an activation (--activation).")
            kind = ActivationKind.from_label(self.activation)
            if kind not in hidden_catalog():
                raise ConfigError(f"'{kind.label}' cannot be used as a hidden activation.")
        if self.folds < 2 or self.replicates < 1:
            raise ConfigError("Need folds >= 2 and replicates >= 1.")
        if self.parallel < 1:
            raise ConfigError("parallel must be at least 1.")
        self.rate_values()
        self.evolution.validate()
        return self

    def rate_values(self) -> Tuple[float, ...]:
        try:
            rates = tuple(float(item) for item in str(self.rates).split(",") if item.strip())
        except ValueError:
            raise ConfigError(f"Cannot parse mutation rates '{self.rates}'.") from None
        if not rates or any(not 0.0 <= rate <= 1.0 for rate in rates):
            raise ConfigError(f"Mutation rates must be a non-empty list in [0, 1], got '{self.rates}'.")
        return rates


@dataclass
class SplitRecord:
    arm: str
    replicate: int
    fold: int
    seed: int
    train_mse: float
    test_mse: float
    n_nodes: int
    n_hidden: int
    n_enabled_connections: int
    activations: Dict[str, int]
    train_series: List[float] = field(default_factory=list, repr=False)
    test_series: List[float] = field(default_factory=list, repr=False)


@dataclass
class SummaryStats:
    arm: str
    dataset: str
    runs: int
    train: Dict[str, float]
    test: Dict[str, float]
    median_nodes: float
    median_connections: float
    histogram: Dict[str, float]
    histogram_empty: bool
    records: List[SplitRecord] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "records"}


@dataclass
class ExperimentResult:
    arms: List[SummaryStats]
    out_dir: Path


# ---------------- statistics ----------------
def quantiles(values: Sequence[float], q: float) -> float:
    """Linear-interpolation quantile at index (n - 1) * q of the sorted values."""
    if len(values) == 0:
        raise HaneatError("Quantile of an empty sample.")
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"Quantile level {q} outside [0, 1].")
    return float(np.quantile(np.asarray(values, dtype=np.float64), q, method="linear"))


def activation_histogram(champions: Sequence[Genome]) -> Tuple[Dict[str, float], bool]:
    """Relative frequency of hidden activation kinds; (empty map, True) when no hidden nodes exist."""
    counts = {kind.label: 0 for kind in hidden_catalog()}
    for champion in champions:
        for kind, count in activation_counts(champion).items():
            counts[kind.label] += count
    return _normalise_counts(counts)


def _normalise_counts(counts: Dict[str, int]) -> Tuple[Dict[str, float], bool]:
    total = sum(counts.values())
    if total == 0:
        return {}, True
    return {label: count / total for label, count in counts.items()}, False


def _band(values: Sequence[float]) -> Dict[str, float]:
    return {"median": quantiles(values, 0.5), "q25": quantiles(values, 0.25), "q75": quantiles(values, 0.75)}


def summarize(arm: str, dataset: str, records: Sequence[SplitRecord]) -> SummaryStats:
    counts = {kind.label: 0 for kind in hidden_catalog()}
    for record in records:
        for label, count in record.activations.items():
            counts[label] += count
    histogram, empty = _normalise_counts(counts)
    return SummaryStats(
        arm=arm,
        dataset=dataset,
        runs=len(records),
        train=_band([r.train_mse for r in records]),
        test=_band([r.test_mse for r in records]),
        median_nodes=quantiles([r.n_nodes for r in records], 0.5),
        median_connections=quantiles([r.n_enabled_connections for r in records], 0.5),
        histogram=histogram,
        histogram_empty=empty,
        records=list(records),
    )


# ---------------- running splits ----------------
def split_seed(seed: int, replicate: int, fold: int) -> int:
    """Per-split seed shared by every arm, so arms are compared on paired random streams."""
    return int(np.random.SeedSequence([seed, replicate, fold]).generate_state(1)[0])


def _write_run_artifacts(directory: Path, champion: Genome, metrics) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(metrics.rows, columns=list(METRIC_COLUMNS)).to_csv(directory / "metrics.csv", index=False)
    pd.DataFrame(metrics.census, columns=["generation", "species", "size", "best_fitness", "threshold"]).to_csv(
        directory / "species.csv", index=False
    )
    pd.DataFrame(metrics.activations, columns=["generation"] + [k.label for k in hidden_catalog()]).to_csv(
        directory / "activations.csv", index=False
    )
    (directory / "champion.json").write_text(dumps(champion), encoding="utf-8")


def run_split(
    arm: str,
    cfg: EvolutionConfig,
    train: Dataset,
    test: Dataset,
    replicate: int,
    fold: int,
    directory: Optional[Path] = None,
    log_every: int = 0,
) -> SplitRecord:
    champion, metrics = run(cfg, train, test, log_every)
    if directory is not None:
        _write_run_artifacts(directory, champion, metrics)
    final = metrics.final(champion)
    counts = activation_counts(champion)
    logger.info(
        "%s r%d f%d: train %.5f test %.5f (%d nodes, %d connections)",
        arm,
        replicate,
        fold,
        final["train_mse"],
        final["test_mse"],
        final["n_nodes"],
        final["n_enabled_connections"],
    )
    return SplitRecord(
        arm=arm,
        replicate=replicate,
        fold=fold,
        seed=cfg.seed,
        activations={kind.label: counts.get(kind, 0) for kind in hidden_catalog()},
        train_series=[row["best_train_mse"] for row in metrics.rows],
        test_series=[row["best_test_mse"] for row in metrics.rows],
        **final,
    )


def _run_split_job(job: tuple) -> SplitRecord:
    return run_split(*job)


def _arms(spec: ExperimentSpec) -> List[Tuple[str, EvolutionConfig]]:
    cfg = spec.evolution
    if spec.mode == "heterogeneous":
        return [(HETEROGENEOUS_ARM, cfg)]
    if spec.mode == "homogeneous":
        kind = ActivationKind.from_label(spec.activation)
        return [(kind.label, homogeneous_config(cfg, kind))]
    return [(f"rate_{rate:g}", replace(cfg, p_mutate_activation=rate)) for rate in spec.rate_values()]


def run_arms(spec: ExperimentSpec, arms: Sequence[Tuple[str, EvolutionConfig]]) -> ExperimentResult:
    """Run every arm on every cross-validation split of ``spec.dataset``."""
    spec.validate()
    dataset = resolve_dataset(spec.dataset, settings.data_dir, spec.task, spec.seed)
    plan = make_folds(dataset.n_rows, spec.folds, spec.replicates, spec.seed)
    out_dir = Path(spec.out_dir) / dataset.name
    out_dir.mkdir(parents=True, exist_ok=True)
    export_folds(plan, out_dir / "folds.csv")

    jobs = []
    for arm, cfg in arms:
        for replicate, fold, train_rows, test_rows in plan.splits():
            jobs.append(
                (
                    arm,
                    replace(cfg, seed=split_seed(spec.seed, replicate, fold), eval_workers=1),
                    dataset.subset(train_rows),
                    dataset.subset(test_rows),
                    replicate,
                    fold,
                    out_dir / arm / f"r{replicate:02d}_f{fold:02d}",
                    spec.log_every,
                )
            )
    logger.info("%s: %d arms x %d splits on %d rows", dataset.name, len(arms), len(jobs) // len(arms), dataset.n_rows)

    records: List[SplitRecord] = []
    try:
        if spec.parallel > 1:
            with ProcessPoolExecutor(max_workers=spec.parallel) as pool:
                records.extend(pool.map(_run_split_job, jobs))
        else:
            records.extend(_run_split_job(job) for job in jobs)
    except Exception:
        logger.error("Experiment aborted after %d completed splits; artifacts kept in %s", len(records), out_dir)
        raise

    summaries = []
    for arm, _ in arms:
        summary = summarize(arm, dataset.name, [r for r in records if r.arm == arm])
        (out_dir / arm / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
        summaries.append(summary)
    if spec.mode == "sweep":
        write_series(summaries, out_dir / "series.csv")
    return ExperimentResult(arms=summaries, out_dir=out_dir)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    return run_arms(spec, _arms(spec.validate()))


def compare(spec: ExperimentSpec) -> ExperimentResult:
    """HA-NEAT against one homogeneous arm per hidden activation, then the comparison table."""
    spec.validate()
    arms = [(HETEROGENEOUS_ARM, spec.evolution)]
    arms.extend((kind.label, homogeneous_config(spec.evolution, kind)) for kind in hidden_catalog())
    result = run_arms(spec, arms)
    compare_report(result.arms, result.out_dir)
    return result


def ablate_mutation(spec: ExperimentSpec, population: Optional[int] = ABLATION_POPULATION) -> ExperimentResult:
    """Mutate-activation rate sweep; one mean error series per rate in ``series.csv``.

    The sweep runs on a small population unless ``population`` is None.
    """
    if population is not None:
        spec = replace(spec, evolution=replace(spec.evolution, population_size=population))
    return run_experiment(replace(spec, mode="sweep"))


# ---------------- reports ----------------
def write_series(arms: Sequence[SummaryStats], path: Path) -> Path:
    rows = []
    for arm in arms:
        train = np.array([r.train_series for r in arm.records], dtype=np.float64)
        test = np.array([r.test_series for r in arm.records], dtype=np.float64)
        for generation in range(train.shape[1] if train.ndim == 2 else 0):
            rows.append(
                {
                    "arm": arm.arm,
                    "generation": generation,
                    "mean_train_mse": float(train[:, generation].mean()),
                    "mean_test_mse": float(test[:, generation].mean()),
                }
            )
    pd.DataFrame(rows, columns=["arm", "generation", "mean_train_mse", "mean_test_mse"]).to_csv(path, index=False)
    return path


def compare_report(arms: Sequence[SummaryStats], out_dir: Path) -> Tuple[Path, Path]:
    """Write ``table.csv`` (one column per arm) and ``scatter.csv`` (test MSE vs size per run)."""
    if not arms:
        raise ConfigError("compare_report needs at least one arm.")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = list(dict.fromkeys(arm.arm for arm in arms))
    datasets = list(dict.fromkeys(arm.dataset for arm in arms))
    rows = []
    for dataset in datasets:
        by_arm = {arm.arm: arm for arm in arms if arm.dataset == dataset}
        for label, pick in (
            ("mse", lambda s: s.test["median"]),
            ("q25", lambda s: s.test["q25"]),
            ("q75", lambda s: s.test["q75"]),
            ("median_nodes", lambda s: s.median_nodes),
            ("median_connections", lambda s: s.median_connections),
        ):
            row = {"dataset": dataset, "statistic": label}
            row.update({name: pick(by_arm[name]) if name in by_arm else None for name in columns})
            rows.append(row)
    table = out_dir / "table.csv"
    pd.DataFrame(rows, columns=["dataset", "statistic"] + columns).to_csv(table, index=False)

    points = [
        {
            "dataset": arm.dataset,
            "arm": arm.arm,
            "replicate": record.replicate,
            "fold": record.fold,
            "test_mse": record.test_mse,
            "n_enabled_connections": record.n_enabled_connections,
        }
        for arm in arms
        for record in arm.records
    ]
    scatter = out_dir / "scatter.csv"
    pd.DataFrame(
        points, columns=["dataset", "arm", "replicate", "fold", "test_mse", "n_enabled_connections"]
    ).to_csv(scatter, index=False)
    return table, scatter


# ---------------- expressivity fixtures ----------------
def run_fixtures(
    cfg: EvolutionConfig,
    names: Sequence[str] = FIXTURES,
    seeds: int = 10,
    out_dir: Optional[Path] = None,
    log_every: int = 0,
) -> List[SummaryStats]:
    """Evolve on each fixture with train = test (the whole curve), one run per seed."""
    summaries = []
    for name in names:
        data = fixture_targets(name)
        records = []
        for seed in range(seeds):
            directory = Path(out_dir) / name / f"seed{seed:02d}" if out_dir is not None else None
            records.append(run_split(name, replace(cfg, seed=seed), data, data, seed, 0, directory, log_every))
        summary = summarize(name, name, records)
        if out_dir is not None:
            (Path(out_dir) / name / "summary.json").write_text(
                json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8"
            )
        summaries.append(summary)
    return summaries
