"""Dataset ingestion, normalization, cross-validation folds and synthetic fixtures."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError

logger = logging.getLogger(__name__)

TASKS = ("regression", "classification")
FIXTURE_POINTS = 200
FIXTURES = ("gaussian_1d", "sigmoid_1d", "composite_fig3", "multitarget_fig4")
# name -> (inputs, targets, task)
BENCHMARKS = {
    "cholesterol": (21, 3, "regression"),
    "engine": (2, 2, "regression"),
    "cancer": (9, 1, "classification"),
}


@dataclass(frozen=True)
class Scaling:
    """Per-column min/max captured by ``normalize``."""

    input_min: np.ndarray
    input_max: np.ndarray
    target_min: np.ndarray
    target_max: np.ndarray

    def transform_inputs(self, X: np.ndarray) -> np.ndarray:
        span = self.input_max - self.input_min
        constant = span == 0
        scaled = (X - self.input_min) / np.where(constant, 1.0, span) * 2.0 - 1.0
        return np.where(constant, 0.0, scaled)

    def transform_targets(self, Y: np.ndarray) -> np.ndarray:
        span = self.target_max - self.target_min
        constant = span == 0
        scaled = (Y - self.target_min) / np.where(constant, 1.0, span)
        return np.where(constant, 0.5, scaled)

    def inverse_targets(self, Y: np.ndarray) -> np.ndarray:
        return np.asarray(Y, dtype=np.float64) * (self.target_max - self.target_min) + self.target_min


@dataclass(frozen=True)
class Dataset:
    name: str
    inputs: np.ndarray
    targets: np.ndarray
    task: str = "regression"
    scaling: Optional[Scaling] = None
    dropped: int = 0

    @property
    def n_rows(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def n_targets(self) -> int:
        return int(self.targets.shape[1])

    def subset(self, rows: np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return replace(self, inputs=self.inputs[rows], targets=self.targets[rows])


# ---------------- loading ----------------
def _expected_header(n_inputs: int, n_targets: int) -> list:
    return [f"in_{i}" for i in range(n_inputs)] + [f"out_{j}" for j in range(n_targets)]


def load_csv(
    path: str | Path,
    n_inputs: Optional[int] = None,
    n_targets: Optional[int] = None,
    task: str = "regression",
) -> Dataset:
    """Read ``in_*``/``out_*`` columns; rows with missing or unparseable cells are dropped.

    When ``n_inputs``/``n_targets`` are omitted they are taken from the header.
    Values stay raw until ``normalize``.
    """
    if task not in TASKS:
        raise ConfigError(f"Unknown task '{task}' (expected one of {', '.join(TASKS)}).")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Dataset file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError(f"Dataset file {path} is empty.") from None
    except pd.errors.ParserError as exc:
        raise DataError(f"Dataset file {path} has a row with too many columns: {exc}") from None

    header = [str(column).strip() for column in frame.columns]
    if n_inputs is None:
        n_inputs = sum(1 for column in header if column.startswith("in_"))
    if n_targets is None:
        n_targets = sum(1 for column in header if column.startswith("out_"))
    if n_inputs < 1 or n_targets < 1 or header != _expected_header(n_inputs, n_targets):
        raise DataError(
            f"Malformed header in {path}: expected in_0..in_{n_inputs - 1}, out_0..out_{n_targets - 1}, got {header}."
        )
    if frame.empty:
        raise DataError(f"Dataset file {path} has no data rows.")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    complete = numeric.dropna(axis=0, how="any")
    dropped = len(numeric) - len(complete)
    if dropped:
        logger.warning("Dropped %d incomplete rows of %d from %s", dropped, len(numeric), path.name)
    if complete.empty:
        raise DataError(f"Dataset file {path} has no complete rows.")

    values = complete.to_numpy(dtype=np.float64)
    return Dataset(
        name=path.stem,
        inputs=values[:, :n_inputs],
        targets=values[:, n_inputs:],
        task=task,
        dropped=dropped,
    )


def normalize(d: Dataset) -> Dataset:
    """Min-max scale inputs to [-1, 1] and targets to [0, 1] over the whole dataset.

    A dataset that already carries scaling parameters is returned unchanged.
    """
    if d.scaling is not None:
        return d
    scaling = Scaling(
        input_min=d.inputs.min(axis=0),
        input_max=d.inputs.max(axis=0),
        target_min=d.targets.min(axis=0),
        target_max=d.targets.max(axis=0),
    )
    for kind, low, high in (("input", scaling.input_min, scaling.input_max), ("target", scaling.target_min, scaling.target_max)):
        for column in np.flatnonzero(high == low):
            logger.warning("Constant %s column %d in %s; mapped to a fixed value", kind, column, d.name)
    return replace(
        d,
        inputs=scaling.transform_inputs(d.inputs),
        targets=scaling.transform_targets(d.targets),
        scaling=scaling,
    )


def denormalize_targets(d: Dataset, Y: np.ndarray) -> np.ndarray:
    if d.scaling is None:
        return np.asarray(Y, dtype=np.float64)
    return d.scaling.inverse_targets(Y)


# ---------------- cross validation ----------------
@dataclass(frozen=True)
class FoldPlan:
    k: int
    replicates: int
    seed: int
    permutations: np.ndarray  # (replicates, n_rows)
    folds: np.ndarray  # (replicates, n_rows) fold label of each row

    def splits(self) -> Iterator[Tuple[int, int, np.ndarray, np.ndarray]]:
        """Yield (replicate, fold, train rows, test rows) in replicate-major order."""
        for replicate in range(self.replicates):
            labels = self.folds[replicate]
            for fold in range(self.k):
                yield replicate, fold, np.flatnonzero(labels != fold), np.flatnonzero(labels == fold)


def make_folds(n_rows: int, k: int, replicates: int, seed: int) -> FoldPlan:
    """Seeded shuffle per replicate, then contiguous folds whose sizes differ by at most one."""
    if k < 2:
        raise ConfigError(f"Cross validation needs k >= 2, got {k}.")
    if replicates < 1:
        raise ConfigError(f"replicates must be at least 1, got {replicates}.")
    if n_rows < k:
        raise ConfigError(f"Cannot split {n_rows} rows into {k} folds.")
    rng = np.random.default_rng(seed)
    permutations = np.empty((replicates, n_rows), dtype=np.int64)
    folds = np.empty((replicates, n_rows), dtype=np.int64)
    for replicate in range(replicates):
        order = rng.permutation(n_rows)
        permutations[replicate] = order
        for fold, chunk in enumerate(np.array_split(order, k)):
            folds[replicate, chunk] = fold
    return FoldPlan(k=k, replicates=replicates, seed=seed, permutations=permutations, folds=folds)


def export_folds(plan: FoldPlan, path: str | Path) -> Path:
    replicates, n_rows = plan.folds.shape
    frame = pd.DataFrame(
        {
            "replicate": np.repeat(np.arange(replicates), n_rows),
            "row": np.tile(np.arange(n_rows), replicates),
            "fold": plan.folds.reshape(-1),
        }
    )
    path = Path(path)
    frame.to_csv(path, index=False)
    return path


# ---------------- fixtures and stand-ins ----------------
def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def fixture_targets(name: str) -> Dataset:
    """Dense 1-D target functions on [-1, 1] for checking expressivity."""
    x = np.linspace(-1.0, 1.0, FIXTURE_POINTS)
    if name == "gaussian_1d":
        targets = np.exp(-np.square(3.0 * x))[:, None]
    elif name == "sigmoid_1d":
        targets = _sigmoid(6.0 * x)[:, None]
    elif name == "composite_fig3":
        bump = np.exp(-np.square(4.0 * (x + 0.3)))
        ramp = _sigmoid(8.0 * (x - 0.4))
        targets = (0.6 * bump + 0.4 * ramp)[:, None]
    elif name == "multitarget_fig4":
        wave = 10.0 * np.sin(np.pi * x)
        first = _sigmoid(wave)
        first = (first - first.min()) / (first.max() - first.min())
        second = (np.tanh(wave) + 1.0) / 2.0
        targets = np.column_stack([first, second])
    else:
        raise DataError(f"Unknown fixture '{name}' (expected one of {', '.join(FIXTURES)}).")
    n_targets = targets.shape[1]
    identity = Scaling(
        input_min=np.array([-1.0]),
        input_max=np.array([1.0]),
        target_min=np.zeros(n_targets),
        target_max=np.ones(n_targets),
    )
    return Dataset(name=name, inputs=x[:, None], targets=targets, scaling=identity)


def synthetic_standin(name: str, seed: int = 0) -> Dataset:
    """Raw (unnormalized) data shaped like a benchmark set, for runs without the originals."""
    if name not in BENCHMARKS:
        raise DataError(f"No stand-in for '{name}' (expected one of {', '.join(BENCHMARKS)}).")
    rng = np.random.default_rng(seed)
    if name == "cholesterol":
        latent = rng.uniform(0.0, 1.0, size=(264, 3))
        loadings = rng.uniform(0.2, 1.0, size=(3, 21))
        inputs = latent @ loadings + rng.normal(0.0, 0.02, size=(264, 21))
        targets = np.column_stack(
            [
                40.0 + 120.0 * latent[:, 0] * latent[:, 1],
                5.0 + 30.0 * _sigmoid(6.0 * (latent[:, 1] - 0.5)),
                20.0 + 50.0 * np.exp(-np.square(2.5 * (latent[:, 2] - 0.4))),
            ]
        )
    elif name == "engine":
        fuel = rng.uniform(0.0, 1.0, 1199)
        speed = rng.uniform(0.0, 1.0, 1199)
        inputs = np.column_stack([200.0 * fuel, 600.0 + 1800.0 * speed])
        targets = np.column_stack(
            [
                np.maximum(0.0, 1500.0 * fuel - 400.0 * np.square(speed - 0.6)),
                900.0 * np.exp(-np.square(2.0 * (fuel - 0.7))) * (0.5 + speed),
            ]
        )
    else:
        inputs = rng.integers(1, 11, size=(683, 9)).astype(np.float64)
        score = inputs @ np.linspace(0.4, 1.2, 9) - 40.0 + rng.normal(0.0, 4.0, 683)
        targets = np.where(score > 0.0, 4.0, 2.0)[:, None]
    return Dataset(name=name, inputs=inputs, targets=targets, task=BENCHMARKS[name][2])


def convert_uci_cancer(src: str | Path, dst: str | Path) -> Path:
    """Rewrite the raw UCI breast cancer file (id, 9 features, class, '?' = missing) as an in_/out_ CSV."""
    try:
        raw = pd.read_csv(src, header=None, na_values="?", skipinitialspace=True)
    except (FileNotFoundError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"Cannot read UCI cancer file {src}: {exc}") from None
    if raw.shape[1] != 11:
        raise DataError(f"UCI cancer file {src} should have 11 columns, found {raw.shape[1]}.")
    converted = raw.iloc[:, 1:].copy()
    converted.columns = _expected_header(9, 1)
    dst = Path(dst)
    converted.to_csv(dst, index=False)
    logger.info("Converted %d rows from %s to %s", len(converted), src, dst)
    return dst


def resolve_dataset(ref: str, data_dir: str | Path = "data", task: Optional[str] = None, seed: int = 0) -> Dataset:
    """Path, fixture name or benchmark name -> normalized dataset."""
    if ref in FIXTURES:
        return fixture_targets(ref)
    if ref in BENCHMARKS:
        n_inputs, n_targets, bench_task = BENCHMARKS[ref]
        path = Path(data_dir) / f"{ref}.csv"
        if path.is_file():
            return normalize(load_csv(path, n_inputs, n_targets, task or bench_task))
        logger.warning("%s not found; using a synthetic stand-in for '%s'", path, ref)
        return normalize(synthetic_standin(ref, seed))
    if Path(ref).is_file():
        return normalize(load_csv(ref, task=task or "regression"))
    raise DataError(f"'{ref}' is neither a dataset file, a fixture nor a known benchmark.")
