import numpy as np
import pandas as pd
import pytest

from haneat.data import (
    BENCHMARKS,
    FIXTURE_POINTS,
    FIXTURES,
    Dataset,
    convert_uci_cancer,
    denormalize_targets,
    export_folds,
    fixture_targets,
    load_csv,
    make_folds,
    normalize,
    resolve_dataset,
    synthetic_standin,
)
from haneat.errors import ConfigError, DataError


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# ---------------- loading ----------------
def test_load_csv_reads_raw_values(tmp_path):
    path = write(tmp_path / "toy.csv", "in_0,in_1,out_0\n1,2,3\n4,5,6\n")
    data = load_csv(path, 2, 1)
    assert data.name == "toy"
    assert data.inputs.tolist() == [[1.0, 2.0], [4.0, 5.0]]
    assert data.targets.tolist() == [[3.0], [6.0]]
    assert data.scaling is None


def test_load_csv_infers_shape_from_header(tmp_path):
    path = write(tmp_path / "toy.csv", "in_0,out_0,out_1\n1,2,3\n")
    data = load_csv(path)
    assert (data.n_inputs, data.n_targets) == (1, 2)


def test_incomplete_rows_are_dropped(tmp_path, caplog):
    path = write(tmp_path / "gaps.csv", "in_0,out_0\n1,2\n,3\nx,4\n5,6\n")
    data = load_csv(path)
    assert data.n_rows == 2
    assert data.dropped == 2
    assert "Dropped 2 incomplete rows" in caplog.text


@pytest.mark.parametrize(
    "text",
    [
        "a,b,c\n1,2,3\n",
        "in_0,in_1,out_0\n1,2,3\n",
        "in_0,out_0\n",
        "in_0,out_0\n?,1\n",
        "",
    ],
)
def test_malformed_files_are_data_errors(tmp_path, text):
    path = write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError):
        load_csv(path, 1, 1)


def test_missing_file_and_bad_task(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "absent.csv")
    with pytest.raises(ConfigError):
        load_csv(tmp_path / "absent.csv", task="ranking")


# ---------------- normalisation ----------------
def test_normalize_ranges_and_inverse():
    raw = Dataset(
        name="raw",
        inputs=np.array([[0.0, 10.0], [5.0, 20.0], [10.0, 40.0]]),
        targets=np.array([[100.0], [150.0], [300.0]]),
    )
    data = normalize(raw)
    assert data.inputs.min(axis=0).tolist() == [-1.0, -1.0]
    assert data.inputs.max(axis=0).tolist() == [1.0, 1.0]
    assert data.targets[:, 0].tolist() == pytest.approx([0.0, 0.25, 1.0])
    np.testing.assert_allclose(denormalize_targets(data, data.targets), raw.targets)
    assert normalize(data) is data


def test_constant_columns_map_to_fixed_values(caplog):
    raw = Dataset(name="flat", inputs=np.array([[3.0], [3.0]]), targets=np.array([[7.0], [7.0]]))
    data = normalize(raw)
    assert data.inputs[:, 0].tolist() == [0.0, 0.0]
    assert data.targets[:, 0].tolist() == [0.5, 0.5]
    assert "Constant input column 0" in caplog.text


def test_subset_keeps_scaling():
    data = normalize(synthetic_standin("engine"))
    part = data.subset(np.array([3, 1]))
    assert part.scaling is data.scaling
    assert part.inputs.tolist() == data.inputs[[3, 1]].tolist()


# ---------------- folds ----------------
def test_fold_plans_partition_rows():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        k = int(rng.integers(2, n + 1))
        plan = make_folds(n, k, replicates=2, seed=int(rng.integers(1000)))
        for replicate in range(2):
            sizes = np.bincount(plan.folds[replicate], minlength=k)
            assert sizes.sum() == n
            assert sizes.max() - sizes.min() <= 1
            assert sorted(plan.permutations[replicate].tolist()) == list(range(n))
        for _, _, train, test in plan.splits():
            assert len(np.intersect1d(train, test)) == 0
            assert len(train) + len(test) == n


def test_fold_plans_are_seeded():
    a = make_folds(30, 5, 3, seed=4)
    b = make_folds(30, 5, 3, seed=4)
    assert np.array_equal(a.folds, b.folds)
    assert not np.array_equal(a.folds[0], a.folds[1])
    assert len(list(a.splits())) == 15


def test_fold_plan_errors():
    with pytest.raises(ConfigError):
        make_folds(10, 1, 1, 0)
    with pytest.raises(ConfigError):
        make_folds(3, 5, 1, 0)


def test_export_folds(tmp_path):
    plan = make_folds(6, 3, 2, seed=1)
    frame = pd.read_csv(export_folds(plan, tmp_path / "folds.csv"))
    assert list(frame.columns) == ["replicate", "row", "fold"]
    assert len(frame) == 12
    assert frame[frame.replicate == 1].fold.tolist() == plan.folds[1].tolist()


# ---------------- fixtures and benchmarks ----------------
@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_cover_unit_interval(name):
    data = fixture_targets(name)
    assert data.inputs.shape == (FIXTURE_POINTS, 1)
    assert data.inputs[0, 0] == -1.0 and data.inputs[-1, 0] == 1.0
    assert data.targets.min() >= 0.0 and data.targets.max() <= 1.0
    assert data.scaling is not None
    assert normalize(data) is data


def test_multitarget_fixture_has_two_outputs():
    assert fixture_targets("multitarget_fig4").n_targets == 2
    with pytest.raises(DataError):
        fixture_targets("square_wave")


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_standins_match_benchmark_shapes(name):
    n_inputs, n_targets, task = BENCHMARKS[name]
    data = synthetic_standin(name, seed=2)
    assert (data.n_inputs, data.n_targets, data.task) == (n_inputs, n_targets, task)
    assert np.isfinite(data.inputs).all() and np.isfinite(data.targets).all()


def test_cancer_standin_labels():
    raw = synthetic_standin("cancer")
    assert set(np.unique(raw.targets)) == {2.0, 4.0}
    data = resolve_dataset("cancer", data_dir="no-such-dir")
    assert set(np.unique(data.targets)) == {0.0, 1.0}
    assert data.task == "classification"


def test_resolve_dataset(tmp_path):
    assert resolve_dataset("sigmoid_1d").name == "sigmoid_1d"
    path = write(tmp_path / "engine.csv", "in_0,in_1,out_0,out_1\n0,0,0,0\n1,2,3,4\n2,4,6,9\n")
    from_dir = resolve_dataset("engine", data_dir=tmp_path)
    assert from_dir.n_rows == 3
    assert from_dir.targets.max() == 1.0
    assert resolve_dataset(str(path), task="regression").n_rows == 3
    with pytest.raises(DataError):
        resolve_dataset("nowhere")


def test_convert_uci_cancer(tmp_path):
    src = write(
        tmp_path / "breast-cancer-wisconsin.data",
        "1000025,5,1,1,1,2,1,3,1,1,2\n1057013,8,4,5,1,2,?,7,3,1,4\n1017122,8,10,10,8,7,10,9,7,1,4\n",
    )
    dst = convert_uci_cancer(src, tmp_path / "cancer.csv")
    data = load_csv(dst, 9, 1, task="classification")
    assert data.n_rows == 2
    assert data.dropped == 1
    assert data.targets[:, 0].tolist() == [2.0, 4.0]
