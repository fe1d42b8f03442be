import hashlib
import json

import numpy as np
import pytest

from dnts.data import build_dataset, load_dataset, read_examples, save_dataset, write_examples
from dnts.data.serialization import MAGIC
from dnts.errors import CorruptFileError, SchemaVersionError
from dnts.simkit import SimConfig, generate_orders, generate_trace

ARRAY_FIELDS = ("members", "X", "Y_hist", "input_active", "input_edges", "y", "x_true", "l")


def assert_examples_equal(left, right):
    assert len(left) == len(right)
    for a, b in zip(left, right, strict=True):
        assert (a.item, a.start_day, a.window, a.horizon) == (b.item, b.start_day, b.window, b.horizon)
        for name in ARRAY_FIELDS:
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name), err_msg=name)
        for name in ("input_descendants", "target_descendants"):
            assert getattr(a, name).days == getattr(b, name).days
            np.testing.assert_array_equal(getattr(a, name).pairs, getattr(b, name).pairs)


def assert_datasets_equal(left, right):
    assert left.trace == right.trace
    assert left.orders == right.orders
    assert (left.window, left.horizon, left.split_seed) == (right.window, right.horizon, right.split_seed)
    assert left.promoter_ids == right.promoter_ids
    assert left.item_ids == right.item_ids
    assert set(left.examples) == set(right.examples)
    for split in left.examples:
        assert_examples_equal(left.examples[split], right.examples[split])
    for day in left.days:
        np.testing.assert_array_equal(left.incidences[day].dense(), right.incidences[day].dense())


def tree_digest(path):
    digest = hashlib.sha256()
    for file in sorted(p for p in path.rglob("*") if p.is_file()):
        digest.update(str(file.relative_to(path)).encode())
        digest.update(file.read_bytes())
    return digest.hexdigest()


def test_toy_network_round_trip(tmp_path, toy_two_days):
    trace, orders = toy_two_days
    dataset = build_dataset(trace, orders, window=1, horizon=1, split_ratios=(1.0, 0.0, 0.0))
    save_dataset(dataset, tmp_path / "toy")
    loaded = load_dataset(tmp_path / "toy")
    assert_datasets_equal(dataset, loaded)
    assert loaded.examples["train"][0].y[:, 0].tolist() == [6.0, 2.0, 0.0, 0.0]


def test_layout_and_manifest(tmp_path, micro_dataset):
    save_dataset(micro_dataset, tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert (manifest["window"], manifest["horizon"], manifest["split_seed"]) == (3, 1, 0)
    assert (tmp_path / "trace.jsonl").exists() and (tmp_path / "orders.jsonl").exists()
    for split, items in manifest["splits"].items():
        for item in items:
            assert (tmp_path / "examples" / split / f"{item}.bin").read_bytes().startswith(MAGIC)


def test_large_round_trip_is_hash_identical(tmp_path):
    config = SimConfig(n_items=100, n_days=5, n_promoters=300, promoters_per_item_range=(5, 20), edge_budget=20)
    trace = generate_trace(config)
    dataset = build_dataset(trace, generate_orders(trace, config), window=3, horizon=1)
    save_dataset(dataset, tmp_path / "first")
    save_dataset(load_dataset(tmp_path / "first"), tmp_path / "second")
    assert tree_digest(tmp_path / "first") == tree_digest(tmp_path / "second")


def test_schema_version_mismatch(tmp_path, micro_dataset):
    save_dataset(micro_dataset, tmp_path)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    manifest["schema_version"] = 99
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(SchemaVersionError):
        load_dataset(tmp_path)


def test_corrupted_example_file(tmp_path, micro_dataset):
    examples = micro_dataset.examples["train"][:2]
    path = tmp_path / "examples.bin"
    write_examples(path, examples)
    assert_examples_equal(read_examples(path), examples)

    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(CorruptFileError):
        read_examples(path)
    path.write_bytes(b"NOTMAGIC" + data[8:])
    with pytest.raises(CorruptFileError):
        read_examples(path)


def test_corrupted_manifest(tmp_path, micro_dataset):
    save_dataset(micro_dataset, tmp_path)
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(CorruptFileError):
        load_dataset(tmp_path)


def test_missing_dataset(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "absent")
