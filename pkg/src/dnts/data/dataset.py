"""Dataset directory: trace.jsonl, orders.jsonl, examples/<split>/<item>.bin and manifest.json."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import torch

from dnts.errors import CorruptFileError, SchemaVersionError
from dnts.simkit.io import read_orders, read_trace, write_orders, write_trace
from dnts.typing import Hypergraph, ItemId, OrderRecord, PromoterId, PromotionSnapshot

from .examples import TrainingExample, build_examples
from .incidence import IncidenceMatrix, build_incidence, build_vocabulary
from .serialization import SCHEMA_VERSION, read_examples, write_examples
from .split import split_items

logger = logging.getLogger("dnts")

SPLITS = ("train", "val", "test")


@dataclass
class PromotionDataset:
    trace: list[PromotionSnapshot]
    orders: list[OrderRecord]
    window: int
    horizon: int
    promoter_ids: tuple[PromoterId, ...]
    item_ids: tuple[ItemId, ...]
    examples: dict[str, list[TrainingExample]]
    split_seed: int = 0
    split_ratios: tuple[float, float, float] = (0.6, 0.1, 0.3)
    max_members: int | None = 512
    incidences: dict[int, IncidenceMatrix] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.incidences) == 0:
            for day in self.days:
                self.incidences[day] = build_incidence(self.trace, day, self.promoter_ids, self.item_ids)

    @property
    def days(self) -> tuple[int, ...]:
        return tuple(sorted({s.day for s in self.trace}))

    @property
    def num_promoters(self) -> int:
        return len(self.promoter_ids)

    @property
    def num_items(self) -> int:
        return len(self.item_ids)

    @cached_property
    def promoter_row(self) -> dict[PromoterId, int]:
        return {m: i for i, m in enumerate(self.promoter_ids)}

    @cached_property
    def item_row(self) -> dict[ItemId, int]:
        return {item: i for i, item in enumerate(self.item_ids)}

    def split_items(self, split: str) -> list[ItemId]:
        return sorted({example.item for example in self.examples[split]})

    def hypergraph(self, days: Sequence[int], device: str | torch.device = "cpu") -> Hypergraph:
        """Incidence pairs B^t of `days` as index tensors."""
        promoter_rows, item_rows = [], []
        for day in days:
            incidence = self.incidences[day]
            promoter_rows.append(torch.as_tensor(incidence.promoter_rows, dtype=torch.long, device=device))
            item_rows.append(torch.as_tensor(incidence.item_rows, dtype=torch.long, device=device))
        return Hypergraph(tuple(days), promoter_rows, item_rows, self.num_promoters, self.num_items)


def build_dataset(
    trace: list[PromotionSnapshot],
    orders: list[OrderRecord],
    window: int,
    horizon: int,
    split_seed: int = 0,
    split_ratios: tuple[float, float, float] = (0.6, 0.1, 0.3),
    max_members: int | None = 512,
) -> PromotionDataset:
    promoter_ids, item_ids = build_vocabulary(trace)
    train, val, test = split_items(item_ids, split_ratios, split_seed)
    examples = build_examples(trace, orders, window, horizon, max_members=max_members)
    split_of = {item: name for name, items in zip(SPLITS, (train, val, test), strict=True) for item in items}
    grouped: dict[str, list[TrainingExample]] = {name: [] for name in SPLITS}
    for example in examples:
        grouped[split_of[example.item]].append(example)
    logger.info(
        f"dataset: {len(item_ids)} items, {len(promoter_ids)} promoters, "
        + ", ".join(f"{name} {len(v)} examples" for name, v in grouped.items())
    )
    return PromotionDataset(
        trace=trace,
        orders=orders,
        window=window,
        horizon=horizon,
        promoter_ids=promoter_ids,
        item_ids=item_ids,
        examples=grouped,
        split_seed=split_seed,
        split_ratios=tuple(split_ratios),
        max_members=max_members,
    )


def save_dataset(dataset: PromotionDataset, path: str | Path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    write_trace(path / "trace.jsonl", dataset.trace)
    write_orders(path / "orders.jsonl", dataset.orders)
    splits: dict[str, list[ItemId]] = {}
    for split, examples in dataset.examples.items():
        by_item: dict[ItemId, list[TrainingExample]] = defaultdict(list)
        for example in examples:
            by_item[example.item].append(example)
        for item, item_examples in by_item.items():
            write_examples(path / "examples" / split / f"{item}.bin", item_examples)
        splits[split] = sorted(by_item)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "window": dataset.window,
        "horizon": dataset.horizon,
        "split_seed": dataset.split_seed,
        "split_ratios": list(dataset.split_ratios),
        "max_members": dataset.max_members,
        "promoters": list(dataset.promoter_ids),
        "items": list(dataset.item_ids),
        "splits": splits,
    }
    with open(path / "manifest.json", "w") as w:
        json.dump(manifest, w, indent=2, sort_keys=True)
    return path


def load_dataset(path: str | Path) -> PromotionDataset:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{manifest_path} does not exist")
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise CorruptFileError(f"{manifest_path}: {e}") from e
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(str(manifest_path), manifest.get("schema_version"), SCHEMA_VERSION)

    try:
        examples = {
            split: [e for item in items for e in read_examples(path / "examples" / split / f"{item}.bin")]
            for split, items in manifest["splits"].items()
        }
        return PromotionDataset(
            trace=read_trace(path / "trace.jsonl"),
            orders=read_orders(path / "orders.jsonl"),
            window=int(manifest["window"]),
            horizon=int(manifest["horizon"]),
            promoter_ids=tuple(int(m) for m in manifest["promoters"]),
            item_ids=tuple(int(i) for i in manifest["items"]),
            examples=examples,
            split_seed=int(manifest["split_seed"]),
            split_ratios=tuple(manifest["split_ratios"]),
            max_members=manifest["max_members"],
        )
    except (KeyError, TypeError) as e:
        raise CorruptFileError(f"{manifest_path}: malformed manifest ({e})") from e
