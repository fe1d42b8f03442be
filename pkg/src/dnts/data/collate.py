from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from dnts.typing import ExampleInput

from .dataset import PromotionDataset
from .descendants import sample_descendants
from .examples import TrainingExample


def sample_message_pairs(example: TrainingExample, k: int, rng: np.random.Generator) -> np.ndarray:
    """[3, P] (day position, root, sampled descendant) over the input days; resampled on every call."""
    rows = []
    for t in range(example.window):
        for root, descendants in example.input_descendants.grouped(t).items():
            sampled = sample_descendants(descendants, k, rng)
            rows.append(np.stack([np.full_like(sampled, t), np.full_like(sampled, root), sampled]))
    if len(rows) == 0:
        return np.zeros((3, 0), dtype=np.int64)
    return np.concatenate(rows, axis=1)


def make_example_input(
    example: TrainingExample,
    dataset: PromotionDataset,
    k: int,
    rng: np.random.Generator,
    signal: str = "self_sales",
    device: str | torch.device = "cpu",
    dtype: torch.dtype = torch.float32,
) -> ExampleInput:
    """Tensors of one example; `signal="propagation"` feeds the historical propagation scale (P->P)."""
    assert signal in ("self_sales", "propagation"), f"unknown input signal {signal}"
    values = example.X if signal == "self_sales" else example.Y_hist
    member_rows = [dataset.promoter_row[int(m)] for m in example.members]
    return ExampleInput(
        item_row=dataset.item_row[example.item],
        member_rows=torch.tensor(member_rows, dtype=torch.long, device=device),
        signal=torch.as_tensor(values, dtype=dtype, device=device),
        message_pairs=torch.as_tensor(sample_message_pairs(example, k, rng), dtype=torch.long, device=device),
        days=example.input_days,
        y=torch.as_tensor(example.y, dtype=dtype, device=device),
        x=torch.as_tensor(example.x_true, dtype=dtype, device=device),
        active=torch.as_tensor(example.l, dtype=dtype, device=device),
        descendants=torch.as_tensor(example.S_true, dtype=dtype, device=device),
    )


class ExampleInputDataset(Dataset):
    """Examples of one split as model inputs; descendants are resampled on every access.

    The sampling generator is owned by the dataset, so loaders must run in the main process.
    """

    def __init__(
        self,
        examples: Sequence[TrainingExample],
        dataset: PromotionDataset,
        k: int,
        signal: str = "self_sales",
        seed: int = 0,
        device: str | torch.device = "cpu",
    ):
        self.examples = list(examples)
        self.dataset = dataset
        self.k = k
        self.signal = signal
        self.device = device
        self.rng = np.random.default_rng(seed)

    def __len__(self):
        return len(self.examples)

    def __getitem__(self, index: int) -> tuple[TrainingExample, ExampleInput]:
        example = self.examples[index]
        return example, make_example_input(example, self.dataset, self.k, self.rng, self.signal, self.device)


def collate_fn(batch: list[tuple[TrainingExample, ExampleInput]]) -> list[tuple[TrainingExample, ExampleInput]]:
    # sub-tables differ in size, a batch stays a list of examples
    return batch


def make_dataloader(
    examples: Sequence[TrainingExample],
    dataset: PromotionDataset,
    k: int,
    signal: str = "self_sales",
    batch_size: int = 1,
    shuffle: bool = False,
    seed: int = 0,
    device: str | torch.device = "cpu",
) -> DataLoader:
    return DataLoader(
        ExampleInputDataset(examples, dataset, k, signal, seed, device),
        batch_size=batch_size,
        shuffle=shuffle,
        num_workers=0,
        collate_fn=collate_fn,
        generator=torch.Generator().manual_seed(seed),
    )
