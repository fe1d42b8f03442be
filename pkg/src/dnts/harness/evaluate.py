import csv
import logging
import time
from collections import defaultdict
from collections.abc import Iterable, Iterator
from pathlib import Path

import numpy as np
import torch
from torch import Tensor

from dnts.data import PromotionDataset, TrainingExample, make_dataloader
from dnts.errors import DataError
from dnts.network import DNTSModel
from dnts.typing import ExampleInput, ForwardOutput

from .metrics import mape_metric, msle_metric
from .report import MetricsReport

logger = logging.getLogger("dnts")


class GlobalCache:
    """Hypergraph encodings keyed by input days; valid for one parameter state."""

    def __init__(self, model: DNTSModel, dataset: PromotionDataset):
        self.model = model
        self.dataset = dataset
        self.cache: dict[tuple[int, ...], Tensor] = {}

    def __call__(self, days: tuple[int, ...]) -> Tensor | None:
        if not self.model.use_gcn:
            return None
        if days not in self.cache:
            hypergraph = self.dataset.hypergraph(days, self.model.device)
            self.cache[days] = self.model.global_encode(hypergraph)
        return self.cache[days]


def predict(
    model: DNTSModel,
    dataset: PromotionDataset,
    examples: Iterable[TrainingExample],
    seed: int = 0,
) -> Iterator[tuple[TrainingExample, ExampleInput, ForwardOutput]]:
    model.eval()
    loader = make_dataloader(list(examples), dataset, model.cfg.k, model.input_signal, seed=seed, device=model.device)
    global_cache = GlobalCache(model, dataset)
    for batch in loader:
        for example, inp in batch:
            with torch.no_grad():
                output = model(inp, global_repr=global_cache(inp.days))
            yield example, inp, output


def count_filter_violations(output: ForwardOutput, delta: float) -> int:
    """Rows with l_hat < delta whose coefficient row is not exactly zero."""
    if output.S_hat is None or output.l_hat is None:
        return 0
    below = output.l_hat.transpose(0, 1) < delta  # [Δt, M]
    nonzero_rows = (output.S_hat != 0).any(dim=-1)  # [Δt, M]
    return int((below & nonzero_rows).sum().item())


def _write_predictions(path: Path, rows: list[tuple]):
    with open(path, "w", newline="") as w:
        writer = csv.writer(w)
        writer.writerow(["item", "start_day", "promoter", "step", "y", "y_hat"])
        writer.writerows(rows)


def evaluate(
    model: DNTSModel,
    dataset: PromotionDataset,
    split: str = "test",
    seed: int = 0,
    config_hash: str = "",
    predictions_path: str | Path | None = None,
) -> MetricsReport:
    examples = dataset.examples.get(split, [])
    if len(examples) == 0:
        raise DataError(f"split {split!r} has no examples")
    tick = time.time()
    targets, preds = [], []
    self_targets, self_preds = [], []
    per_item: dict[int, tuple[list, list]] = defaultdict(lambda: ([], []))
    violations = 0
    rows = []
    for example, inp, output in predict(model, dataset, examples, seed):
        y = model.target(inp).y.cpu().numpy().astype(np.float64)
        y_hat = output.y_hat.cpu().numpy().astype(np.float64)
        targets.append(y.ravel())
        preds.append(y_hat.ravel())
        per_item[example.item][0].append(y.ravel())
        per_item[example.item][1].append(y_hat.ravel())
        if model.mode == "s2p":
            self_targets.append(inp.x.cpu().numpy().ravel())
            self_preds.append(output.X_hat.cpu().numpy().ravel())
            violations += count_filter_violations(output, model.cfg.delta)
        if predictions_path is not None:
            for m, t in np.ndindex(*y.shape):
                rows.append((example.item, example.start_day, int(example.members[m]), t, y[m, t], y_hat[m, t]))

    y_all, y_hat_all = np.concatenate(targets), np.concatenate(preds)
    report = MetricsReport(
        split=split,
        mode=model.mode,
        use_gcn=model.use_gcn,
        msle=msle_metric(y_all, y_hat_all),
        mape=mape_metric(y_all, y_hat_all),
        num_examples=len(examples),
        per_item={
            str(item): {
                "msle": msle_metric(np.concatenate(ys), np.concatenate(ps)),
                "mape": mape_metric(np.concatenate(ys), np.concatenate(ps)),
            }
            for item, (ys, ps) in sorted(per_item.items())
        },
        runtime=time.time() - tick,
        config_hash=config_hash,
        filter_violations=violations,
        self_sales_msle=msle_metric(np.concatenate(self_targets), np.concatenate(self_preds))
        if len(self_targets) > 0
        else None,
    )
    if violations > 0:
        logger.warning(f"{violations} filtered rows carry non-zero coefficients")
    if predictions_path is not None:
        _write_predictions(Path(predictions_path), rows)
    return report
