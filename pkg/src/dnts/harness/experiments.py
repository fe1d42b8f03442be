import csv
import json
import logging
import time
from pathlib import Path

import numpy as np

from dnts.config import MODES, Config
from dnts.data import PromotionDataset
from dnts.errors import DataError, UnknownModeError

from .evaluate import evaluate
from .metrics import mape_metric, msle_metric
from .report import MetricsReport, config_hash
from .trainer import Trainer, clone_config, load_model

logger = logging.getLogger("dnts")


def run_mode(
    mode: str,
    dataset: PromotionDataset,
    config: Config,
    use_gcn: bool | None = None,
    seed: int | None = None,
    log_dir: str | Path | None = None,
) -> MetricsReport:
    """Train one configuration and report test metrics of its best-validation checkpoint."""
    if mode not in MODES:
        raise UnknownModeError(f"unknown mode {mode!r}, expected one of {MODES}")
    overrides = {"mode": mode}
    if use_gcn is not None:
        overrides["use_gcn"] = use_gcn
    if seed is not None:
        overrides["seed"] = seed
    config = clone_config(config, **overrides)
    if log_dir is not None:
        config.log_dir = str(log_dir)

    trainer = Trainer(config, dataset)
    trainer.fit()
    model, _ = load_model(trainer.save_dir / "best.ckpt", config.train.device)
    split = "test" if len(dataset.examples.get("test", [])) > 0 else "train"
    report = evaluate(
        model,
        dataset,
        split,
        config.train.seed,
        trainer.config_hash,
        predictions_path=trainer.log_dir / "predictions.csv",
    )
    report.save(trainer.log_dir / "report.json")
    logger.info(
        f"{mode} gcn={config.train.use_gcn} seed={config.train.seed}: msle {report.msle:.4f} mape {report.mape:.2f}"
    )
    return report


def run_ablation(
    dataset: PromotionDataset,
    config: Config,
    seeds: list[int] | None = None,
    modes: tuple[str, ...] = MODES,
) -> dict[str, dict[str, float]]:
    """{+GCN, -GCN} x modes with shared seeds; each cell holds the seed-mean test MSLE and MAPE."""
    seeds = list(config.train.ablation_seeds) if seeds is None else seeds
    root = Path(config.log_dir)
    table: dict[str, dict[str, float]] = {}
    for use_gcn in (True, False):
        for mode in modes:
            cell = f"{mode}{'+' if use_gcn else '-'}gcn"
            reports = [
                run_mode(mode, dataset, config, use_gcn, seed, root / cell / f"seed-{seed}") for seed in seeds
            ]
            table[cell] = {
                "msle": float(np.mean([r.msle for r in reports])),
                "mape": _nanmean([r.mape for r in reports]),
                "msle_std": float(np.std([r.msle for r in reports])),
                "num_seeds": len(seeds),
            }
    write_ablation(root, table)
    return table


def _nanmean(values: list[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if len(finite) > 0 else float("nan")


def write_ablation(root: Path, table: dict[str, dict[str, float]]):
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "ablation.json", "w") as w:
        state = {k: {n: (v if np.isfinite(v) else None) for n, v in row.items()} for k, row in table.items()}
        json.dump(state, w, indent=2)
    with open(root / "ablation.csv", "w", newline="") as w:
        writer = csv.writer(w)
        writer.writerow(["variant", "msle", "mape", "msle_std", "num_seeds"])
        for cell, row in table.items():
            writer.writerow([cell, row["msle"], row["mape"], row["msle_std"], row["num_seeds"]])


def _baseline(
    dataset: PromotionDataset,
    split: str,
    name: str,
    target: str,
    forecast,
) -> MetricsReport:
    examples = dataset.examples.get(split, [])
    if len(examples) == 0:
        raise DataError(f"split {split!r} has no examples")
    tick = time.time()
    ys, ps = [], []
    for example in examples:
        history = example.X if target == "self_sales" else example.Y_hist
        y = example.x_true if target == "self_sales" else example.y
        prediction = np.repeat(forecast(history)[:, None], example.horizon, axis=1)
        ys.append(y.ravel())
        ps.append(prediction.ravel())
    y_all, p_all = np.concatenate(ys), np.concatenate(ps)
    return MetricsReport(
        split=split,
        mode=name,
        use_gcn=False,
        msle=msle_metric(y_all, p_all),
        mape=mape_metric(y_all, p_all),
        num_examples=len(examples),
        runtime=time.time() - tick,
        config_hash=config_hash({"baseline": name, "target": target}),
    )


def baseline_persistence(dataset: PromotionDataset, split: str = "test", target: str = "propagation") -> MetricsReport:
    """Carries the last observed day forward: y_hat^{T+t} = y^T."""
    return _baseline(dataset, split, "persistence", target, lambda history: history[:, -1])


def baseline_mean(dataset: PromotionDataset, split: str = "test", target: str = "propagation") -> MetricsReport:
    """Carries the per-promoter window mean forward."""
    return _baseline(dataset, split, "mean", target, lambda history: history.mean(axis=1))
