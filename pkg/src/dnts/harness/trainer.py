import copy
import csv
import math
import time
from pathlib import Path

import numpy as np
import torch
from omegaconf import OmegaConf
from torch.utils.data import DataLoader
from tqdm import tqdm

from dnts.config import Config
from dnts.data import PromotionDataset, TrainingExample, make_dataloader
from dnts.errors import DataError, DivergenceError
from dnts.network import DNTSModel, build_model
from dnts.typing import ExampleInput
from dnts.utils import create_logger, load_checkpoint, save_checkpoint, seed_everything

from .evaluate import GlobalCache, evaluate
from .report import config_hash

HISTORY_COLUMNS = ("epoch", "train_loss", "train_main", "train_aux", "val_msle", "val_mape", "tau", "time")


class Trainer:
    def __init__(self, config: Config, dataset: PromotionDataset):
        self.config = config
        self.dataset = dataset
        self.device = config.train.device
        self.log_dir = Path(config.log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.save_dir = self.log_dir / "save"
        self.save_dir.mkdir(parents=True, exist_ok=True)

        self.config_dict = config.to_dict()
        self.config_hash = config_hash(self.config_dict)
        OmegaConf.save(OmegaConf.create(self.config_dict), self.log_dir / "config.yaml")
        self.logger = create_logger(logfile=self.log_dir / "train.log")

        if len(dataset.examples.get("train", [])) == 0:
            raise DataError("training split is empty")
        seed_everything(config.train.seed)
        self.generator = torch.Generator().manual_seed(config.train.seed) if self.device == "cpu" else None
        self.model: DNTSModel = build_model(config, dataset.num_promoters, dataset.num_items)
        self.model.to(self.device)
        self.setup_data()
        self.setup_train()

        self.epoch = 0
        self.step = 0
        self.tau = config.model.tau
        self.history: list[dict[str, float]] = []

    def setup_data(self):
        cfg = self.config
        self.train_dataloader: DataLoader = make_dataloader(
            self.dataset.examples["train"],
            self.dataset,
            cfg.model.k,
            self.model.input_signal,
            batch_size=cfg.train.batch_size,
            shuffle=True,
            seed=cfg.train.seed,
            device=self.device,
        )

    def setup_train(self):
        opt = self.config.train.opt
        self.optimizer = torch.optim.Adam(
            self.model.parameters(),
            opt.lr,
            betas=tuple(opt.betas),
            eps=opt.eps,
            weight_decay=opt.weight_decay,
        )

    def fit(self) -> list[dict[str, float]]:
        cfg = self.config.train
        train_examples = self.dataset.examples["train"]
        monitor_split = "val" if len(self.dataset.examples.get("val", [])) > 0 else "train"
        if monitor_split == "train":
            self.logger.warning("validation split is empty, early stopping monitors the training split")
        self.logger.info(
            f"mode {cfg.mode} gcn {cfg.use_gcn}: {len(train_examples)} train examples, "
            f"{sum(p.numel() for p in self.model.parameters())} parameters"
        )

        best_msle, bad_epochs = float("inf"), 0
        for epoch in tqdm(range(cfg.max_epochs), desc="epoch", leave=False, disable=None):
            self.epoch = epoch
            tick = time.time()
            self.model.train()
            logs: dict[str, list[float]] = {"loss": [], "main": [], "aux": []}
            for batch in self.train_dataloader:
                for k, v in self.train_batch(batch).items():
                    logs[k].append(v)

            report = evaluate(self.model, self.dataset, monitor_split, cfg.seed, self.config_hash)
            info = {
                "epoch": epoch,
                "train_loss": float(np.mean(logs["loss"])),
                "train_main": float(np.mean(logs["main"])),
                "train_aux": float(np.mean(logs["aux"])) if len(logs["aux"]) > 0 else 0.0,
                "val_msle": report.msle,
                "val_mape": report.mape,
                "tau": self.tau,
                "time": time.time() - tick,
            }
            self.history.append(info)
            self.write_history()
            if epoch % cfg.print_every == 0:
                text = " ".join(f"{k}:{v:.4f}" for k, v in info.items() if k != "epoch")
                self.logger.info(f"epoch {epoch} : {text}")

            if report.msle < best_msle:
                best_msle, bad_epochs = report.msle, 0
                self.save_checkpoint("best.ckpt", {"epoch": epoch, "val_msle": report.msle})
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.patience:
                    self.logger.info(f"early stopping at epoch {epoch} (best val msle {best_msle:.4f})")
                    break
            self.tau = max(cfg.tau_min, self.tau * cfg.tau_decay)
            self.model.set_temperature(self.tau)

        self.save_checkpoint("last.ckpt", {"epoch": self.epoch})
        if not (self.save_dir / "best.ckpt").exists():
            self.save_checkpoint("best.ckpt", {"epoch": self.epoch})
        return self.history

    def train_batch(self, batch: list[tuple[TrainingExample, ExampleInput]]) -> dict[str, float]:
        global_cache = GlobalCache(self.model, self.dataset)
        losses, mains, auxs = [], [], []
        for _, inp in batch:
            loss, terms, _ = self.model.forward_train(
                inp, global_repr=global_cache(inp.days), generator=self.generator
            )
            losses.append(loss)
            mains.append(terms["main"])
            if "aux" in terms:
                auxs.append(terms["aux"])
        loss = torch.stack(losses).mean()

        info = {"loss": loss.item(), "main": torch.stack(mains).mean().item()}
        if len(auxs) > 0:
            info["aux"] = torch.stack(auxs).mean().item()
        if not all(math.isfinite(v) for v in info.values()):
            raise DivergenceError(self.epoch, self.step, info)

        loss.backward()
        torch.nn.utils.clip_grad_norm_(self.model.parameters(), self.config.train.opt.clip_grad)
        self.optimizer.step()
        self.optimizer.zero_grad()
        self.step += 1
        return info

    def write_history(self):
        with open(self.log_dir / "history.csv", "w", newline="") as w:
            writer = csv.writer(w)
            writer.writerow(HISTORY_COLUMNS)
            for info in self.history:
                writer.writerow([info[k] for k in HISTORY_COLUMNS])

    def save_checkpoint(self, filename: str, metadata: dict):
        metadata = {
            **metadata,
            "num_promoters": self.dataset.num_promoters,
            "num_items": self.dataset.num_items,
            "config_hash": self.config_hash,
        }
        save_checkpoint(self.save_dir / filename, self.model, self.config_dict, metadata)


def load_model(path: str | Path, device: str = "cpu") -> tuple[DNTSModel, Config]:
    """Rebuild a model and its configuration from a checkpoint file."""
    state_dict, config_dict, metadata = load_checkpoint(path)
    config: Config = OmegaConf.to_object(OmegaConf.merge(OmegaConf.structured(Config), config_dict))
    model = build_model(config, metadata["num_promoters"], metadata["num_items"])
    model.load_state_dict(state_dict)
    model.to(device)
    return model, config


def clone_config(config: Config, **train_overrides) -> Config:
    config = copy.deepcopy(config)
    for key, value in train_overrides.items():
        setattr(config.train, key, value)
    return config
