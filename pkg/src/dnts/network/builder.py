from omegaconf import DictConfig

from dnts.config import Config

from .dnts import DNTSModel


def build_model(config: Config | DictConfig, num_promoters: int, num_items: int) -> DNTSModel:
    return DNTSModel(
        config.model,
        num_promoters,
        num_items,
        window=config.data.window,
        horizon=config.data.horizon,
        mode=config.train.mode,
        use_gcn=config.train.use_gcn,
    )
