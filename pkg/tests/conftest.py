import numpy as np
import pytest
import torch

from dnts.config import Config, DataConfig, ModelConfig, TrainConfig
from dnts.data import build_dataset
from dnts.simkit import SimConfig, generate_orders, generate_trace, toy_network
from dnts.typing import OrderRecord, PromotionSnapshot


def small_sim_config(**kwargs) -> SimConfig:
    params = dict(
        n_items=6,
        n_days=6,
        n_promoters=80,
        promoters_per_item_range=[6, 15],
        edge_budget=20,
        order_rate=1.0,
        rng_seed=0,
    )
    params.update(kwargs)
    return SimConfig(**params)


def tiny_model_config(**kwargs) -> ModelConfig:
    params = dict(
        d_m=4,
        d_r=4,
        kernel_sizes=[2, 3],
        temporal_channels=4,
        temporal_layers=1,
        local_hidden=4,
        global_hidden=4,
        attention_hidden=4,
        k=3,
    )
    params.update(kwargs)
    return ModelConfig(**params)


def micro_config(tmp_path, **train_kwargs) -> Config:
    train = dict(max_epochs=2, batch_size=4, patience=2, seed=0)
    train.update(train_kwargs)
    return Config(
        log_dir=str(tmp_path / "run"),
        sim=small_sim_config(),
        data=DataConfig(window=3, horizon=1),
        model=tiny_model_config(),
        train=TrainConfig(**train),
    )


def shift_day(snapshot: PromotionSnapshot, orders: list[OrderRecord], day: int, first_id: int):
    shifted = PromotionSnapshot(snapshot.item, day, snapshot.promoters, snapshot.edges, dict(snapshot.self_sales))
    shifted_orders = [
        OrderRecord(first_id + i, o.item, day, o.sales, o.chain) for i, o in enumerate(orders) if o.day == snapshot.day
    ]
    return shifted, shifted_orders


def toy_dataset(num_days: int = 4, window: int = 3):
    """The toy network repeated on `num_days` consecutive days, as a single-item training set."""
    snapshot, orders = toy_network()
    trace, all_orders = [snapshot], list(orders)
    for day in range(1, num_days):
        shifted, shifted_orders = shift_day(snapshot, orders, day, len(all_orders))
        trace.append(shifted)
        all_orders.extend(shifted_orders)
    return build_dataset(trace, all_orders, window=window, horizon=1, split_ratios=(1.0, 0.0, 0.0))


@pytest.fixture
def toy():
    return toy_network()


@pytest.fixture
def toy_two_days():
    """The toy network repeated on days 0 and 1."""
    snapshot, orders = toy_network()
    day1, orders1 = shift_day(snapshot, orders, 1, len(orders))
    return [snapshot, day1], orders + orders1


@pytest.fixture(scope="session")
def small_trace():
    config = small_sim_config()
    trace = generate_trace(config)
    return config, trace, generate_orders(trace, config)


@pytest.fixture(scope="session")
def micro_dataset(small_trace):
    _, trace, orders = small_trace
    return build_dataset(trace, orders, window=3, horizon=1, split_seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)
