from dataclasses import dataclass, field

from dnts.errors import ConfigError


@dataclass
class SimConfig:
    n_items: int = 100
    n_days: int = 20
    n_promoters: int = 2_000
    promoters_per_item_range: list[int] = field(default_factory=lambda: [20, 200])
    edge_budget: int = 400  # max retweet edges per snapshot
    burst_probability: float = 0.1
    burst_multiplier: float = 3.0
    order_rate: float = 0.6
    mean_sales: float = 5.0
    rng_seed: int = 0

    # NOTE: latent dynamics
    active_fraction: float = 0.2
    retweet_probability: float = 0.8
    extra_edge_ratio: float = 0.1

    def validate(self) -> None:
        lo, hi = self.promoters_per_item_range
        if self.n_items <= 0 or self.n_promoters <= 0:
            raise ConfigError(f"n_items and n_promoters must be positive ({self.n_items}, {self.n_promoters})")
        if self.n_days < 0:
            raise ConfigError(f"n_days must be non-negative ({self.n_days})")
        if not (0 < lo <= hi):
            raise ConfigError(f"invalid promoters_per_item_range {(lo, hi)}")
        if hi > self.n_promoters:
            raise ConfigError(f"promoters_per_item_range upper bound {hi} exceeds n_promoters {self.n_promoters}")
        if self.edge_budget <= 0:
            raise ConfigError(f"edge_budget must be positive ({self.edge_budget})")
        capacity = hi * (hi - 1) // 2
        if self.edge_budget > capacity:
            raise ConfigError(
                f"edge_budget {self.edge_budget} exceeds complete-DAG capacity {capacity} of {hi} promoters"
            )
        if not (0.0 <= self.burst_probability <= 1.0):
            raise ConfigError(f"burst_probability must lie in [0, 1] ({self.burst_probability})")
        if self.burst_multiplier < 1.0:
            raise ConfigError(f"burst_multiplier must be >= 1 ({self.burst_multiplier})")
        if self.order_rate < 0 or self.mean_sales < 1.0:
            raise ConfigError(f"order_rate must be >= 0 and mean_sales >= 1 ({self.order_rate}, {self.mean_sales})")
        if not (0.0 < self.active_fraction <= 1.0):
            raise ConfigError(f"active_fraction must lie in (0, 1] ({self.active_fraction})")
        if not (0.0 <= self.retweet_probability <= 1.0):
            raise ConfigError(f"retweet_probability must lie in [0, 1] ({self.retweet_probability})")
