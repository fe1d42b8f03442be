from dataclasses import dataclass, field

from dnts.errors import ConfigError, UnknownModeError
from dnts.simkit.config import SimConfig

MODES = ("p2p", "s2s", "s2p")


@dataclass
class DataConfig:
    path: str = "data/dnts"
    window: int = 7  # T
    horizon: int = 1  # Δt
    split_ratios: list[float] = field(default_factory=lambda: [0.6, 0.1, 0.3])
    split_seed: int = 0
    max_members: int = 512


@dataclass
class ModelConfig:
    d_m: int = 32
    d_r: int = 32
    kernel_sizes: list[int] = field(default_factory=lambda: [2, 3, 6, 7])
    temporal_channels: int = 16
    temporal_layers: int = 2
    local_hidden: int = 32
    global_hidden: int = 32
    attention_hidden: int = 16

    # NOTE: decoder
    delta: float = 0.5  # activation threshold δ
    tau: float = 1.0  # Gumbel temperature
    hard_gate: bool = True
    k: int = 20  # descendant sample size

    # NOTE: loss
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0
    structure_target: str = "gate"  # gate | coefficient

    def validate(self, window: int | None = None) -> None:
        dims = (
            self.d_m, self.d_r, self.temporal_channels, self.local_hidden, self.global_hidden, self.attention_hidden
        )
        if min(dims) <= 0 or self.temporal_layers < 0:
            raise ConfigError(f"model dimensions must be positive {dims}")
        if len(self.kernel_sizes) == 0 or min(self.kernel_sizes) <= 0:
            raise ConfigError(f"invalid kernel_sizes {tuple(self.kernel_sizes)}")
        if self.temporal_channels % len(self.kernel_sizes) != 0:
            raise ConfigError(
                f"temporal_channels {self.temporal_channels} is not divisible by {len(self.kernel_sizes)} kernels"
            )
        if window is not None and window < max(self.kernel_sizes):
            raise ConfigError(f"window {window} is shorter than the largest kernel {max(self.kernel_sizes)}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1) ({self.delta})")
        if self.tau <= 0 or self.k < 1:
            raise ConfigError(f"tau must be positive and k >= 1 ({self.tau}, {self.k})")
        if self.structure_target not in ("gate", "coefficient"):
            raise ConfigError(f"structure_target must be gate or coefficient ({self.structure_target})")


@dataclass
class OptimizerConfig:
    lr: float = 1e-3
    eps: float = 1e-8
    betas: list[float] = field(default_factory=lambda: [0.9, 0.999])
    weight_decay: float = 0.0
    clip_grad: float = 5.0


@dataclass
class TrainConfig:
    mode: str = "s2p"
    use_gcn: bool = True
    max_epochs: int = 100
    batch_size: int = 8
    patience: int = 10
    seed: int = 0
    device: str = "cpu"
    print_every: int = 1
    tau_decay: float = 1.0  # per-epoch multiplicative Gumbel temperature annealing
    tau_min: float = 0.1
    ablation_seeds: list[int] = field(default_factory=lambda: [0, 1, 2])

    opt: OptimizerConfig = field(default_factory=OptimizerConfig)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise UnknownModeError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.max_epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ConfigError(
                f"max_epochs, batch_size and patience must be positive ({self.max_epochs}, {self.batch_size}, "
                f"{self.patience})"
            )
        if self.opt.lr <= 0 or self.opt.clip_grad <= 0:
            raise ConfigError(f"lr and clip_grad must be positive ({self.opt.lr}, {self.opt.clip_grad})")


@dataclass
class Config:
    log_dir: str = "runs/dnts"
    sim: SimConfig = field(default_factory=SimConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self) -> None:
        self.sim.validate()
        self.model.validate(self.data.window)
        self.train.validate()
        if self.data.window < 1 or self.data.horizon < 1:
            raise ConfigError(f"window and horizon must be positive ({self.data.window}, {self.data.horizon})")

    def to_dict(self) -> dict:
        return config_to_dict(self)


def config_to_dict(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {name: config_to_dict(getattr(obj, name)) for name in obj.__dataclass_fields__}
    if isinstance(obj, tuple | list):
        return [config_to_dict(v) for v in obj]
    return obj
