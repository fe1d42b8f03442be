import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite_or_none(v) for k, v in value.items()}
    return value


def config_hash(config: dict) -> str:
    """Short digest of an experiment configuration; the output directory is not part of it."""
    state = {k: v for k, v in config.items() if k != "log_dir"}
    return hashlib.sha256(json.dumps(state, sort_keys=True, default=str).encode()).hexdigest()[:16]


@dataclass
class MetricsReport:
    split: str
    mode: str
    use_gcn: bool
    msle: float
    mape: float
    num_examples: int
    per_item: dict[str, dict[str, float]] = field(default_factory=dict)
    runtime: float = 0.0
    config_hash: str = ""
    filter_violations: int = 0
    self_sales_msle: float | None = None

    def to_dict(self) -> dict:
        return _finite_or_none(asdict(self))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w") as w:
            json.dump(self.to_dict(), w, indent=2, sort_keys=True)
        return path

    @classmethod
    def load(cls, path: str | Path) -> "MetricsReport":
        with open(path) as f:
            state = json.load(f)
        for key in ("msle", "mape"):
            if state[key] is None:
                state[key] = float("nan")
        return cls(**state)
