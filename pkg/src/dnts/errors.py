class DNTSError(Exception):
    """Base class of every error raised by dnts."""


class ConfigError(DNTSError, ValueError):
    pass


class CycleError(DNTSError, ValueError):
    """A promotion snapshot contains a directed cycle."""

    def __init__(self, item: int, day: int, node: int):
        super().__init__(f"snapshot (item={item}, day={day}) is not a DAG: cycle through promoter {node}")
        self.item = item
        self.day = day
        self.node = node


class ShapeError(DNTSError, ValueError):
    def __init__(self, op: str, lhs: tuple[int, ...], rhs: tuple[int, ...]):
        super().__init__(f"{op}: incompatible shapes {tuple(lhs)} and {tuple(rhs)}")
        self.op = op
        self.lhs = tuple(lhs)
        self.rhs = tuple(rhs)


class SchemaVersionError(DNTSError):
    def __init__(self, path, found, expected):
        super().__init__(f"{path}: schema version {found} (expected {expected})")
        self.found = found
        self.expected = expected


class CorruptFileError(DNTSError):
    pass


class DivergenceError(DNTSError, FloatingPointError):
    def __init__(self, epoch: int, step: int, terms: dict[str, float]):
        text = " ".join(f"{k}:{v:.4g}" for k, v in terms.items())
        super().__init__(f"non-finite loss at epoch {epoch} step {step} ({text})")
        self.epoch = epoch
        self.step = step
        self.terms = terms


class UnknownModeError(DNTSError, ValueError):
    pass


class OracleMismatchError(DNTSError):
    def __init__(self, item: int, day: int, promoter: int, deviation: float):
        super().__init__(
            f"propagation scale identity violated at item={item} day={day} promoter={promoter} (|dev|={deviation:.3e})"
        )
        self.item = item
        self.day = day
        self.promoter = promoter
        self.deviation = deviation


class DataError(DNTSError, ValueError):
    """Inputs violate a data-pipeline precondition (missing item, bad window, bad ratios)."""
