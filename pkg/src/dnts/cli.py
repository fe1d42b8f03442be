import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

import dnts
from dnts.config import MODES, Config
from dnts.data import build_dataset, load_dataset, save_dataset
from dnts.errors import (
    ConfigError,
    CorruptFileError,
    DivergenceError,
    DNTSError,
    OracleMismatchError,
    SchemaVersionError,
    UnknownModeError,
)
from dnts.harness import (
    Trainer,
    baseline_mean,
    baseline_persistence,
    config_hash,
    evaluate,
    load_model,
    run_ablation,
)
from dnts.simkit import (
    generate_orders,
    generate_trace,
    oracle_consistency_check,
    read_orders,
    read_trace,
    write_orders,
    write_trace,
)
from dnts.utils import create_logger

SUCCESS = 0
FAIL = 1
USAGE = 2
MISSING_FILE = 3
SCHEMA = 4
DIVERGENCE = 5
ORACLE_MISMATCH = 6

logger = logging.getLogger("dnts")


class DNTS_ArgParser(argparse.ArgumentParser):
    def __init__(self):
        super().__init__("dnts", description=dnts.__description__)
        self.formatter_class = argparse.ArgumentDefaultsHelpFormatter

        common = argparse.ArgumentParser(add_help=False)
        cfg_args = common.add_argument_group("config")
        cfg_args.add_argument("--config", type=str, help="configuration file (.yaml | .json)")
        cfg_args.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dot-list override, e.g. `--set model.k=10` (repeatable)",
        )
        cfg_args.add_argument("--seed", type=int, help="random seed")
        env_args = common.add_argument_group("environment")
        env_args.add_argument("-v", "--verbose", action="store_true", help="verbose")

        subparsers = self.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)
        formatter = argparse.ArgumentDefaultsHelpFormatter

        simulate = subparsers.add_parser(
            "simulate", parents=[common], formatter_class=formatter, help="generate trace.jsonl and orders.jsonl"
        )
        simulate.add_argument("--out", type=str, required=True, help="output data directory")
        simulate.add_argument("--num_workers", type=int, default=1, help="simulation worker processes")

        prepare = subparsers.add_parser(
            "prepare", parents=[common], formatter_class=formatter, help="build training examples and manifest"
        )
        prepare.add_argument("--data", type=str, required=True, help="data directory holding trace/orders")
        prepare.add_argument("--window", type=int, help="input window T")
        prepare.add_argument("--horizon", type=int, help="forecast horizon Δt")

        train = subparsers.add_parser("train", parents=[common], formatter_class=formatter, help="train one model")
        train.add_argument("--data", type=str, required=True, help="prepared data directory")
        train.add_argument("--out", type=str, required=True, help="output run directory")
        train.add_argument("--mode", choices=MODES, help="experiment mode")
        train.add_argument("--no-gcn", dest="no_gcn", action="store_true", help="drop the spatial encoders")

        evaluate_ = subparsers.add_parser(
            "evaluate", parents=[common], formatter_class=formatter, help="evaluate a checkpoint"
        )
        evaluate_.add_argument("--checkpoint", type=str, required=True, help="checkpoint file (.ckpt)")
        evaluate_.add_argument("--data", type=str, required=True, help="prepared data directory")
        evaluate_.add_argument("--split", choices=("train", "val", "test"), default="test", help="split")
        evaluate_.add_argument("--out", type=str, help="output directory (default: next to the checkpoint)")

        ablate = subparsers.add_parser(
            "ablate", parents=[common], formatter_class=formatter, help="{+GCN, -GCN} x modes comparison table"
        )
        ablate.add_argument("--data", type=str, required=True, help="prepared data directory")
        ablate.add_argument("--out", type=str, required=True, help="output directory")
        ablate.add_argument("--seeds", nargs="+", type=int, help="seeds shared by every cell")
        ablate.add_argument("--mode", choices=MODES, nargs="+", help="restrict to these modes")

        oracle = subparsers.add_parser(
            "oracle-check", parents=[common], formatter_class=formatter, help="check the order/trace identity"
        )
        oracle.add_argument("--data", type=str, required=True, help="data directory holding trace/orders")
        oracle.add_argument("--tolerance", type=float, default=1e-9, help="max absolute deviation")


def resolve_config(args: argparse.Namespace) -> Config:
    """defaults -> --config file -> --set overrides -> dedicated flags."""
    try:
        cfg = OmegaConf.structured(Config)
        if args.config is not None:
            if not Path(args.config).exists():
                raise FileNotFoundError(f"config file {args.config} does not exist")
            cfg = OmegaConf.merge(cfg, OmegaConf.load(args.config))
        if len(args.overrides) > 0:
            cfg = OmegaConf.merge(cfg, OmegaConf.from_dotlist(args.overrides))
        if args.seed is not None:
            cfg.sim.rng_seed = args.seed
            cfg.data.split_seed = args.seed
            cfg.train.seed = args.seed
        if getattr(args, "window", None) is not None:
            cfg.data.window = args.window
        if getattr(args, "horizon", None) is not None:
            cfg.data.horizon = args.horizon
        if getattr(args, "mode", None) is not None and isinstance(args.mode, str):
            cfg.train.mode = args.mode
        if getattr(args, "no_gcn", False):
            cfg.train.use_gcn = False
        config: Config = OmegaConf.to_object(cfg)
    except OmegaConfBaseException as e:
        raise ConfigError(str(e).splitlines()[0]) from e
    return config


def save_config(config: Config, out_dir: str | Path, filename: str = "config.yaml"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    OmegaConf.save(OmegaConf.create(config.to_dict()), out_dir / filename)


def cmd_simulate(args: argparse.Namespace, config: Config) -> int:
    config.sim.validate()
    save_config(config, args.out)
    trace = generate_trace(config.sim, args.num_workers)
    orders = generate_orders(trace, config.sim)
    write_trace(Path(args.out) / "trace.jsonl", trace)
    write_orders(Path(args.out) / "orders.jsonl", orders)
    logger.info(f"simulated {len(trace)} snapshots and {len(orders)} orders into {args.out}")
    return SUCCESS


def cmd_prepare(args: argparse.Namespace, config: Config) -> int:
    data_dir = Path(args.data)
    config.data.path = str(data_dir)
    trace = read_trace(data_dir / "trace.jsonl")
    orders = read_orders(data_dir / "orders.jsonl")
    dataset = build_dataset(
        trace,
        orders,
        config.data.window,
        config.data.horizon,
        config.data.split_seed,
        tuple(config.data.split_ratios),
        config.data.max_members,
    )
    # config.yaml stays the record of `simulate`
    save_config(config, data_dir, "prepare.yaml")
    save_dataset(dataset, data_dir)
    return SUCCESS


def cmd_train(args: argparse.Namespace, config: Config) -> int:
    dataset = load_dataset(args.data)
    config.data.path = str(args.data)
    if (config.data.window, config.data.horizon) != (dataset.window, dataset.horizon):
        logger.info(f"using the prepared window/horizon ({dataset.window}, {dataset.horizon})")
        config.data.window, config.data.horizon = dataset.window, dataset.horizon
    config.log_dir = str(args.out)
    config.validate()
    trainer = Trainer(config, dataset)
    trainer.fit()
    model, _ = load_model(trainer.save_dir / "best.ckpt", config.train.device)
    split = "test" if len(dataset.examples.get("test", [])) > 0 else "train"
    report = evaluate(model, dataset, split, config.train.seed, trainer.config_hash)
    report.save(Path(args.out) / "report.json")
    logger.info(f"{split} msle {report.msle:.4f} mape {report.mape:.2f}")
    return SUCCESS


def cmd_evaluate(args: argparse.Namespace, config: Config) -> int:
    if not Path(args.checkpoint).exists():
        raise FileNotFoundError(f"checkpoint {args.checkpoint} does not exist")
    dataset = load_dataset(args.data)
    model, model_config = load_model(args.checkpoint)
    out_dir = Path(args.out) if args.out is not None else Path(args.checkpoint).parent
    save_config(model_config, out_dir)
    seed = model_config.train.seed if args.seed is None else args.seed
    report = evaluate(
        model,
        dataset,
        args.split,
        seed,
        config_hash(model_config.to_dict()),
        predictions_path=out_dir / f"predictions_{args.split}.csv",
    )
    report.save(out_dir / "report.json")
    logger.info(f"{args.split} msle {report.msle:.4f} mape {report.mape:.2f}")
    return SUCCESS


def cmd_ablate(args: argparse.Namespace, config: Config) -> int:
    dataset = load_dataset(args.data)
    config.data.path = str(args.data)
    config.data.window, config.data.horizon = dataset.window, dataset.horizon
    config.log_dir = str(args.out)
    config.validate()
    save_config(config, args.out)
    modes = tuple(args.mode) if args.mode is not None else MODES
    table = run_ablation(dataset, config, args.seeds, modes)
    split = "test" if len(dataset.examples.get("test", [])) > 0 else "train"
    for name, baseline in (("persistence", baseline_persistence), ("mean", baseline_mean)):
        report = baseline(dataset, split)
        report.save(Path(args.out) / f"baseline_{name}.json")
        table[name] = {"msle": report.msle, "mape": report.mape}
    for cell, row in table.items():
        print(f"{cell:>12s} msle={row['msle']:.4f} mape={row['mape']:.2f}")
    return SUCCESS


def cmd_oracle_check(args: argparse.Namespace, config: Config) -> int:
    data_dir = Path(args.data)
    trace = read_trace(data_dir / "trace.jsonl")
    orders = read_orders(data_dir / "orders.jsonl")
    report = oracle_consistency_check(trace, orders, args.tolerance, raise_on_violation=True)
    print(f"ok={report.ok} max_deviation={report.max_deviation:.3e}")
    return SUCCESS


COMMANDS = {
    "simulate": cmd_simulate,
    "prepare": cmd_prepare,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "oracle-check": cmd_oracle_check,
}

ERRORS: tuple[tuple[type[BaseException], str, int], ...] = (
    (FileNotFoundError, "missing_file", MISSING_FILE),
    (SchemaVersionError, "schema_mismatch", SCHEMA),
    (CorruptFileError, "corrupt_file", SCHEMA),
    (DivergenceError, "divergence", DIVERGENCE),
    (OracleMismatchError, "oracle_mismatch", ORACLE_MISMATCH),
    (UnknownModeError, "unknown_mode", USAGE),
    (ConfigError, "config", USAGE),
    (DNTSError, "dnts", FAIL),
)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = DNTS_ArgParser().parse_args(argv)
        create_logger(loglevel=logging.DEBUG if args.verbose else None)
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except Exception as e:
        for error_type, kind, code in ERRORS:
            if isinstance(e, error_type):
                break
        else:
            kind, code = "failure", FAIL
            logger.debug("unexpected failure", exc_info=True)
        message = " ".join(str(e).split())
        print(f"error={kind} message={message}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
