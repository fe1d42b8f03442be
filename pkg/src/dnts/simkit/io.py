"""JSON-lines trace and order files.

trace.jsonl  : one snapshot per line
    {"item": int, "day": int, "promoters": [int, ...], "edges": [[src, dst], ...], "self_sales": {"<id>": float}}
orders.jsonl : one order per line
    {"order_id": int, "item": int, "day": int, "sales": float, "chain": [originator, ..., root]}
"""

import json
from collections.abc import Iterable
from pathlib import Path

from dnts.errors import CorruptFileError
from dnts.typing import OrderRecord, PromotionSnapshot


def _write_jsonl(path: str | Path, states: Iterable[dict]):
    with open(path, "w") as w:
        for state in states:
            w.write(json.dumps(state, sort_keys=True) + "\n")


def _read_jsonl(path: str | Path) -> list[dict]:
    states = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                states.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise CorruptFileError(f"{path}:{lineno}: {e}") from e
    return states


def write_trace(path: str | Path, trace: Iterable[PromotionSnapshot]):
    _write_jsonl(path, (snapshot.to_state() for snapshot in trace))


def read_trace(path: str | Path) -> list[PromotionSnapshot]:
    try:
        return [PromotionSnapshot.from_state(state) for state in _read_jsonl(path)]
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptFileError(f"{path}: malformed snapshot record ({e})") from e


def write_orders(path: str | Path, orders: Iterable[OrderRecord]):
    _write_jsonl(path, (order.to_state() for order in orders))


def read_orders(path: str | Path) -> list[OrderRecord]:
    try:
        return [OrderRecord.from_state(state) for state in _read_jsonl(path)]
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptFileError(f"{path}: malformed order record ({e})") from e
