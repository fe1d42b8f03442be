from dnts.typing import OrderRecord, PromotionSnapshot
from dnts.utils import find_cycle

from .graph import snapshot_csr


def validate_snapshot(snapshot: PromotionSnapshot) -> list[str]:
    """Invariant violations of a snapshot (empty list when valid)."""
    problems = []
    members = set(snapshot.promoters)
    if len(members) != len(snapshot.promoters):
        problems.append("duplicate promoters")
    for src, dst in snapshot.edges:
        if src == dst:
            problems.append(f"self-loop on {src}")
        if src not in members or dst not in members:
            problems.append(f"edge ({src}, {dst}) leaves the promoter set")
    for m, value in snapshot.self_sales.items():
        if m not in members:
            problems.append(f"self-sales key {m} is not a promoter")
        if value < 0:
            problems.append(f"negative self-sales for {m}")
    if len(problems) == 0:
        num_nodes, indptr, indices = snapshot_csr(snapshot)
        if find_cycle(num_nodes, indptr, indices) >= 0:
            problems.append("edges contain a directed cycle")
    return problems


def validate_order(order: OrderRecord, snapshot: PromotionSnapshot) -> list[str]:
    """Invariant violations of an order against the snapshot of its (item, day)."""
    problems = []
    if (order.item, order.day) != (snapshot.item, snapshot.day):
        problems.append("order and snapshot refer to different (item, day)")
    if order.sales <= 0:
        problems.append(f"non-positive sales {order.sales}")
    if len(order.chain) == 0:
        return problems + ["empty chain"]
    members = set(snapshot.promoters)
    edges = set(snapshot.edges)
    for m in order.chain:
        if m not in members:
            problems.append(f"chain member {m} is not active")
    for child, parent in zip(order.chain[:-1], order.chain[1:], strict=True):
        if (parent, child) not in edges:
            problems.append(f"chain step {child} <- {parent} is not an edge")
    root = order.chain[-1]
    if any(dst == root for _, dst in snapshot.edges):
        problems.append(f"chain does not end at a source node ({root} has a parent)")
    return problems
