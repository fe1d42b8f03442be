from .config import SimConfig
from .generator import generate_orders, generate_trace, item_latent, toy_network
from .graph import backward_path_counts, descendant_sets, snapshot_csr
from .io import read_orders, read_trace, write_orders, write_trace
from .oracle import (
    ConsistencyReport,
    PromoterMatrix,
    descendant_gate,
    oracle_activation_ratio,
    oracle_consistency_check,
    oracle_propagation_scale,
    oracle_self_sales,
)
from .validation import validate_order, validate_snapshot
