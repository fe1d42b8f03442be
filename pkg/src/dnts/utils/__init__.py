try:
    from .reachability_numba import dfs_descendants, find_cycle
except Exception:
    from .reachability import dfs_descendants, find_cycle

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import grad_check, grad_check_parameters
from .logger import create_logger
from .seed import seed_everything
