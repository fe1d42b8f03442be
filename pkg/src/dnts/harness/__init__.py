from .evaluate import GlobalCache, count_filter_violations, evaluate, predict
from .experiments import baseline_mean, baseline_persistence, run_ablation, run_mode
from .metrics import mape_metric, msle_metric
from .report import MetricsReport, config_hash
from .trainer import Trainer, clone_config, load_model
