__version__ = "0.1.0"
__maintainer__ = "dnts developers"

__description__ = (
    f"DNTS v{__version__} - Two-stage Propagation-Scale Forecasting for Affiliate Marketing\n"
    f"Self-sales and promotion structure are forecast separately, then synthesized into propagation scale.\n"
)
