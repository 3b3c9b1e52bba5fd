"""Compressibility of iid distributions and Gaussian compressed sensing experiments."""

__version__ = "0.1.0"

from .distributions import DistributionModel, Family, parse_distribution  # noqa: E402
from .errors import (  # noqa: E402
    CompressibleError,
    ConditioningError,
    DomainError,
    SaturationError,
    UnsupportedError,
)
from .metrics import critical_undersampling, g_fun, h_fun  # noqa: E402

__all__ = [
    "__version__",
    "DistributionModel",
    "Family",
    "parse_distribution",
    "CompressibleError",
    "ConditioningError",
    "DomainError",
    "SaturationError",
    "UnsupportedError",
    "g_fun",
    "h_fun",
    "critical_undersampling",
]
