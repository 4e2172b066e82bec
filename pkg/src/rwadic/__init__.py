"""Random walk adic transformations over topological Markov shifts.

The package builds the adic (Vershik) successor map on a stationary Bratteli
diagram, the Parry and tail-invariant measures, finite-range cocycles with
their covariance data, and Monte Carlo harnesses for the occupation-time
limit law of the skew product.
"""
from .adic import predecessor, successor
from .cocycle import Cocycle, GroupSpec, birkhoff_sum, group_span
from .config import load_config, parse_config
from .errors import AdicError
from .measures import Measures, perron
from .spectral import covariance, nagaev_lambda
from .symbolic import ExactPoint, LazyPoint, extreme_points, validate_tms

__version__ = "0.1.0"

__all__ = [
    "AdicError",
    "Cocycle",
    "ExactPoint",
    "GroupSpec",
    "LazyPoint",
    "Measures",
    "birkhoff_sum",
    "covariance",
    "extreme_points",
    "group_span",
    "load_config",
    "nagaev_lambda",
    "parse_config",
    "perron",
    "predecessor",
    "successor",
    "validate_tms",
]
