"""Exact and numerical tools for a doubled-torus sigma model with H-flux."""

from ._engine import backend
from .special_functions import (DomainError, TruncatedLogSeries, bloch_wigner, li2,
                                rogers_L)
from .fock_oracle import GroundLabel, label, pairing
from .correlators import (epsilon_triple, five_point_closed, five_point_oracle,
                          five_point_raw, four_point_closed, four_point_oracle)

__version__ = "0.1.0"

__all__ = [
    "backend", "DomainError", "TruncatedLogSeries", "bloch_wigner", "li2", "rogers_L",
    "GroundLabel", "label", "pairing", "epsilon_triple", "five_point_closed",
    "five_point_oracle", "five_point_raw", "four_point_closed", "four_point_oracle",
    "__version__",
]
