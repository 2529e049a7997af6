"""Distributed phase-insensitive displacement sensing: simulator and analysis."""

__version__ = "0.1.0"

from .fock_core import (  # noqa: F401
    CoherenceSummary,
    DensityOp,
    ModeSpace,
    Povm,
    PureState,
    StateSpec,
)
from .channels import ChannelParams, NoiseSpec  # noqa: F401
from .metrology import FisherReport, NumericsConfig  # noqa: F401
from .scenarios import ScanResult, Strategy  # noqa: F401
