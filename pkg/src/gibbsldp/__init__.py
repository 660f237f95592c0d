"""Gibbs-weighted orbit ensembles, pressure estimators and large-deviation rate functions
for hyperbolic rational maps and the full shift on Z^l."""

__version__ = "0.1.0"

from .errors import GibbsLDPError  # noqa: E402,F401
from .maps import MapSpec  # noqa: E402,F401
from .shift import Box, ShiftPotential, ShiftSpec  # noqa: E402,F401
