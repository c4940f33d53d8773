"""Eventual and asymptotic positivity of matrix semigroups, resolvents and
powers, with discretized PDE, delay and network examples."""

__version__ = "0.1.0"

from .errors import ModelError, NumericalFailure
from .lattice import LatticeContext, dist_to_cone, gauge_norm, strong_positivity
from .spectral import spectral_projection, spectrum_report
from .classify import (check_projection, classify_power, classify_resolvent,
                       classify_semigroup)
from .models import ModelBundle, build

__all__ = ["ModelError", "NumericalFailure", "LatticeContext", "dist_to_cone", "gauge_norm",
           "strong_positivity", "spectral_projection", "spectrum_report", "check_projection",
           "classify_power", "classify_resolvent", "classify_semigroup", "ModelBundle",
           "build", "__version__"]
