"""Time-frequency analysis of metaplectic operators and quadratic Schrodinger propagators."""
from . import bounds, explab, field, metaplectic, symplectic, tfnorm
from .errors import (AdmissibilityError, ContractError, CoverageError, DimensionError, DomainError,
                     NyquistWarning, RouteError, SingularityError, TFMetaError)
from .field import Grid, SampledField
from .symplectic import SymplecticMatrix

__version__ = "0.1.0"

__all__ = [
    "bounds", "explab", "field", "metaplectic", "symplectic", "tfnorm",
    "Grid", "SampledField", "SymplecticMatrix",
    "TFMetaError", "DimensionError", "SingularityError", "ContractError", "DomainError",
    "AdmissibilityError", "RouteError", "CoverageError", "NyquistWarning",
]
