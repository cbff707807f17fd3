"""Exception and warning types shared across the package."""


class TFMetaError(Exception):
    pass


class DimensionError(TFMetaError, ValueError):
    """Shape or grid mismatch."""


class SingularityError(TFMetaError, ValueError):
    """A matrix block, eigenvalue or time parameter sits on a singular set."""


class ContractError(TFMetaError, ValueError):
    """Input violates a structural precondition (symmetry, group membership, ...)."""


class DomainError(TFMetaError, ValueError):
    """Argument outside the admissible numeric domain."""


class AdmissibilityError(DomainError):
    """Exponent pair not admissible for the requested estimate."""


class CoverageError(TFMetaError, RuntimeError):
    """STFT lattice does not capture the essential support of the transform."""

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


class RouteError(TFMetaError, ValueError):
    """Requested metaplectic route is not available for the matrix."""

    def __init__(self, message, valid_routes=()):
        super().__init__(f"{message}; valid routes: {', '.join(valid_routes) or 'none'}")
        self.valid_routes = tuple(valid_routes)


class NyquistWarning(UserWarning):
    """A sampled object is close to (or beyond) the grid's resolvable band."""
