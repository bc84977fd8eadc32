"""Exception types shared across the package."""


class PorosplitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGeometry(PorosplitError):
    """Mesh construction input is degenerate or out of range."""


class InvalidOrder(PorosplitError):
    """Requested polynomial/quadrature order is not supported."""


class InvalidBoundarySpec(PorosplitError):
    """A boundary tag is unknown or a boundary condition is malformed."""


class InvalidMaterial(PorosplitError):
    """Material parameters violate positivity/SPD requirements."""


class InvalidInput(PorosplitError):
    """Generic argument validation failure (dimension mismatch etc.)."""


class SingularSystem(PorosplitError):
    """A linear system factorization failed (insufficient constraints)."""


class InsufficientData(PorosplitError):
    """Not enough samples to compute the requested diagnostic."""


class ConfigError(PorosplitError):
    """Scenario file could not be parsed or contains unknown keys."""


class Divergence(PorosplitError):
    """Fixed-stress iteration hit the iteration cap before converging.

    Carries the slab index and the iteration report collected so far.
    """

    def __init__(self, message, slab_index=None, report=None, completed_reports=None):
        super().__init__(message)
        self.slab_index = slab_index
        self.report = report
        self.completed_reports = completed_reports or []
