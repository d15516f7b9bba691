"""Typed failure signals shared across modules."""


class TracelabError(Exception):
    """Base class for all package-specific failures."""


class GridError(TracelabError):
    """Invalid grid parameters or memory cap exceeded."""


class ConvergenceError(TracelabError):
    """Refinement or iteration budget exhausted before reaching tolerance."""


class ReliabilityError(TracelabError):
    """A quantity was requested above the trusted truncation regime."""


class TraceTruncationError(TracelabError):
    """A trace tail bound exceeds its accepted fraction of the partial sum."""


class SamplingError(TracelabError):
    """A Monte Carlo estimate is statistically inadequate."""
