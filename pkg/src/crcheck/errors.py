"""Exception hierarchy for the verification engine.

Every error this package raises on purpose derives from EngineError, so
callers can catch one type at the boundary and still tell configuration
problems apart from mathematical ones.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all deliberate failures in this package."""


class MalformedIndex(EngineError):
    """An index token is lexically or semantically unusable."""


class RankMismatch(EngineError):
    """An atom or monomial uses indices incompatibly with its head."""


class FreeIndexPresent(EngineError):
    """An operation that needs a scalar received free indices."""


class FreeIndexMismatch(EngineError):
    """Terms of one expression disagree on their free indices."""


class ModeError(EngineError):
    """A construct from one geometry was used in the other."""


class SourceSyntaxError(EngineError):
    """Parse failure, with position information."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class DifferentiatedCurvature(EngineError):
    """A head with no differentiation rule was differentiated."""


class FuelExhausted(EngineError):
    """Normalization gave up before reaching a fixed point."""

    def __init__(self, message: str, trace: tuple[tuple[str, int], ...]):
        super().__init__(message)
        self.trace = tuple(trace)


class UnknownIdentity(EngineError):
    """A requested identity name is not in the loaded catalog."""


class CatalogError(EngineError):
    """A rule or identity file is malformed."""


class ConfigError(EngineError):
    """A configuration file or command line option is unusable."""


class DegenerateCap(EngineError):
    """A spherical cap height outside (-1, 1) was requested."""


class FrameDegeneracy(EngineError):
    """Frame construction hit a numerically degenerate basis."""
