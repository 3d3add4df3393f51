"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`MetrelError`.  The
command line front end maps the three families below onto exit codes:
input problems (2), infeasible computations (3) and everything else.
"""

from __future__ import annotations


class MetrelError(Exception):
    """Base class for all toolkit errors."""


class InputError(MetrelError):
    """Bad or inconsistent input data."""


class ComputationError(MetrelError):
    """A well-formed input for which the requested quantity does not exist."""


# --- graph ingestion -------------------------------------------------------


class GraphParseError(InputError):
    def __init__(self, message: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class ReferentialIntegrityError(InputError):
    """An edge names a node that was never declared."""


class GraphValidationError(InputError):
    """Structural rule broken (self-loop, duplicate node, bad attribute)."""


class MissingAttributeError(InputError):
    def __init__(self, node: str, attribute: str):
        self.node = node
        self.attribute = attribute
        super().__init__(f"node {node!r} has no value for {attribute!r}")


class UnsupportedMetricError(InputError):
    """Unknown metric name, or a dual requested for an undirected metric."""


# --- evolution ---------------------------------------------------------------


class PairingError(InputError):
    """Two graphs that do not form a version pair."""


class VersionParseError(InputError):
    """A version label that cannot be split into Dewey components."""


class OrderingError(InputError):
    """Versions of one artifact that cannot be put in a total order."""


class NoChangeError(ComputationError):
    """Two identical version labels have no change cardinality."""


class NormalizationError(ComputationError):
    """Normalising by an empty earlier version."""


# --- statistics --------------------------------------------------------------


class InsufficientDataError(ComputationError):
    pass


class DegenerateRankingError(ComputationError):
    """One ranker puts every element in a single tie class."""


class DegenerateTableError(ComputationError):
    """A contingency table with a zero expected count."""


class ConvergenceError(ComputationError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


# --- mutation ----------------------------------------------------------------


class InfeasibleError(ComputationError):
    """Requested mutation cannot be realised."""


class InfeasiblePolicyError(InfeasibleError):
    """A boundary policy has nothing to draw from."""
