"""Exception types shared across the package."""


class PosadiscError(Exception):
    """Base class for all domain errors raised by this package."""


class GraphFormatError(PosadiscError):
    """A graph file or literal violates the JSON schema or the label rules."""


class InvariantError(PosadiscError):
    """A precondition or structural invariant was violated."""


class DegenerateCycleError(InvariantError):
    """A cycle places equal vertices within distance r of each other.

    The r-th power of such a cycle would contain self-loop slots and can
    never be a subgraph of a simple graph, so we reject the cycle outright.
    """


class ContainmentError(PosadiscError):
    """A cycle power (or template/tiling) is not contained in the host graph."""


class UnrealizableConfigError(InvariantError):
    """A clique-pair gadget configuration matches none of the supported cases."""


class UnclassifiableTileError(PosadiscError):
    """A tile of a clique tiling matches none of the four clique types."""

    def __init__(self, tile, message=None):
        self.tile = tuple(tile)
        super().__init__(message or f"tile {self.tile} matches no clique type")


class BudgetExhaustedError(PosadiscError):
    """A search hit its node or time budget before reaching a decision."""


class PipelineError(PosadiscError):
    """A stage of the cluster-embedding pipeline failed.

    ``stage`` names the failing stage so callers can report it.
    """

    def __init__(self, stage, message, position=None):
        self.stage = stage
        self.position = position
        super().__init__(f"[{stage}] {message}")


class CandidateExhaustionError(PipelineError):
    """No qualifying vertex exists at some path position."""


class CandidateSurvivalError(PipelineError):
    """A tracked candidate set fell below its guaranteed survival bound."""
