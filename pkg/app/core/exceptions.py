"""
Exception hierarchy for the topology optimizer.
Every error carries a human readable detail and the exit code the CLI reports.
"""
from typing import Any, Optional

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2
EXIT_INTERNAL = 3


class TopologyOptimizerError(Exception):
    """Base error, the CLI maps exit_code straight to the process status"""

    exit_code: int = EXIT_INVARIANT

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class InputParseError(TopologyOptimizerError):
    """Input file is not valid JSON or does not match the expected shape"""
    exit_code = EXIT_INPUT


class InvalidParameterError(TopologyOptimizerError):
    exit_code = EXIT_INPUT


class SearchSpaceTooLargeError(TopologyOptimizerError):
    """Exhaustive oracle refused because the active moving set is too large"""
    exit_code = EXIT_INPUT


class InvalidTopologyError(TopologyOptimizerError):
    exit_code = EXIT_INVARIANT


class InvalidFlowError(TopologyOptimizerError):
    exit_code = EXIT_INVARIANT


class InvalidBudgetError(TopologyOptimizerError):
    exit_code = EXIT_INVARIANT


class UnknownNodeError(TopologyOptimizerError):
    exit_code = EXIT_INVARIANT


class PlanMismatchError(TopologyOptimizerError):
    """Initial and desired topologies (or a plan file) do not describe the same network"""
    exit_code = EXIT_INVARIANT


class PlacementError(TopologyOptimizerError):
    """A mover had no budget-feasible position; the classification should rule this out"""
    exit_code = EXIT_INVARIANT


class ConnectivityViolationError(TopologyOptimizerError):
    """A movement step disconnected the network; indicates a planner bug or a corrupted plan"""
    exit_code = EXIT_INVARIANT

    def __init__(self, detail: str, trace: Any = None):
        super().__init__(detail)
        self.trace = trace
