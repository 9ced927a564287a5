"""Per-iteration solver bookkeeping."""

from dataclasses import dataclass, field

__all__ = ["SolverTrace", "NumericalError"]


class NumericalError(RuntimeError):
    """Raised when a solver produces a non-finite objective."""


@dataclass
class SolverTrace:
    """Objective values recorded once per outer iteration.

    ``objective`` has exactly one entry per iteration executed;
    ``converged`` tells whether the run stopped on its tolerance rather than
    on the iteration cap, with ``reason`` naming the stop condition.
    """

    objective: list = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False
    reason: str = ""

    def record(self, value: float):
        self.objective.append(float(value))
        self.iterations_run += 1

    def finish(self, converged: bool, reason: str):
        self.converged = converged
        self.reason = reason
