"""Exception types raised across the toolkit."""

from __future__ import annotations


class GreedyLabError(Exception):
    """Base class for all greedylab errors."""


class ZeroColumn(GreedyLabError):
    """A matrix column is numerically zero and cannot be normalized."""

    def __init__(self, index: int):
        super().__init__(f"column {index} has norm below 1e-300 and cannot be normalized")
        self.index = index


class SingleAtom(GreedyLabError):
    """Coherence is undefined for a dictionary with a single atom."""


class CoherenceTargetUnreachable(GreedyLabError):
    """Perturbed-identity generation kept missing its coherence target."""

    def __init__(self, num_atoms: int, eps: float, attempts: int):
        super().__init__(
            f"could not reach coherence <= {4.0 * eps:g} for N={num_atoms}, "
            f"eps={eps:g} after {attempts} attempts"
        )
        self.num_atoms = num_atoms
        self.eps = eps
        self.attempts = attempts


class IndexOutOfRange(GreedyLabError):
    """An atom index lies outside [0, N)."""

    def __init__(self, index: int, num_atoms: int):
        super().__init__(f"atom index {index} outside [0, {num_atoms})")
        self.index = index
        self.num_atoms = num_atoms


class DimensionMismatch(GreedyLabError):
    """A vector's length does not match the dictionary's ambient dimension."""


class EnumerationBudgetExceeded(GreedyLabError):
    """Subset enumeration would exceed the configured budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration requires {required} supports, budget is {budget}; "
            "raise the budget to opt in"
        )
        self.required = required
        self.budget = budget


class RankDeficientProjection(GreedyLabError):
    """Selected atoms are numerically dependent (condition estimate above 1e12)."""

    def __init__(self, step: int | None, condition: float):
        where = "direct projection" if step is None else f"step {step}"
        super().__init__(f"rank-deficient projection at {where} (condition ~ {condition:.3e})")
        self.step = step
        self.condition = condition


class NotEnoughSelected(GreedyLabError):
    """Postprocessing asked for more terms than the trace selected."""

    def __init__(self, requested: int, available: int):
        super().__init__(f"asked for {requested} terms but the trace selected {available}")
        self.requested = requested
        self.available = available


class InvalidKappa(GreedyLabError):
    """Weakness parameter outside (0, 1]."""

    def __init__(self, kappa: float):
        super().__init__(f"weakness parameter must lie in (0, 1], got {kappa!r}")
        self.kappa = kappa


class OrderTooSmall(GreedyLabError):
    """The supplied certificate covers a smaller order than the check needs."""

    def __init__(self, needed: int, got: int):
        super().__init__(f"certificate order {got} is below the required order {needed}")
        self.needed = needed
        self.got = got


class DeltaTooLarge(GreedyLabError):
    """delta >= 1 makes the decay inequality vacuous; refusing to report a pass."""

    def __init__(self, delta: float):
        super().__init__(f"delta = {delta:g} >= 1 makes the inequality vacuous")
        self.delta = delta


class ScheduleOutOfRange(GreedyLabError):
    """A decay schedule does not fit the executed trace."""


class DeltaAssumptionUnverified(GreedyLabError):
    """No available certificate establishes delta <= delta_star at the needed order."""

    def __init__(self, order: int, delta_star: float):
        super().__init__(
            f"could not certify delta_{order} <= {delta_star:g} by enumeration or coherence"
        )
        self.order = order
        self.delta_star = delta_star


class HypothesisUnmet(GreedyLabError):
    """A guarantee's hypothesis fails on this instance, so nothing is checked."""


class StepBudgetExceedsDictionary(GreedyLabError):
    """The requested step count A*n exceeds min(m, N) for this dictionary."""

    def __init__(self, steps: int, cap: int):
        super().__init__(f"{steps} steps exceed min(m, N) = {cap}")
        self.steps = steps
        self.cap = cap
