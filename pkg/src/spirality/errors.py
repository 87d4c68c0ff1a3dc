"""Exception types shared across the package."""


class SpiralityError(Exception):
    pass


class RankDeficient(SpiralityError):
    """Generators span a subgroup of rank < 2."""


class ParallelSlopes(SpiralityError):
    """Two slopes that must be non-parallel are parallel."""


class InvalidGraph(SpiralityError):
    """A graph operation was called on data that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid graph")


class UnknownCircle(SpiralityError):
    pass


class NotAClosedPath(SpiralityError):
    pass


class NotACovering(SpiralityError):
    pass


class MissingData(SpiralityError):
    pass


class HypothesesViolated(SpiralityError):
    """Theorem hypotheses (nontrivial decomposition, not Sol, infinite index) fail."""


class MissingDegeneracySlope(SpiralityError):
    pass


class IncompatiblePair(SpiralityError):
    """Two adjacent circle-bundle regimes on a cylinder edge (the crossed-out table cell)."""


class MissingCore(SpiralityError):
    """A cylinder edge has no core slope but the assembly needs one."""


class EdgeConditionUnsatisfiable(SpiralityError):
    pass


class DisconnectedGraph(SpiralityError):
    pass
