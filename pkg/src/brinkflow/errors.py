"""Exception types raised across the solver."""


class BrinkflowError(Exception):
    """Base class for all solver errors."""


class TooFewMarkers(BrinkflowError):
    pass


class SelfIntersection(BrinkflowError):
    pass


class DegenerateTangent(BrinkflowError):
    pass


class SizeMismatch(BrinkflowError):
    pass


class InterfaceTouchesBoundary(BrinkflowError):
    pass


class PointOutsidePatch(BrinkflowError):
    pass


class SingularSystem(BrinkflowError):
    pass


class OutsideBand(BrinkflowError):
    pass


class InsufficientNodes(BrinkflowError):
    pass


class LevelMismatch(BrinkflowError):
    pass


class NoConvergence(BrinkflowError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"multigrid did not converge: {report}")


class MaxIterations(BrinkflowError):
    def __init__(self, log):
        self.log = log
        super().__init__(f"GMRES hit the iteration cap ({log.iterations} iterations)")


class StepRejected(BrinkflowError):
    pass


class ConfigError(BrinkflowError):
    pass
