"""Exception hierarchy shared by all solvers."""


class QHydroError(Exception):
    """Base class for every error raised by qhydro."""


class NonFiniteInput(QHydroError, ValueError):
    pass


class NegativeDensity(QHydroError, ValueError):
    pass


class DivisionNearVacuum(QHydroError, ZeroDivisionError):
    pass


class ClosureMismatch(QHydroError, ValueError):
    pass


class CflViolation(QHydroError, ValueError):
    pass


class BlowUp(QHydroError, FloatingPointError):
    pass


class NormDrift(QHydroError, FloatingPointError):
    pass


class PhaseWindingMismatch(QHydroError, ValueError):
    pass


class FitFailed(QHydroError, RuntimeError):
    pass


class CutoffBreach(QHydroError, RuntimeError):
    pass


class InsufficientTrajectory(QHydroError, ValueError):
    pass


class ConfigError(QHydroError, ValueError):
    pass


class MissingArtifact(QHydroError, FileNotFoundError):
    pass
