"""Exception hierarchy. The four category bases carry the CLI exit codes."""


class SteklovError(Exception):
    category = "Error"
    exit_code = 1


class UsageError(SteklovError):
    category = "UsageError"
    exit_code = 2


class ValidationError(SteklovError):
    category = "ValidationError"
    exit_code = 3


class SolverError(SteklovError):
    category = "SolverError"
    exit_code = 4


class StorageError(SteklovError):
    category = "IOError"
    exit_code = 5


# cli
class InvalidUsage(UsageError):
    pass


class InvalidConfig(UsageError):
    pass


# graph-core
class InvalidParams(ValidationError):
    pass


class DegreeMismatch(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class OddTotalDegree(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotConnected(ValidationError):
    pass


class SamplingExhausted(SolverError):
    pass


# surface-builder
class MeshInvariantViolated(ValidationError):
    pass


class OrientationConflict(ValidationError):
    pass


class NonIntegerGenus(ValidationError):
    pass


class NonIntegerResult(ValidationError):
    pass


# spectral-fem
class DegenerateTriangle(ValidationError):
    pass


class UnknownLoop(ValidationError):
    pass


class ZeroBoundaryNorm(ValidationError):
    pass


class SingularInterior(SolverError):
    pass


class ConvergenceFailure(SolverError):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


# experiments
class InsufficientRecords(ValidationError):
    pass


class InvariantViolation(ValidationError):
    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class PartialRunPersisted(StorageError):
    def __init__(self, message: str, path: str, cause: Exception = None):
        super().__init__(message)
        self.path = path
        self.cause = cause


# file formats
class GraphFormatError(StorageError):
    pass


class MeshFormatError(StorageError):
    pass
