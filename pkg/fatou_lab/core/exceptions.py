"""
Custom exceptions for the lab
"""


class FatouLabError(Exception):
    """Base exception for lab errors"""
    pass


class ConfigurationError(FatouLabError):
    """Raised when configuration is invalid"""
    pass


class UnknownGenerator(ConfigurationError):
    """Raised when a word uses a symbol outside the generating set"""
    pass


class SmallCancellationViolation(ConfigurationError):
    """Raised when a presentation fails the C'(1/6) piece condition"""
    pass


class PreconditionFailed(FatouLabError):
    """Raised when an operation is called outside its documented domain"""
    pass


class BudgetExceeded(FatouLabError):
    """Raised when a ball, atlas or enumeration would exceed its element budget"""
    pass


class NotGenerating(FatouLabError):
    """Raised when a step distribution does not generate the group as a semigroup"""
    pass


class StepBudgetExceeded(FatouLabError):
    """Raised when a trajectory hits the hard step cap before its stop rule fires"""
    pass


class NeverExited(FatouLabError):
    """Raised when a trajectory never reaches the requested sphere"""
    pass


class OutOfTabulatedRange(FatouLabError):
    """Raised when a tabulated function is evaluated outside its domain"""
    pass


class SolverFailure(FatouLabError):
    """Raised when a linear solve misses its residual target"""
    pass


class DivisionUnstable(FatouLabError):
    """Raised when a Martin ratio denominator is within noise of zero"""
    pass


class NotStabilized(FatouLabError):
    """Raised when boundary Martin kernels keep moving at the deepest depth"""
    pass


class DegenerateRow(FatouLabError):
    """Raised when an h-transformed transition row has (numerically) no mass"""
    pass


class InvalidRay(FatouLabError):
    """Raised when a ray generator does not produce a geodesic ray"""
    pass


class CheckFailed(FatouLabError):
    """Raised when an experiment's assertion does not hold"""
    pass


class NonHyperbolicWarning(UserWarning):
    """Emitted when a hyperbolicity-dependent operation receives a non-hyperbolic group"""
    pass
