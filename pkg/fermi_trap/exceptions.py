class FermiTrapError(Exception):
    """Base class of every error raised by `fermi_trap`."""


class DomainError(FermiTrapError, ValueError):
    """An argument lies outside the domain of the operation."""


class InstabilityError(DomainError):
    """The Bogoliubov diagonalization condition is violated (|V| too large)."""


class LinearWindowError(DomainError):
    """The linearized edge occupation was requested outside its window."""


class NumericalError(FermiTrapError, ArithmeticError):
    """Base class of numerical failures."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, estimates: tuple[float, float]):
        super().__init__(f"{message} (last estimates: {estimates[0]!r}, {estimates[1]!r})")
        self.estimates = estimates


class SingularKernelError(NumericalError):
    """A power factor of an integrand has a non-positive base."""


class ResolutionError(NumericalError):
    """A sampled profile is too coarse for the requested analysis."""
