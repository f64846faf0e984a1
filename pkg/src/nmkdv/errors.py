"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class NmkdvError(Exception):
    exit_code = 1


# --- exit 2: domain / region ---
class DomainError(NmkdvError):
    exit_code = 2


class RegionError(NmkdvError):
    exit_code = 2


# --- exit 3: convergence ---
class ConvergenceError(NmkdvError):
    exit_code = 3


class MultiplicityError(ConvergenceError):
    pass


class SingularSystemError(ConvergenceError):
    def __init__(self, message: str, worst_pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.worst_pair = worst_pair


class StepError(ConvergenceError):
    pass


# --- exit 4: spectral singularities and branch problems ---
class SpectralSingularityError(NmkdvError):
    exit_code = 4


class SingularError(SpectralSingularityError):
    pass


class NonvanishingError(SpectralSingularityError):
    pass


class BranchError(SpectralSingularityError):
    pass


class RealityError(SpectralSingularityError):
    pass


# --- exit 5: input decay ---
class DecayError(NmkdvError):
    exit_code = 5


# --- exit 1: everything else ---
class PoleError(NmkdvError):
    pass


class EvalError(NmkdvError):
    pass


class DegenerateFitError(NmkdvError):
    pass


class BlowupError(NmkdvError):
    pass
