class BayesUpdateException(Exception):
    """Base class for all errors raised by the updating library; carries the CLI exit code"""
    exit_code: int = 2


class ConfigException(BayesUpdateException):
    """Raised when a configuration or caller-supplied parameter is invalid"""
    exit_code = 1


class InvalidRotationException(ConfigException):
    """Raised when a conditional rotation would need an ancilla amplitude above 1"""

    def __init__(self, hypothesis: int, amplitude: float):
        self.hypothesis = hypothesis
        self.amplitude = amplitude
        super().__init__(
            f"Rotation amplitude {amplitude:.6g} exceeds 1 at hypothesis h={hypothesis}; "
            f"the constant c^2 is too large for this likelihood"
        )


class DegenerateAngleException(ConfigException):
    """Raised when the favored set carries no prior weight (theta = 0)"""
    pass


class DomainException(ConfigException):
    """Raised when a likelihood cannot be decomposed (zero value inside the support)"""

    def __init__(self, hypothesis: int):
        self.hypothesis = hypothesis
        super().__init__(
            f"Likelihood is zero at supported hypothesis h={hypothesis}; "
            f"remove it with an elimination stage first"
        )


class ContractViolationException(BayesUpdateException):
    """Raised when a numerical contract (norm, width, fidelity target) is broken"""
    exit_code = 2


class ZeroEvidenceException(BayesUpdateException):
    """Raised when the evidence P(d) vanishes and updating is undefined"""
    exit_code = 3
