"""Exception hierarchy shared by all subpackages."""


class ChemRheoError(Exception):
    """Base class for every error raised by the package."""


class NonDifferentiableField(ChemRheoError):
    """A derivative was requested from a field that only carries node samples."""


class QuadratureMismatch(ChemRheoError):
    """Two fields live on different quadratures or have incompatible rank."""


class ExponentOutOfRange(ChemRheoError):
    pass


class StructureViolation(ChemRheoError):
    """A sampled constitutive law broke one of its structural inequalities.

    The offending sample is kept on ``witness`` so it can be reproduced.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class GridMismatch(ChemRheoError):
    pass


class ExponentMismatch(ChemRheoError):
    pass


class NoConvergence(ChemRheoError):
    pass


class BasisTooLarge(ChemRheoError):
    pass


class SingularGram(ChemRheoError):
    pass


class DimensionMismatch(ChemRheoError):
    pass


class StepSizeUnderflow(ChemRheoError):
    pass


class FixedPointDivergence(ChemRheoError):
    pass


class ConfigError(ChemRheoError):
    """Base class for configuration problems (exit status 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownKey(ConfigError):
    pass


class RangeError(ConfigError):
    pass
