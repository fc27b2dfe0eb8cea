"""Exception hierarchy shared by all modules."""


class DirichletLabError(ValueError):
    """Base class for every input or contract error raised by the package."""


class InvalidDomain(DirichletLabError):
    pass


class EmptyInterior(DirichletLabError):
    pass


class InvalidMeasure(DirichletLabError):
    pass


class AsymmetricForm(DirichletLabError):
    pass


class DomainMismatch(DirichletLabError):
    pass


class InvalidTime(DirichletLabError):
    pass


class ConfigError(DirichletLabError):
    """Malformed or unknown configuration keys."""
