"""Exception hierarchy shared by all zedlink modules.

The CLI maps these onto exit codes: ConfigError -> 2, DomainError -> 3,
I/O problems (plain OSError) -> 4.
"""


class ZedlinkError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ZedlinkError, ValueError):
    """A scenario, preset, or object was configured inconsistently."""


class ModeError(ConfigError):
    """A bistatic-only object was used in a monostatic call or vice versa."""


class SchemaError(ConfigError):
    """Records or files do not match the documented CSV schema."""


class DomainError(ZedlinkError, ValueError):
    """A numeric argument lies outside the model's domain."""


class ModelValidityError(DomainError):
    """An empirical model was evaluated outside its validity window in strict mode."""


class EstimationError(DomainError):
    """Channel estimation was attempted without usable pilot resources."""


class InsufficientDataError(DomainError):
    """A detector was handed fewer samples than one symbol."""
