"""Exception hierarchy shared across the package."""


class InstanceForgeError(Exception):
    """Base class for all package errors."""


class InstanceFormatError(InstanceForgeError):
    """Malformed or out-of-range instance file (message names line/field)."""


class OracleError(InstanceForgeError):
    """Optimal-tour oracle failed to produce a value."""


class OracleCapacityError(OracleError):
    """Instance too large for the configured oracle."""


class OracleInconsistencyError(OracleError):
    """Oracle returned an 'optimum' longer than a heuristic tour."""


class BootstrapBudgetError(InstanceForgeError):
    """EA bootstrap exhausted its evaluation budget before hitting the threshold."""


class ConfigError(InstanceForgeError):
    """Invalid experiment configuration (message names the offending field)."""
