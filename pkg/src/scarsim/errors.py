"""Exception taxonomy shared across the toolkit.

The CLI maps these to distinct exit codes, so commands stay scriptable:
config problems, capacity-guard refusals, and numerical-guard violations
are distinguishable without parsing stderr.
"""


class ScarsimError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ScarsimError):
    """Invalid configuration or unsupported parameter combination."""


class GeometryError(ScarsimError):
    """Lattice construction or classification failure."""


class CapacityError(ScarsimError):
    """A guarded size limit (basis dimension, dense matrix size) was exceeded."""


class NumericalError(ScarsimError):
    """A numerical guard (normalization, positivity, convergence) was violated."""
