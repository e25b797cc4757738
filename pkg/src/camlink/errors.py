"""Exception hierarchy for camlink."""


class CamlinkError(Exception):
    """Base class for all camlink errors."""


class ConfigurationError(CamlinkError):
    """Topology, window, or table configuration is inconsistent."""


class InputError(CamlinkError):
    """Caller-supplied data violates a precondition."""


class FeasibilityError(CamlinkError):
    """A linking configuration violates the uniqueness constraints."""


class EncodingError(CamlinkError):
    """A partition cannot be represented with the available candidate links."""


class LearningError(CamlinkError):
    """Training data is insufficient for model fitting."""


class SizeError(CamlinkError):
    """Instance exceeds the size cap of an exhaustive oracle."""


class InfeasibleProblemError(CamlinkError):
    """An assignment problem has a row with no admissible column."""
