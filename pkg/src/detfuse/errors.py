"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class DetfuseError(Exception):
    """Base class for all package-specific errors."""


class ParseError(DetfuseError, ValueError):
    """A file (detection records, annotations, manifest, PPM) failed to parse."""


class ContractError(DetfuseError, ValueError):
    """An input violated a documented precondition (e.g. mixed image ids)."""


class DegenerateWeightsError(ContractError):
    """All member probabilities of a cluster are zero; the weighted average is undefined."""
