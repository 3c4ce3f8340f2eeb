"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4. Everything else is a plain bug.
"""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class DataError(Exception):
    """Malformed dataset file, manifest, or example record."""


class SchemaError(DataError):
    """An example is missing a field its task family requires."""


class NumericError(Exception):
    """NaN/Inf encountered where finite values are required."""


class TapeError(Exception):
    """Gradient tape used outside its contract (e.g. consumed twice)."""


class ContractError(Exception):
    """A caller violated an internal API precondition."""
