"""Exception types shared across the toolkit."""


class CgnmtError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(CgnmtError):
    """Operands have incompatible dimensions."""


class ConfigError(CgnmtError):
    """Invalid or inconsistent configuration."""


class ContractError(CgnmtError):
    """An API precondition was violated by the caller."""


class InputError(CgnmtError):
    """Malformed runtime input: bad token ids, empty sequences, bad files."""


class ModelFormatError(CgnmtError):
    """Model file is corrupt or inconsistent with its manifest."""


class OracleError(CgnmtError):
    """The finite-difference oracle hit a non-finite evaluation."""


class DivergenceError(CgnmtError):
    """Training produced a non-finite loss."""


class CorrelationError(CgnmtError):
    """Correlation is undefined because one input has zero variance."""
