"""Exception hierarchy shared by every invforge service."""

from typing import Optional


class InvforgeError(Exception):
    """Base class for all invforge errors."""


# Operator basis

class DimensionError(InvforgeError):
    """Dimension below 2 or mismatched between operands."""


class OperatorIndexError(InvforgeError, IndexError):
    """Operator label indices out of range for the dimension."""


class IdentityPowerError(InvforgeError):
    """Exponent 0 requested from a unitary power decomposition."""


class IncompleteDataError(InvforgeError):
    """A projector record needed for an expectation value is missing."""


class MeasurementBasisError(InvforgeError):
    """Operator cannot be expanded over the projector measurement basis."""


# Channels

class UnknownChannelError(InvforgeError):
    """Channel family name is not registered."""


class QubitOnlyChannelError(InvforgeError):
    """Qubit-only family requested with N != 2."""


class ParameterError(InvforgeError):
    """Missing, unknown or out-of-bounds channel parameter."""


class CPTPViolationError(InvforgeError):
    """Kraus set fails the completeness relation."""


class EmptyParameterDomainError(InvforgeError):
    """Family has no admissible parameter point."""


class ChannelSpecError(InvforgeError):
    """Channel-spec document could not be turned into a channel."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        path: Optional[str] = None,
    ):
        self.line = line
        self.column = column
        self.path = path
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if path:
            location.append(f"at {path}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class ChannelSpecSyntaxError(ChannelSpecError):
    """Malformed JSON or matrix structure."""


class ChannelSpecDimensionError(ChannelSpecError):
    """Matrix sizes disagree with the declared dimension."""


# Spectral engine and search

class NumericError(InvforgeError):
    """Eigensolver or other numerical routine failed."""


class VerificationBudgetError(InvforgeError):
    """Invariant stayed undefined on too many resampled trials."""


class UnknownCatalogError(InvforgeError):
    """No hard-coded catalog for this family."""


class CatalogFormatError(InvforgeError):
    """Catalog file is not valid JSON or does not match the record schema."""


# Transfer simulation

class NoInvariantsError(InvforgeError):
    """Family admits no invariant to encode symbols in."""


class CodebookBudgetError(InvforgeError):
    """Rejection sampling ran out of draws before filling the codebook."""


class UnknownSymbolError(InvforgeError):
    """Message refers to a symbol that is not in the codebook."""
