"""Data models for eigenoperators, invariant monomials and catalog records."""

from enum import Enum
from math import gcd
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from src.models.operators import LabeledOperator, OperatorLabel


class Eigenoperator(BaseModel):
    """Operator O with sum_k E_k^dagger O E_k = lambda O at every sampled draw."""

    label: OperatorLabel
    matrix: np.ndarray
    lambdas: List[complex]
    residuals: List[float] = Field(default_factory=list)
    hermitian: bool = False
    operator: Optional[LabeledOperator] = None  # named operator with its natural normalization

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze_matrix(cls, value):
        matrix = np.array(value, dtype=complex)
        matrix.flags.writeable = False
        return matrix

    @property
    def token(self) -> str:
        return self.label.token

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    def as_labeled(self) -> LabeledOperator:
        if self.operator is not None:
            return self.operator
        return LabeledOperator(label=self.label, matrix=self.matrix)


class InvariantFamily(str, Enum):
    """Classification of invariant monomials."""

    FIRST = "First"    # single operator with lambda = 1
    SECOND = "Second"  # equal-lambda ratio <O1>/<O2>
    THIRD = "Third"    # any other exponent combination


class MonomialTerm(BaseModel):
    """One factor <O>^r of an invariant monomial."""

    operator: LabeledOperator
    exponent: int
    lambdas: Optional[List[complex]] = None

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("exponent")
    @classmethod
    def _nonzero(cls, value: int) -> int:
        if value == 0:
            raise ValueError("exponent must be nonzero")
        return value

    @property
    def token(self) -> str:
        return self.operator.token


class InvariantMonomial(BaseModel):
    """Product of expectation values prod_a <O_a>^{r_a} unchanged by the channel."""

    terms: List[MonomialTerm]
    family: InvariantFamily

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("terms")
    @classmethod
    def _term_count(cls, value: List[MonomialTerm]) -> List[MonomialTerm]:
        if not value:
            raise ValueError("a monomial needs at least one term")
        return value

    @property
    def dim(self) -> int:
        return self.terms[0].operator.dim

    @property
    def tokens(self) -> List[str]:
        return [term.token for term in self.terms]

    @property
    def exponents(self) -> List[int]:
        return [term.exponent for term in self.terms]

    def canonical_key(self) -> Tuple[Tuple[str, int], ...]:
        """Sorted tokens, first exponent positive, exponents reduced by their gcd.

        A monomial and its reciprocal or any of its integer powers share a key.
        """
        pairs = sorted(zip(self.tokens, self.exponents))
        divisor = 0
        for _, exponent in pairs:
            divisor = gcd(divisor, abs(exponent))
        sign = 1 if pairs[0][1] > 0 else -1
        return tuple((token, sign * exponent // divisor) for token, exponent in pairs)

    def render(self) -> str:
        """Text form such as ``<S(1,0)>*<A(1,0)>/<d(1)>``."""

        def factor(term: MonomialTerm) -> str:
            power = abs(term.exponent)
            return f"<{term.token}>" + (f"^{power}" if power != 1 else "")

        numerator = [factor(t) for t in self.terms if t.exponent > 0]
        denominator = [factor(t) for t in self.terms if t.exponent < 0]
        text = "*".join(numerator) if numerator else "1"
        if len(denominator) == 1:
            text += f"/{denominator[0]}"
        elif denominator:
            text += "/(" + "*".join(denominator) + ")"
        return text

    def __str__(self) -> str:
        return self.render()


class InvariantCatalogEntry(BaseModel):
    """Hard-coded invariant for a channel family with its provenance tag."""

    family_name: str
    dim: int
    monomial: InvariantMonomial
    source: str

    model_config = {"arbitrary_types_allowed": True, "frozen": True}


class VerificationReport(BaseModel):
    """Random-trial check of a monomial against a channel family."""

    monomial: str
    family_name: str
    trials: int
    max_relative_deviation: float
    undefined_rate: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_deviation <= self.tolerance


class CountRow(BaseModel):
    """One line of the invariant count table."""

    family: str
    dim: int
    first: int
    second_third: int
    total: int
    expected: int
    independent: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.total == self.expected


class TermRecord(BaseModel):
    """Serialized monomial term: operator token, exponent and optional lambdas as [re, im]."""

    op: str
    exp: int
    lambdas: Optional[List[Tuple[float, float]]] = None


class CatalogRecord(BaseModel):
    """Serialized catalog entry as written to catalog files and ``find --json``."""

    family: str
    dim: int
    terms: List[TermRecord]
    family_class: InvariantFamily
    source: str
