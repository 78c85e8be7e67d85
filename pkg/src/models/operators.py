"""Data models for labeled operators on a single quNit."""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, field_validator


class LabelKind(str, Enum):
    """Operator families of the basis."""

    SYM = "S"
    ANTISYM = "A"
    DIAG = "d"
    DIFF_DIAG = "D"
    PAULI_POWER = "XZ"
    PROJECTOR = "proj"
    CUSTOM = "custom"


class ProjectorKind(str, Enum):
    """Rank-one projectors used for count-rate measurements."""

    LEVEL = "level"      # |k><k|
    PLUS = "+"           # (|l> + |k>)/sqrt(2), k > l
    MINUS = "-"          # (|l> - |k>)/sqrt(2)
    PLUS_I = "+i"        # (|l> + i|k>)/sqrt(2)
    MINUS_I = "-i"       # (|l> - i|k>)/sqrt(2)


class OperatorLabel(BaseModel):
    """Name of an operator together with the dimension it lives in.

    Index conventions: ``indices`` holds ``(k, l)`` with ``k > l`` for
    Sym/Antisym/DiffDiag and projector pairs, ``(k,)`` for Diag and level
    projectors, and ``(r, s)`` for ``X^r Z^s``.
    """

    kind: LabelKind
    dim: int
    indices: Tuple[int, ...] = ()
    projector: Optional[ProjectorKind] = None
    name: Optional[str] = None

    model_config = {"frozen": True}

    @classmethod
    def sym(cls, k: int, l: int, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.SYM, dim=dim, indices=(k, l))

    @classmethod
    def antisym(cls, k: int, l: int, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.ANTISYM, dim=dim, indices=(k, l))

    @classmethod
    def diag(cls, k: int, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.DIAG, dim=dim, indices=(k,))

    @classmethod
    def diff_diag(cls, k: int, l: int, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.DIFF_DIAG, dim=dim, indices=(k, l))

    @classmethod
    def pauli_power(cls, r: int, s: int, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.PAULI_POWER, dim=dim, indices=(r, s))

    @classmethod
    def level_projector(cls, k: int, dim: int) -> "OperatorLabel":
        return cls(
            kind=LabelKind.PROJECTOR, dim=dim, indices=(k,), projector=ProjectorKind.LEVEL
        )

    @classmethod
    def pair_projector(
        cls, projector: ProjectorKind, k: int, l: int, dim: int
    ) -> "OperatorLabel":
        return cls(kind=LabelKind.PROJECTOR, dim=dim, indices=(k, l), projector=projector)

    @classmethod
    def custom(cls, name: str, dim: int) -> "OperatorLabel":
        return cls(kind=LabelKind.CUSTOM, dim=dim, name=name)

    @property
    def token(self) -> str:
        """Compact text form used in CLI tables and catalog files."""
        args = ",".join(str(i) for i in self.indices)
        if self.kind == LabelKind.CUSTOM:
            return self.name or "custom"
        if self.kind == LabelKind.PROJECTOR:
            if self.projector == ProjectorKind.LEVEL:
                return f"proj({args})"
            return f"proj({self.projector.value},{args})"
        return f"{self.kind.value}({args})"

    def __str__(self) -> str:
        return self.token


class LabeledOperator(BaseModel):
    """A named observable with its dense matrix."""

    label: OperatorLabel
    matrix: np.ndarray

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze_matrix(cls, value):
        matrix = np.array(value, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {matrix.shape}")
        matrix.flags.writeable = False
        return matrix

    @property
    def token(self) -> str:
        return self.label.token

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_unitary(self, tol: float = 1e-12) -> bool:
        product = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(product - np.eye(self.dim))) <= tol)
