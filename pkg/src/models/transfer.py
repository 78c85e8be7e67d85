"""Data models for measurement records, codebooks and transmission transcripts."""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from src.models.channels import ChannelFamily, DensityMatrix
from src.models.invariants import InvariantMonomial
from src.models.operators import LabelKind, OperatorLabel


class MeasurementRecord(BaseModel):
    """Counts for one projector measured on fresh copies of a state."""

    projector: OperatorLabel
    shots: int = Field(gt=0)
    successes: int = Field(ge=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_counts(self):
        if self.projector.kind != LabelKind.PROJECTOR:
            raise ValueError(f"{self.projector.token} is not a projector label")
        if self.successes > self.shots:
            raise ValueError(f"successes {self.successes} exceed shots {self.shots}")
        return self

    @property
    def frequency(self) -> float:
        return self.successes / self.shots


class CodebookSymbol(BaseModel):
    """A prepared state and the invariant values it carries."""

    symbol: int
    state: DensityMatrix
    targets: np.ndarray  # real coordinates: real and imaginary parts split

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("targets", mode="before")
    @classmethod
    def _freeze_targets(cls, value):
        targets = np.array(value, dtype=float)
        targets.flags.writeable = False
        return targets


class Codebook(BaseModel):
    """Symbols separated by at least ``delta`` in the max-norm of invariant values."""

    family: ChannelFamily
    invariants: List[InvariantMonomial]
    symbols: List[CodebookSymbol]
    delta: float

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    def symbol(self, symbol_id: int) -> Optional[CodebookSymbol]:
        for entry in self.symbols:
            if entry.symbol == symbol_id:
                return entry
        return None


class TransmissionRecord(BaseModel):
    """Transcript line for one transmitted symbol."""

    symbol: int
    sent_invariants: List[float]
    received_invariants: Optional[List[float]] = None
    decoded: Optional[int] = None
    erasure_flag: bool = False
    shots: Optional[int] = None
    distance: Optional[float] = None


class TransmissionResult(BaseModel):
    """Decoded message plus per-symbol diagnostics."""

    message: List[int]
    decoded: List[Optional[int]]
    records: List[TransmissionRecord]
