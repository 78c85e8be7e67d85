"""Data models for states, Kraus channels and channel families."""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class DensityMatrix(BaseModel):
    """Hermitian, unit-trace, positive-semidefinite N x N state."""

    matrix: np.ndarray
    hermitian_tol: float = 1e-12
    trace_tol: float = 1e-12
    psd_tol: float = 1e-10

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("matrix", mode="before")
    @classmethod
    def _freeze_matrix(cls, value):
        matrix = np.array(value, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {matrix.shape}")
        matrix.flags.writeable = False
        return matrix

    @model_validator(mode="after")
    def _check_state(self):
        m = self.matrix
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > self.hermitian_tol:
            raise ValueError(f"density matrix is not Hermitian (asymmetry {asym:.3e})")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > self.trace_tol:
            raise ValueError(f"density matrix trace {trace:.12f} differs from 1")
        smallest = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)))
        if smallest < -self.psd_tol:
            raise ValueError(f"density matrix has negative eigenvalue {smallest:.3e}")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def expectation(self, operator: np.ndarray) -> complex:
        """Tr(O rho)."""
        return complex(np.trace(operator @ self.matrix))


class KrausChannel(BaseModel):
    """Concrete Kraus-operator set {E_k} acting on one quNit."""

    name: str
    dim: int
    kraus: Tuple[np.ndarray, ...]
    params: Dict[str, float] = Field(default_factory=dict)

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @field_validator("kraus", mode="before")
    @classmethod
    def _freeze_kraus(cls, value):
        operators = []
        for op in value:
            matrix = np.array(op, dtype=complex)
            matrix.flags.writeable = False
            operators.append(matrix)
        if not operators:
            raise ValueError("a channel needs at least one Kraus operator")
        return tuple(operators)

    @model_validator(mode="after")
    def _check_shapes(self):
        for i, op in enumerate(self.kraus):
            if op.shape != (self.dim, self.dim):
                raise ValueError(
                    f"Kraus operator {i} has shape {op.shape}, expected ({self.dim}, {self.dim})"
                )
        return self


class ParameterSpec(BaseModel):
    """One noise parameter: name, box bounds and optional simplex group."""

    name: str
    lower: float = 0.0
    upper: float = 1.0
    simplex_group: Optional[str] = None

    model_config = {"frozen": True}


class ChannelFamily(BaseModel):
    """Parameterized family mapping noise parameters to a KrausChannel."""

    name: str
    dim: int
    param_spec: List[ParameterSpec]
    builder: Callable[[Dict[str, float]], KrausChannel]
    qubit_only: bool = False
    strict: bool = False
    description: str = ""

    model_config = {"arbitrary_types_allowed": True, "frozen": True}

    @property
    def param_names(self) -> List[str]:
        return [spec.name for spec in self.param_spec]

    def simplex_groups(self) -> Dict[str, List[ParameterSpec]]:
        groups: Dict[str, List[ParameterSpec]] = {}
        for spec in self.param_spec:
            if spec.simplex_group is not None:
                groups.setdefault(spec.simplex_group, []).append(spec)
        return groups

    def sample(
        self, rng: np.random.Generator, interior: bool = False, margin: float = 0.15
    ) -> Dict[str, float]:
        """Draw one admissible parameter point.

        Box parameters are uniform over their range; simplex groups are
        normalized exponential draws. With ``interior`` every value keeps
        away from the boundary by ``margin`` of its range.
        """
        point: Dict[str, float] = {}
        for spec in self.param_spec:
            if spec.simplex_group is not None:
                continue
            lo, hi = spec.lower, spec.upper
            if interior:
                lo, hi = lo + margin * (hi - lo), hi - margin * (hi - lo)
            point[spec.name] = float(rng.uniform(lo, hi))
        for group in self.simplex_groups().values():
            if interior:
                weights = rng.uniform(margin, 1.0 - margin, size=len(group))
            else:
                weights = rng.exponential(1.0, size=len(group))
            weights = weights / weights.sum()
            for spec, weight in zip(group, weights):
                point[spec.name] = float(weight)
        return point


class CPTPReport(BaseModel):
    """Outcome of the completeness check sum_k E_k^dagger E_k = 1."""

    passed: bool
    max_deviation: float
    kraus_norms: List[float]
    tolerance: float


class ChannelSpecDocument(BaseModel):
    """Channel-spec file: a named family point or explicit Kraus matrices."""

    name: str
    dim: int
    family_params: Optional[Dict[str, float]] = None
    kraus: Optional[List[List[List[List[float]]]]] = None  # [op][row][col] -> [re, im]

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.family_params is None) == (self.kraus is None):
            raise ValueError("exactly one of 'family_params' or 'kraus' is required")
        return self
