"""Operator bases on a single quNit.

Builds the Hermitian S/A/d/D basis, the generalized Pauli powers X^r Z^s,
their decompositions into the measurable basis, and the projector
bookkeeping that turns count rates into expectation values.
"""

import logging
import re
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import settings
from src.models.errors import (
    DimensionError,
    IdentityPowerError,
    IncompleteDataError,
    MeasurementBasisError,
    OperatorIndexError,
)
from src.models.operators import LabeledOperator, LabelKind, OperatorLabel, ProjectorKind
from src.models.transfer import MeasurementRecord

logger = logging.getLogger(__name__)

POWER_KINDS = ("X", "Z", "XZ", "XmZn")

_PAIR_PHASES = {
    ProjectorKind.PLUS: 1.0,
    ProjectorKind.MINUS: -1.0,
    ProjectorKind.PLUS_I: 1j,
    ProjectorKind.MINUS_I: -1j,
}


def omega(dim: int) -> complex:
    """Primitive root exp(2 pi i / N)."""
    return np.exp(2j * np.pi / dim)


def omega_power(exponent: int, dim: int) -> complex:
    """omega^exponent with the exponent reduced modulo N first."""
    return np.exp(2j * np.pi * (exponent % dim) / dim)


def _check_dim(dim: int) -> None:
    if dim < 2:
        raise DimensionError(f"dimension must be at least 2, got {dim}")


def _check_pair(k: int, l: int, dim: int, what: str) -> None:
    if not (0 <= l < k <= dim - 1):
        raise OperatorIndexError(f"{what}({k},{l}) needs 0 <= l < k <= {dim - 1}")


def _check_level(k: int, dim: int, what: str) -> None:
    if not (0 <= k <= dim - 1):
        raise OperatorIndexError(f"{what}({k}) needs 0 <= k <= {dim - 1}")


def _ket(k: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def projector_matrix(label: OperatorLabel) -> np.ndarray:
    """Rank-one projector for a level or a (k, l) superposition.

    Pair projectors use the states (|l> + c|k>)/sqrt(2) with k > l and
    c in {1, -1, i, -i}, so S(k,l) = proj(+) - proj(-) and
    A(k,l) = proj(+i) - proj(-i).
    """
    dim = label.dim
    _check_dim(dim)
    if label.kind != LabelKind.PROJECTOR:
        raise OperatorIndexError(f"{label.token} is not a projector label")
    if label.projector == ProjectorKind.LEVEL:
        (k,) = label.indices
        _check_level(k, dim, "proj")
        state = _ket(k, dim)
    else:
        k, l = label.indices
        _check_pair(k, l, dim, f"proj({label.projector.value},")
        state = (_ket(l, dim) + _PAIR_PHASES[label.projector] * _ket(k, dim)) / np.sqrt(2)
    return np.outer(state, state.conj())


def _pauli_power_matrix(r: int, s: int, dim: int) -> np.ndarray:
    # X^r Z^s |l> = omega^{s l} |l + r>
    matrix = np.zeros((dim, dim), dtype=complex)
    for l in range(dim):
        matrix[(l + r) % dim, l] = omega_power(s * l, dim)
    return matrix


def basis_matrix(label: OperatorLabel) -> LabeledOperator:
    """Dense matrix for a basis label.

    S(k,l) has ones at (k,l) and (l,k); A(k,l) has i at (k,l) and -i at
    (l,k), so for N = 2 they are sigma_x and sigma_y. D(k,l) = d(k) - d(l).
    """
    dim = label.dim
    _check_dim(dim)
    matrix = np.zeros((dim, dim), dtype=complex)

    if label.kind == LabelKind.SYM:
        k, l = label.indices
        _check_pair(k, l, dim, "S")
        matrix[k, l] = matrix[l, k] = 1.0
    elif label.kind == LabelKind.ANTISYM:
        k, l = label.indices
        _check_pair(k, l, dim, "A")
        matrix[k, l] = 1j
        matrix[l, k] = -1j
    elif label.kind == LabelKind.DIAG:
        (k,) = label.indices
        _check_level(k, dim, "d")
        matrix[k, k] = 1.0
    elif label.kind == LabelKind.DIFF_DIAG:
        k, l = label.indices
        _check_pair(k, l, dim, "D")
        matrix[k, k] = 1.0
        matrix[l, l] = -1.0
    elif label.kind == LabelKind.PAULI_POWER:
        r, s = label.indices
        if not (0 <= r < dim and 0 <= s < dim):
            raise OperatorIndexError(f"XZ({r},{s}) needs 0 <= r,s <= {dim - 1}")
        matrix = _pauli_power_matrix(r, s, dim)
    elif label.kind == LabelKind.PROJECTOR:
        matrix = projector_matrix(label)
    else:
        return named_operator(label.name or "", dim)

    return LabeledOperator(label=label, matrix=matrix)


def gen_pauli_power(r: int, s: int, dim: int) -> LabeledOperator:
    """X^r Z^s with X the cyclic shift and Z = diag(omega^k)."""
    return basis_matrix(OperatorLabel.pauli_power(r, s, dim))


# Named operators of the transposition channel

def _sym_any(a: int, b: int, dim: int) -> np.ndarray:
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[a, b] = matrix[b, a] = 1.0
    return matrix


def _antisym_any(a: int, b: int, dim: int) -> np.ndarray:
    # A^(ab) for either index order; A^(ab) = -A^(ba)
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[a, b] = 1j
    matrix[b, a] = -1j
    return matrix


def transposition_sum(dim: int) -> LabeledOperator:
    """Ssum: sum of every S(k,l)."""
    _check_dim(dim)
    matrix = np.ones((dim, dim), dtype=complex) - np.eye(dim)
    return LabeledOperator(label=OperatorLabel.custom("Ssum", dim), matrix=matrix)


def transposition_row(k: int, dim: int) -> LabeledOperator:
    """Arow(k): sum over l != k of A^(kl)."""
    _check_dim(dim)
    _check_level(k, dim, "Arow")
    matrix = sum(_antisym_any(k, l, dim) for l in range(dim) if l != k)
    return LabeledOperator(label=OperatorLabel.custom(f"Arow({k})", dim), matrix=matrix)


def transposition_mirror(k: int, dim: int) -> LabeledOperator:
    """Smirror(k): sum over l outside {k, N-1-k} of S^(kl) - S^(N-1-k,l)."""
    _check_dim(dim)
    _check_level(k, dim, "Smirror")
    mirror = dim - 1 - k
    others = [l for l in range(dim) if l not in (k, mirror)]
    if mirror == k or not others:
        raise OperatorIndexError(f"Smirror({k}) vanishes for N={dim}")
    matrix = sum(_sym_any(k, l, dim) - _sym_any(mirror, l, dim) for l in others)
    return LabeledOperator(label=OperatorLabel.custom(f"Smirror({k})", dim), matrix=matrix)


_NAMED = {
    "Arow": transposition_row,
    "Smirror": transposition_mirror,
}


def named_operator(name: str, dim: int) -> LabeledOperator:
    if name == "Ssum":
        return transposition_sum(dim)
    match = re.fullmatch(r"(Arow|Smirror)\((\d+)\)", name)
    if match:
        return _NAMED[match.group(1)](int(match.group(2)), dim)
    raise OperatorIndexError(f"no matrix is known for custom operator '{name}'")


_TOKEN_PATTERNS = [
    (re.compile(r"(S|A|D)\((\d+),(\d+)\)"), "pair"),
    (re.compile(r"d\((\d+)\)"), "diag"),
    (re.compile(r"XZ\((\d+),(\d+)\)"), "power"),
    (re.compile(r"proj\((\d+)\)"), "level"),
    (re.compile(r"proj\((\+i|-i|\+|-),(\d+),(\d+)\)"), "pair_projector"),
    (re.compile(r"Ssum|(?:Arow|Smirror)\(\d+\)"), "named"),
]

_PAIR_FACTORIES = {
    "S": OperatorLabel.sym,
    "A": OperatorLabel.antisym,
    "D": OperatorLabel.diff_diag,
}


def parse_token(text: str, dim: int) -> OperatorLabel:
    """Inverse of ``OperatorLabel.token``; indices are range-checked."""
    token = text.strip()
    for pattern, kind in _TOKEN_PATTERNS:
        match = pattern.fullmatch(token)
        if not match:
            continue
        if kind == "pair":
            label = _PAIR_FACTORIES[match.group(1)](int(match.group(2)), int(match.group(3)), dim)
        elif kind == "diag":
            label = OperatorLabel.diag(int(match.group(1)), dim)
        elif kind == "power":
            label = OperatorLabel.pauli_power(int(match.group(1)), int(match.group(2)), dim)
        elif kind == "level":
            label = OperatorLabel.level_projector(int(match.group(1)), dim)
        elif kind == "pair_projector":
            label = OperatorLabel.pair_projector(
                ProjectorKind(match.group(1)), int(match.group(2)), int(match.group(3)), dim
            )
        else:
            label = OperatorLabel.custom(token, dim)
        basis_matrix(label)
        return label
    raise OperatorIndexError(f"unrecognized operator token '{text}'")


def operator_from_token(text: str, dim: int) -> LabeledOperator:
    return basis_matrix(parse_token(text, dim))


# Decompositions

def _outer_coefficients(a: int, b: int, dim: int) -> List[Tuple[OperatorLabel, complex]]:
    """|a><b| over the measurable basis."""
    if a == b:
        return [(OperatorLabel.diag(a, dim), 1.0 + 0j)]
    k, l = max(a, b), min(a, b)
    sign = -1.0 if a > b else 1.0
    return [
        (OperatorLabel.sym(k, l, dim), 0.5 + 0j),
        (OperatorLabel.antisym(k, l, dim), sign * 0.5j),
    ]


def _merge(pairs: Iterable[Tuple[OperatorLabel, complex]]) -> List[Tuple[OperatorLabel, complex]]:
    merged: Dict[OperatorLabel, complex] = {}
    for label, coeff in pairs:
        merged[label] = merged.get(label, 0j) + coeff
    return [
        (label, complex(coeff))
        for label, coeff in merged.items()
        if abs(coeff) > settings.ALGEBRA_TOL
    ]


def unitary_power_decomposition(
    kind: str, dim: int, m: int, n: int = 0
) -> List[Tuple[OperatorLabel, complex]]:
    """Expand X^m, Z^m, (XZ)^m or X^m Z^n over the S/A/d basis.

    Uses X^m = sum_l |l+m><l|, Z^m = sum_l omega^{lm} d(l),
    (XZ)^m |l> = omega^{ml + m(m-1)/2} |l+m> and X^m Z^n |l> = omega^{nl} |l+m>.
    The combination re-sums to the matrix power exactly.
    """
    _check_dim(dim)
    if kind not in POWER_KINDS:
        raise ValueError(f"unknown power kind '{kind}', expected one of {POWER_KINDS}")
    if kind == "XmZn":
        if m == 0 and n == 0:
            raise IdentityPowerError("X^0 Z^0 is the identity; handle it separately")
        if not (0 <= m < dim and 0 <= n < dim):
            raise OperatorIndexError(f"X^{m} Z^{n} needs exponents in 0..{dim - 1}")
    else:
        if m == 0:
            raise IdentityPowerError(f"{kind}^0 is the identity; handle it separately")
        if not (1 <= m < dim):
            raise OperatorIndexError(f"{kind}^{m} needs an exponent in 1..{dim - 1}")

    if kind == "Z":
        return _merge((OperatorLabel.diag(l, dim), omega_power(l * m, dim)) for l in range(dim))

    pairs: List[Tuple[OperatorLabel, complex]] = []
    for l in range(dim):
        if kind == "X":
            shift, phase = m, 1.0 + 0j
        elif kind == "XZ":
            shift, phase = m, omega_power(m * l + m * (m - 1) // 2, dim)
        else:
            shift, phase = m, omega_power(n * l, dim)
        for label, coeff in _outer_coefficients((l + shift) % dim, l, dim):
            pairs.append((label, phase * coeff))
    return _merge(pairs)


def expand_in_measurement_basis(matrix: np.ndarray) -> List[Tuple[OperatorLabel, complex]]:
    """Exact coefficients of any square matrix over d(k), S(k,l), A(k,l)."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise MeasurementBasisError(f"cannot expand a matrix of shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise MeasurementBasisError("matrix has non-finite entries")
    dim = matrix.shape[0]
    _check_dim(dim)
    pairs: List[Tuple[OperatorLabel, complex]] = []
    for k in range(dim):
        pairs.append((OperatorLabel.diag(k, dim), matrix[k, k]))
    for k in range(1, dim):
        for l in range(k):
            pairs.append((OperatorLabel.sym(k, l, dim), (matrix[k, l] + matrix[l, k]) / 2))
            pairs.append((OperatorLabel.antisym(k, l, dim), 1j * (matrix[l, k] - matrix[k, l]) / 2))
    return _merge(pairs)


def recombine(pairs: Sequence[Tuple[OperatorLabel, complex]], dim: int) -> np.ndarray:
    """Sum of coeff * basis_matrix(label)."""
    total = np.zeros((dim, dim), dtype=complex)
    for label, coeff in pairs:
        total = total + coeff * basis_matrix(label).matrix
    return total


def projectors_for(label: OperatorLabel) -> List[OperatorLabel]:
    """Projectors whose count rates determine the expectation of a basis label."""
    dim = label.dim
    if label.kind == LabelKind.DIAG:
        return [OperatorLabel.level_projector(label.indices[0], dim)]
    k, l = label.indices
    if label.kind == LabelKind.SYM:
        kinds = (ProjectorKind.PLUS, ProjectorKind.MINUS)
    elif label.kind == LabelKind.ANTISYM:
        kinds = (ProjectorKind.PLUS_I, ProjectorKind.MINUS_I)
    else:
        raise MeasurementBasisError(f"{label.token} is not measured directly")
    return [OperatorLabel.pair_projector(kind, k, l, dim) for kind in kinds]


RecordLike = Union[MeasurementRecord, Tuple[OperatorLabel, int, int]]


def basis_expectations_from_counts(
    records: Iterable[RecordLike], requested: Optional[Iterable[OperatorLabel]] = None
) -> Dict[OperatorLabel, float]:
    """Turn projector counts into <d(k)>, <S(k,l)> and <A(k,l)>.

    <d(k)> is the frequency of proj(k); <S(k,l)> = f(+) - f(-) and
    <A(k,l)> = f(+i) - f(-i). Without ``requested`` every expectation the
    records determine is returned; a requested label whose projectors are
    missing raises IncompleteDataError.
    """
    frequencies: Dict[OperatorLabel, float] = {}
    for record in records:
        if not isinstance(record, MeasurementRecord):
            projector, shots, successes = record
            record = MeasurementRecord(projector=projector, shots=shots, successes=successes)
        frequencies[record.projector] = record.frequency

    if requested is None:
        candidates = set()
        for projector in frequencies:
            dim = projector.dim
            if projector.projector == ProjectorKind.LEVEL:
                candidates.add(OperatorLabel.diag(projector.indices[0], dim))
            elif projector.projector in (ProjectorKind.PLUS, ProjectorKind.MINUS):
                candidates.add(OperatorLabel.sym(*projector.indices, dim))
            else:
                candidates.add(OperatorLabel.antisym(*projector.indices, dim))
        targets = sorted(
            (label for label in candidates
             if all(p in frequencies for p in projectors_for(label))),
            key=lambda label: label.token,
        )
    else:
        targets = list(requested)

    expectations: Dict[OperatorLabel, float] = {}
    for label in targets:
        needed = projectors_for(label)
        missing = [p.token for p in needed if p not in frequencies]
        if missing:
            raise IncompleteDataError(f"<{label.token}> needs records for {', '.join(missing)}")
        if len(needed) == 1:
            expectations[label] = frequencies[needed[0]]
        else:
            expectations[label] = frequencies[needed[0]] - frequencies[needed[1]]
    return expectations


@lru_cache(maxsize=32)
def operator_dictionary(dim: int) -> Tuple[LabeledOperator, ...]:
    """Readable operators used to label eigenoperators.

    Order: identity XZ(0,0), S, A, D, d, then X^r Z^s. Entries proportional
    to an earlier one are dropped.
    """
    _check_dim(dim)
    labels: List[OperatorLabel] = [OperatorLabel.pauli_power(0, 0, dim)]
    pairs = [(k, l) for k in range(1, dim) for l in range(k)]
    labels += [OperatorLabel.sym(k, l, dim) for k, l in pairs]
    labels += [OperatorLabel.antisym(k, l, dim) for k, l in pairs]
    labels += [OperatorLabel.diff_diag(k, l, dim) for k, l in pairs]
    labels += [OperatorLabel.diag(k, dim) for k in range(dim)]
    labels += [
        OperatorLabel.pauli_power(r, s, dim)
        for r in range(dim) for s in range(dim) if (r, s) != (0, 0)
    ]

    kept: List[LabeledOperator] = []
    units: List[np.ndarray] = []
    for label in labels:
        op = basis_matrix(label)
        unit = op.matrix.ravel() / op.hs_norm()
        if any(abs(np.vdot(u, unit)) > 1 - 1e-12 for u in units):
            logger.debug(f"Dropping {label.token}: proportional to an earlier operator")
            continue
        kept.append(op)
        units.append(unit)
    return tuple(kept)
