"""Adjoint superoperators and their eigenoperators.

Vectorization is column stacking, vec(A O B) = (B^T kron A) vec(O), so the
adjoint channel O -> sum_k E_k^dagger O E_k has the matrix
M = sum_k E_k^T kron E_k^dagger.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from src.models.channels import ChannelFamily, KrausChannel
from src.models.errors import DimensionError, NumericError, ParameterError
from src.models.invariants import Eigenoperator
from src.models.operators import LabeledOperator, OperatorLabel
from src.services.channel_zoo import check_domain, instantiate
from src.services.operator_basis import operator_dictionary
from src.utils.linalg_utils import (
    canonical_phase,
    hermitian_basis,
    max_abs,
    orthonormal_columns,
    span_residual,
    unvec,
    vec,
)
from config.settings import settings

logger = logging.getLogger(__name__)

Eigenspace = Tuple[complex, List[LabeledOperator]]

_SPAN_TOL = 1e-7


def adjoint_superoperator(channel: KrausChannel) -> np.ndarray:
    """N^2 x N^2 matrix of O -> sum_k E_k^dagger O E_k."""
    return sum(np.kron(e.T, e.conj().T) for e in channel.kraus)


def apply_adjoint(channel: KrausChannel, operator: np.ndarray) -> np.ndarray:
    return sum(e.conj().T @ operator @ e for e in channel.kraus)


def _as_matrix(operator: Union[LabeledOperator, np.ndarray]) -> np.ndarray:
    if isinstance(operator, LabeledOperator):
        return operator.matrix
    return np.asarray(operator, dtype=complex)


def _rayleigh(superop: np.ndarray, vector: np.ndarray) -> Tuple[complex, float]:
    """(lambda, max residual) for a vec'd operator, residual measured at unit HS norm."""
    unit = vector / np.linalg.norm(vector)
    image = superop @ unit
    lam = complex(np.vdot(unit, image))
    return lam, max_abs(image - lam * unit)


def _sort_key(lam: complex) -> Tuple[float, float]:
    return (-round(lam.real, 9), round(lam.imag, 9))


class SpectralEngine:
    """Eigen-analysis of adjoint channels, single draws and whole families."""

    def __init__(
        self,
        degeneracy_tol: Optional[float] = None,
        residual_tol: Optional[float] = None,
        max_workers: Optional[int] = None,
    ):
        self.degeneracy_tol = degeneracy_tol or settings.DEGENERACY_TOL
        self.residual_tol = residual_tol or settings.RESIDUAL_TOL
        self.max_workers = max_workers or settings.MAX_WORKERS

    def _eigenspaces(self, superop: np.ndarray, tol: float) -> List[Tuple[complex, np.ndarray]]:
        """Clustered eigenvalues with orthonormal null-space bases (vec'd columns)."""
        try:
            values = scipy.linalg.eigvals(superop)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericError(f"eigensolver failed: {e}") from e

        clusters: List[List[complex]] = []
        for value in values:
            for cluster in clusters:
                if abs(value - cluster[0]) <= tol:
                    cluster.append(value)
                    break
            else:
                clusters.append([value])

        size = superop.shape[0]
        spaces = []
        for cluster in clusters:
            lam = complex(np.mean(cluster))
            count = len(cluster)
            try:
                _, singular, vh = scipy.linalg.svd(superop - lam * np.eye(size))
            except (np.linalg.LinAlgError, ValueError) as e:
                raise NumericError(f"SVD failed near eigenvalue {lam:.6g}: {e}") from e
            scale = max(1.0, singular[0])
            if singular[size - count] > 1e-6 * scale:
                raise NumericError(
                    f"adjoint is defective near eigenvalue {lam:.6g} "
                    f"(multiplicity {count}, null-space defect {singular[size - count]:.3e})"
                )
            spaces.append((lam, vh[size - count:].conj().T))
        spaces.sort(key=lambda item: _sort_key(item[0]))
        return spaces

    def eigenoperators(self, channel: KrausChannel, tol: Optional[float] = None) -> List[Eigenspace]:
        """Eigenvalues of the adjoint grouped within ``tol``, each with an orthonormal basis.

        Eigenspaces with real eigenvalue that are closed under conjugate
        transpose get a Hermitian basis.
        """
        tol = tol or self.degeneracy_tol
        superop = adjoint_superoperator(channel)
        dim = channel.dim
        result: List[Eigenspace] = []
        for index, (lam, basis) in enumerate(self._eigenspaces(superop, tol)):
            hermitian = False
            if abs(lam.imag) <= tol:
                lam = complex(lam.real, 0.0)
                daggers = [vec(unvec(basis[:, j]).conj().T) for j in range(basis.shape[1])]
                if all(span_residual(basis, d) <= _SPAN_TOL for d in daggers):
                    basis = hermitian_basis(basis)
                    hermitian = True
            operators = []
            for j in range(basis.shape[1]):
                matrix = canonical_phase(unvec(basis[:, j]), hermitian=hermitian)
                label = OperatorLabel.custom(f"E{index}.{j}", dim)
                operators.append(LabeledOperator(label=label, matrix=matrix))
            logger.debug(f"Eigenvalue {lam:.6g} with multiplicity {len(operators)}")
            result.append((lam, operators))
        return result

    def scaling_factor(
        self,
        channel: KrausChannel,
        operator: Union[LabeledOperator, np.ndarray],
        tol: Optional[float] = None,
    ) -> Optional[complex]:
        """lambda = Tr(O^dagger Adj(O)) / Tr(O^dagger O) when Adj(O) = lambda O within ``tol``."""
        tol = tol or self.residual_tol
        matrix = _as_matrix(operator)
        if matrix.shape != (channel.dim, channel.dim):
            raise DimensionError(
                f"operator of shape {matrix.shape} does not act on N={channel.dim}"
            )
        norm = float(np.vdot(matrix, matrix).real)
        if norm == 0:
            return None
        image = apply_adjoint(channel, matrix)
        lam = complex(np.vdot(matrix, image) / norm)
        if max_abs(image - lam * matrix) > tol:
            return None
        return lam

    def _superoperators(self, channels: Sequence[KrausChannel]) -> List[np.ndarray]:
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(adjoint_superoperator, channels))

    def robust_eigenoperators(
        self,
        family: ChannelFamily,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        extra_operators: Optional[Sequence[LabeledOperator]] = None,
    ) -> List[Eigenoperator]:
        """Operators that stay eigenoperators at every sampled parameter draw.

        The reference draw keeps each parameter inside the inner part of its
        range. Candidates are dictionary operators lying in a reference
        eigenspace, the reference eigenspaces re-diagonalized against the
        second draw, and ``extra_operators``. A candidate survives when its
        residual is within tolerance at all draws.
        """
        samples = samples or settings.DEFAULT_SAMPLES
        seed = settings.INVFORGE_SEED if seed is None else seed
        if samples < 3:
            raise ParameterError(f"robust filtering needs at least 3 draws, got {samples}")
        check_domain(family)

        rng = np.random.default_rng(seed)
        draws = [family.sample(rng, interior=True, margin=settings.REFERENCE_MARGIN)]
        draws += [family.sample(rng) for _ in range(samples - 1)]
        channels = [instantiate(family, draw) for draw in draws]
        superops = self._superoperators(channels)
        logger.info(f"Sampled {samples} draws of {family.name} (N={family.dim})")

        dim = family.dim
        labeled: List[LabeledOperator] = []
        custom: List[np.ndarray] = []
        seen = set()
        dictionary = operator_dictionary(dim)

        for lam, basis in self._eigenspaces(superops[0], self.degeneracy_tol):
            for op in dictionary:
                if op.token not in seen and span_residual(basis, vec(op.matrix)) <= _SPAN_TOL:
                    labeled.append(op)
                    seen.add(op.token)
            if basis.shape[1] == 1:
                custom.append(basis[:, 0])
                continue
            reduced = basis.conj().T @ superops[1] @ basis
            try:
                _, mixing = scipy.linalg.eig(reduced)
            except (np.linalg.LinAlgError, ValueError) as e:
                raise NumericError(f"re-diagonalization failed near {lam:.6g}: {e}") from e
            joint = basis @ mixing
            custom.extend(joint[:, j] for j in range(joint.shape[1]))

        for op in extra_operators or []:
            if op.dim != dim:
                raise DimensionError(f"extra operator {op.token} has N={op.dim}, expected {dim}")
            if op.token not in seen:
                labeled.append(op)
                seen.add(op.token)

        survivors: List[Eigenoperator] = []
        for op in labeled:
            found = self._track(vec(op.matrix), superops)
            if found is None:
                logger.debug(f"{op.token} is not an eigenoperator at every draw")
                continue
            lambdas, residuals = found
            hermitian = op.is_hermitian()
            survivors.append(Eigenoperator(
                label=op.label,
                matrix=canonical_phase(op.matrix, hermitian=hermitian),
                lambdas=lambdas,
                residuals=residuals,
                hermitian=hermitian,
                operator=op,
            ))

        span = orthonormal_columns(vec(e.matrix) for e in survivors)
        extras: List[Eigenoperator] = []
        for vector in custom:
            if span.size and span_residual(span, vector) <= 1e-6:
                continue
            found = self._track(vector, superops)
            if found is None:
                continue
            lambdas, residuals = found
            matrix = unvec(vector)
            hermitian = bool(max_abs(matrix - matrix.conj().T) <= 1e-10 * np.linalg.norm(matrix))
            extras.append(Eigenoperator(
                label=OperatorLabel.custom("custom", dim),
                matrix=canonical_phase(matrix, hermitian=hermitian),
                lambdas=lambdas,
                residuals=residuals,
                hermitian=hermitian,
            ))
            span = orthonormal_columns(
                [span[:, j] for j in range(span.shape[1] if span.size else 0)] + [vector]
            )

        survivors.sort(key=lambda e: _sort_key(e.lambdas[0]) + (e.token,))
        extras.sort(key=lambda e: _sort_key(e.lambdas[0]))
        for index, extra in enumerate(extras):
            survivors.append(extra.model_copy(
                update={"label": OperatorLabel.custom(f"O{index}", dim)}
            ))
        logger.info(
            f"{family.name} (N={dim}): {len(survivors)} robust eigenoperators "
            f"({len(extras)} unlabeled)"
        )
        return survivors

    def _track(
        self, vector: np.ndarray, superops: Sequence[np.ndarray]
    ) -> Optional[Tuple[List[complex], List[float]]]:
        if np.linalg.norm(vector) == 0:
            return None
        lambdas, residuals = [], []
        for superop in superops:
            lam, residual = _rayleigh(superop, vector)
            if residual > self.residual_tol:
                return None
            lambdas.append(lam)
            residuals.append(residual)
        return lambdas, residuals


_default_engine = SpectralEngine()


def eigenoperators(channel: KrausChannel, tol: Optional[float] = None) -> List[Eigenspace]:
    return _default_engine.eigenoperators(channel, tol)


def scaling_factor(
    channel: KrausChannel,
    operator: Union[LabeledOperator, np.ndarray],
    tol: Optional[float] = None,
) -> Optional[complex]:
    return _default_engine.scaling_factor(channel, operator, tol)


def robust_eigenoperators(
    family: ChannelFamily,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    extra_operators: Optional[Sequence[LabeledOperator]] = None,
) -> List[Eigenoperator]:
    return _default_engine.robust_eigenoperators(family, samples, seed, extra_operators)
