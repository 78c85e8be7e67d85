"""Error-immune transfer: encode symbols in invariant values, measure, decode."""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.models.channels import ChannelFamily, DensityMatrix
from src.models.errors import (
    CodebookBudgetError,
    MeasurementBasisError,
    NoInvariantsError,
    ParameterError,
    UnknownSymbolError,
)
from src.models.invariants import InvariantMonomial
from src.models.operators import LabeledOperator, LabelKind, OperatorLabel
from src.models.transfer import (
    Codebook,
    CodebookSymbol,
    MeasurementRecord,
    TransmissionRecord,
    TransmissionResult,
)
from src.services.channel_zoo import apply_channel, instantiate, random_density
from src.services.invariant_catalog import paper_catalog
from src.services.invariant_search import evaluate_invariant, find_invariants
from src.services.operator_basis import (
    basis_expectations_from_counts,
    expand_in_measurement_basis,
    projector_matrix,
    projectors_for,
    unitary_power_decomposition,
)
from config.settings import settings

logger = logging.getLogger(__name__)

__all__ = [
    "TransferSimulator",
    "build_codebook",
    "estimate_expectation",
    "random_density",
    "transmission_accuracy",
    "transmit",
]

Shots = Union[int, float]


def _expansion(operator: LabeledOperator) -> List[Tuple[OperatorLabel, complex]]:
    label = operator.label
    if label.kind == LabelKind.PAULI_POWER and label.indices != (0, 0):
        r, s = label.indices
        return unitary_power_decomposition("XmZn", label.dim, r, s)
    return expand_in_measurement_basis(operator.matrix)


def estimate_expectation(
    rho: DensityMatrix,
    operator: LabeledOperator,
    shots: Shots,
    seed: Optional[int] = None,
) -> Tuple[complex, List[MeasurementRecord]]:
    """Estimate Tr(O rho) from simulated projector counts.

    O is expanded over d/S/A; each projector needed gets a binomial draw of
    ``shots`` trials on fresh copies. ``shots = math.inf`` returns the exact
    value with no records.
    """
    if operator.dim != rho.dim:
        raise MeasurementBasisError(f"{operator.token} acts on N={operator.dim}, state has N={rho.dim}")
    if not np.all(np.isfinite(operator.matrix)):
        raise MeasurementBasisError(f"{operator.token} has non-finite entries")
    if shots == math.inf:
        return rho.expectation(operator.matrix), []
    if shots < 1:
        raise ParameterError(f"shots must be at least 1, got {shots}")

    expansion = _expansion(operator)
    rng = np.random.default_rng(seed)
    records: List[MeasurementRecord] = []
    measured = set()
    for label, _ in expansion:
        for projector in projectors_for(label):
            if projector in measured:
                continue
            measured.add(projector)
            prob = float(np.clip(rho.expectation(projector_matrix(projector)).real, 0.0, 1.0))
            successes = int(rng.binomial(int(shots), prob))
            records.append(MeasurementRecord(projector=projector, shots=int(shots), successes=successes))

    expectations = basis_expectations_from_counts(records, [label for label, _ in expansion])
    estimate = sum(coeff * expectations[label] for label, coeff in expansion)
    return complex(estimate), records


def _is_complex_valued(monomial: InvariantMonomial) -> bool:
    return any(not term.operator.is_hermitian(1e-12) for term in monomial.terms)


def invariant_coordinates(monomials: Sequence[InvariantMonomial], values: Sequence[complex]) -> np.ndarray:
    """Real decoding coordinates: real part, plus imaginary part for complex-valued invariants."""
    coords: List[float] = []
    for monomial, value in zip(monomials, values):
        coords.append(value.real)
        if _is_complex_valued(monomial):
            coords.append(value.imag)
    return np.array(coords, dtype=float)


def default_invariants(family: ChannelFamily, seed: Optional[int] = None) -> List[InvariantMonomial]:
    """Catalog invariants of the family, or the search result when it has no catalog entries."""
    monomials = [entry.monomial for entry in paper_catalog(family.name, family.dim)]
    if not monomials:
        monomials = find_invariants(family, seed=seed)
    if not monomials:
        raise NoInvariantsError(f"'{family.name}' admits no invariant besides the identity")
    return monomials


class TransferSimulator:
    """Codebook construction and noisy transmission of symbol streams."""

    def __init__(
        self,
        eps_den: Optional[float] = None,
        denominator_floor: Optional[float] = None,
        max_draws: Optional[int] = None,
    ):
        self.eps_den = eps_den or settings.EPS_DEN
        self.denominator_floor = denominator_floor or settings.CODEBOOK_DENOMINATOR_FLOOR
        self.max_draws = max_draws or settings.CODEBOOK_MAX_DRAWS

    def _well_conditioned(self, monomials: Sequence[InvariantMonomial], rho: DensityMatrix) -> bool:
        for monomial in monomials:
            for term in monomial.terms:
                if term.exponent < 0 and abs(rho.expectation(term.operator.matrix)) < self.denominator_floor:
                    return False
        return True

    def build_codebook(
        self,
        family: ChannelFamily,
        size: int,
        delta: float,
        seed: Optional[int] = None,
        invariants: Optional[Sequence[InvariantMonomial]] = None,
    ) -> Codebook:
        """Rejection-sample ``size`` states whose invariant vectors are pairwise >= delta apart."""
        if size < 2:
            raise ParameterError(f"a codebook needs at least 2 symbols, got {size}")
        seed = settings.INVFORGE_SEED if seed is None else seed
        monomials = list(invariants) if invariants is not None else default_invariants(family, seed)
        if not monomials:
            raise NoInvariantsError(f"'{family.name}' admits no invariant besides the identity")

        rng = np.random.default_rng(seed)
        symbols: List[CodebookSymbol] = []
        for draw in range(self.max_draws):
            rho = random_density(family.dim, rng=rng)
            if not self._well_conditioned(monomials, rho):
                continue
            values = [evaluate_invariant(m, rho, self.eps_den) for m in monomials]
            if any(v is None for v in values):
                continue
            coords = invariant_coordinates(monomials, values)
            if all(np.max(np.abs(coords - s.targets)) >= delta for s in symbols):
                symbols.append(CodebookSymbol(symbol=len(symbols), state=rho, targets=coords))
                if len(symbols) == size:
                    logger.info(f"Codebook of {size} symbols for {family.name} after {draw + 1} draws")
                    return Codebook(family=family, invariants=monomials, symbols=symbols, delta=delta)

        raise CodebookBudgetError(
            f"found only {len(symbols)} of {size} symbols {delta} apart in {self.max_draws} draws"
        )

    def _receive(
        self,
        codebook: Codebook,
        rho: DensityMatrix,
        shots: Shots,
        rng: np.random.Generator,
    ) -> Optional[np.ndarray]:
        estimates: Dict[str, complex] = {}
        values = []
        for monomial in codebook.invariants:
            value = 1.0 + 0j
            for term in monomial.terms:
                if term.token not in estimates:
                    estimates[term.token], _ = estimate_expectation(
                        rho, term.operator, shots, seed=int(rng.integers(2 ** 63))
                    )
                expectation = estimates[term.token]
                if term.exponent < 0 and abs(expectation) < self.eps_den:
                    return None
                value *= expectation ** term.exponent
            values.append(complex(value))
        return invariant_coordinates(codebook.invariants, values)

    def transmit(
        self,
        codebook: Codebook,
        message: Sequence[int],
        params: Dict[str, float],
        shots: Shots = math.inf,
        seed: Optional[int] = None,
    ) -> TransmissionResult:
        """Send each symbol's state through the channel and decode by nearest target.

        Symbol i uses the seed ``seed ^ i``. A denominator that falls below
        eps_den at the receiver marks the symbol as an erasure.
        """
        seed = settings.INVFORGE_SEED if seed is None else seed
        channel = instantiate(codebook.family, params)
        targets = np.array([s.targets for s in codebook.symbols])
        shots_field = None if shots == math.inf else int(shots)

        decoded: List[Optional[int]] = []
        records: List[TransmissionRecord] = []
        for index, symbol_id in enumerate(message):
            entry = codebook.symbol(symbol_id)
            if entry is None:
                raise UnknownSymbolError(f"symbol {symbol_id} is not in the codebook")
            rng = np.random.default_rng(seed ^ index)
            received = self._receive(codebook, apply_channel(channel, entry.state), shots, rng)
            if received is None:
                logger.warning(f"Symbol {index} ({symbol_id}) erased: denominator below {self.eps_den}")
                decoded.append(None)
                records.append(TransmissionRecord(
                    symbol=symbol_id,
                    sent_invariants=entry.targets.tolist(),
                    erasure_flag=True,
                    shots=shots_field,
                ))
                continue
            distances = np.max(np.abs(targets - received[None, :]), axis=1)
            best = int(np.argmin(distances))
            guess = codebook.symbols[best].symbol
            decoded.append(guess)
            records.append(TransmissionRecord(
                symbol=symbol_id,
                sent_invariants=entry.targets.tolist(),
                received_invariants=received.tolist(),
                decoded=guess,
                shots=shots_field,
                distance=float(distances[best]),
            ))

        result = TransmissionResult(message=list(message), decoded=decoded, records=records)
        logger.info(
            f"Transmitted {len(message)} symbols over {codebook.family.name}: "
            f"accuracy {transmission_accuracy(result):.3f}"
        )
        return result


def transmission_accuracy(result: TransmissionResult) -> float:
    """Share of symbols decoded correctly; erasures count as failures."""
    if not result.message:
        return 1.0
    hits = sum(1 for sent, got in zip(result.message, result.decoded) if got is not None and got == sent)
    return hits / len(result.message)


def build_codebook(
    family: ChannelFamily,
    size: int,
    delta: float,
    seed: Optional[int] = None,
    invariants: Optional[Sequence[InvariantMonomial]] = None,
) -> Codebook:
    return TransferSimulator().build_codebook(family, size, delta, seed, invariants)


def transmit(
    codebook: Codebook,
    message: Sequence[int],
    params: Dict[str, float],
    shots: Shots = math.inf,
    seed: Optional[int] = None,
) -> TransmissionResult:
    return TransferSimulator().transmit(codebook, message, params, shots, seed)
