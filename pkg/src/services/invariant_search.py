"""Search for invariant monomials prod_a <O_a>^{r_a} and their numerical verification."""

import logging
import math
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.channels import ChannelFamily, DensityMatrix
from src.models.errors import DimensionError, ParameterError, VerificationBudgetError
from src.models.invariants import (
    Eigenoperator,
    InvariantFamily,
    InvariantMonomial,
    MonomialTerm,
    VerificationReport,
)
from src.models.operators import LabeledOperator
from src.services.channel_zoo import apply_channel, instantiate, random_density
from src.services.spectral_engine import SpectralEngine
from src.utils.linalg_utils import max_abs
from config.settings import settings

logger = logging.getLogger(__name__)

_TINY = 1e-300
_FAMILY_ORDER = {InvariantFamily.FIRST: 0, InvariantFamily.SECOND: 1, InvariantFamily.THIRD: 2}


def _is_identity(matrix: np.ndarray) -> bool:
    scale = matrix[0, 0]
    return abs(scale) > 0 and max_abs(matrix - scale * np.eye(matrix.shape[0])) <= 1e-10 * abs(scale)


def _exponent_vectors(size: int, max_exp: int) -> np.ndarray:
    """Exponent tuples with first entry positive and gcd 1."""
    values = [e for e in range(-max_exp, max_exp + 1) if e != 0]
    vectors = []
    for exps in product(values, repeat=size):
        if exps[0] < 0:
            continue
        divisor = 0
        for e in exps:
            divisor = math.gcd(divisor, abs(e))
        if divisor == 1:
            vectors.append(exps)
    return np.array(vectors, dtype=int).reshape(-1, size)


def _invariant_mask(lambdas: np.ndarray, exponents: np.ndarray, tol: float) -> np.ndarray:
    """Which exponent rows give prod lambda^r = 1 at every draw.

    ``lambdas`` has shape (terms, draws) and ``exponents`` (rows, terms).
    The test is |num - den| <= tol * |den| with num and den the products of
    the positive and negative powers, so zero scaling factors need no logs.
    """
    powers = np.abs(exponents)[:, :, None]
    raised = lambdas[None, :, :] ** powers
    positive = (exponents > 0)[:, :, None]
    num = np.prod(np.where(positive, raised, 1.0), axis=1)
    den = np.prod(np.where(positive, 1.0, raised), axis=1)
    ok = np.abs(num - den) <= tol * np.maximum(np.abs(den), _TINY)
    return np.all(ok, axis=1)


def classify(lambdas: Sequence[Sequence[complex]], exponents: Sequence[int]) -> InvariantFamily:
    """First: one operator with lambda 1. Second: equal-lambda ratio with lambda != 1 somewhere."""
    if len(exponents) == 1:
        if all(abs(lam - 1) <= 1e-8 for lam in lambdas[0]):
            return InvariantFamily.FIRST
        return InvariantFamily.THIRD
    if len(exponents) == 2 and sorted(exponents) == [-1, 1]:
        first, second = lambdas
        equal = all(abs(a - b) <= 1e-8 for a, b in zip(first, second))
        moving = any(abs(a - 1) > 1e-6 for a in first)
        if equal and moving:
            return InvariantFamily.SECOND
    return InvariantFamily.THIRD


def monomial_sort_key(monomial: InvariantMonomial):
    return (_FAMILY_ORDER[monomial.family], len(monomial.terms), monomial.canonical_key())


class InvariantSearch:
    """Bounded exhaustive search over products of robust eigenoperators."""

    def __init__(
        self,
        engine: Optional[SpectralEngine] = None,
        max_terms: Optional[int] = None,
        max_exp: Optional[int] = None,
        tol: Optional[float] = None,
    ):
        self.engine = engine or SpectralEngine()
        self.max_terms = max_terms or settings.MAX_TERMS
        self.max_exp = max_exp or settings.MAX_EXPONENT
        self.tol = tol or settings.INVARIANT_TOL

    def search(
        self,
        operators: Sequence[Eigenoperator],
        max_terms: Optional[int] = None,
        max_exp: Optional[int] = None,
    ) -> List[InvariantMonomial]:
        """Monomials over already-filtered eigenoperators."""
        max_terms = max_terms or self.max_terms
        max_exp = max_exp or self.max_exp
        pool = sorted(
            (
                op for op in operators
                if not _is_identity(op.matrix)
                and min(abs(lam) for lam in op.lambdas) > 1e-9
            ),
            key=lambda op: op.token,
        )
        if not pool:
            return []
        table = np.array([op.lambdas for op in pool], dtype=complex)

        accepted: Dict[Tuple, InvariantMonomial] = {}
        for size in range(1, min(max_terms, len(pool)) + 1):
            exponents = _exponent_vectors(size, max_exp)
            for indices in combinations(range(len(pool)), size):
                lambdas = table[list(indices)]
                mask = _invariant_mask(lambdas, exponents, self.tol)
                for row in exponents[mask]:
                    if self._has_invariant_subproduct(lambdas, row):
                        continue
                    monomial = self._build(pool, indices, row)
                    accepted.setdefault(monomial.canonical_key(), monomial)

        result = sorted(accepted.values(), key=monomial_sort_key)
        logger.info(f"Accepted {len(result)} invariant monomials from {len(pool)} operators")
        return result

    def _has_invariant_subproduct(self, lambdas: np.ndarray, row: np.ndarray) -> bool:
        size = len(row)
        for sub_size in range(1, size):
            for subset in combinations(range(size), sub_size):
                sub = list(subset)
                if _invariant_mask(lambdas[sub], row[sub][None, :], self.tol)[0]:
                    return True
        return False

    def _build(self, pool: Sequence[Eigenoperator], indices: Sequence[int], row: np.ndarray) -> InvariantMonomial:
        terms = [
            MonomialTerm(
                operator=pool[i].as_labeled(),
                exponent=int(r),
                lambdas=list(pool[i].lambdas),
            )
            for i, r in zip(indices, row)
        ]
        family = classify([t.lambdas for t in terms], [t.exponent for t in terms])
        return InvariantMonomial(terms=terms, family=family)

    def find_invariants(
        self,
        family: ChannelFamily,
        samples: Optional[int] = None,
        max_terms: Optional[int] = None,
        max_exp: Optional[int] = None,
        seed: Optional[int] = None,
        extra_operators: Optional[Sequence[LabeledOperator]] = None,
    ) -> List[InvariantMonomial]:
        """Invariant monomials of a channel family.

        A monomial is kept when prod lambda^r is 1 within tolerance at all
        draws and no proper sub-product of its terms is already invariant.
        The identity operator is left out. An empty list is a valid result.

        Candidates come from the operator dictionary and from eigenspaces
        shared by all draws. Composite operators outside both, such as
        ``Ssum`` or ``Arow(k)`` of the transposition channel, are only
        found when passed in ``extra_operators`` (see ``catalog_operators``).
        """
        robust = self.engine.robust_eigenoperators(family, samples, seed, extra_operators)
        return self.search(robust, max_terms, max_exp)


def evaluate_invariant(
    monomial: InvariantMonomial, rho: DensityMatrix, eps_den: Optional[float] = None
) -> Optional[complex]:
    """prod_a Tr(O_a rho)^{r_a}, or None when a denominator is below ``eps_den``."""
    eps_den = settings.EPS_DEN if eps_den is None else eps_den
    if monomial.dim != rho.dim:
        raise DimensionError(f"invariant acts on N={monomial.dim} but state has N={rho.dim}")
    value = 1.0 + 0j
    for term in monomial.terms:
        expectation = rho.expectation(term.operator.matrix)
        if term.exponent < 0 and abs(expectation) < eps_den:
            return None
        value *= expectation ** term.exponent
    return complex(value)


def verify_invariance(
    monomial: InvariantMonomial,
    family: ChannelFamily,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    eps_den: Optional[float] = None,
) -> VerificationReport:
    """Largest relative change of the invariant over random states and parameter draws.

    Trials where the invariant is undefined before or after the channel are
    resampled; the undefined share of all attempts may not exceed
    MAX_UNDEFINED_FRACTION.
    """
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = settings.INVFORGE_SEED if seed is None else seed
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    if monomial.dim != family.dim:
        raise DimensionError(f"invariant acts on N={monomial.dim} but family has N={family.dim}")

    budget = math.ceil(trials / (1.0 - settings.MAX_UNDEFINED_FRACTION))
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = attempts = undefined = 0
    while done < trials:
        if attempts >= budget:
            raise VerificationBudgetError(
                f"{monomial} stayed undefined on {undefined} of {attempts} attempts for {family.name}"
            )
        attempts += 1
        channel = instantiate(family, family.sample(rng))
        rho = random_density(family.dim, rng=rng)
        before = evaluate_invariant(monomial, rho, eps_den)
        after = evaluate_invariant(monomial, apply_channel(channel, rho), eps_den)
        if before is None or after is None:
            undefined += 1
            continue
        worst = max(worst, abs(after - before) / max(abs(before), 1e-12))
        done += 1

    report = VerificationReport(
        monomial=monomial.render(),
        family_name=family.name,
        trials=trials,
        max_relative_deviation=worst,
        undefined_rate=undefined / attempts,
        tolerance=settings.VERIFY_TOL,
    )
    logger.info(f"Verified {report.monomial} on {family.name}: max deviation {worst:.3e}")
    return report


def find_invariants(
    family: ChannelFamily,
    samples: Optional[int] = None,
    max_terms: Optional[int] = None,
    max_exp: Optional[int] = None,
    seed: Optional[int] = None,
    extra_operators: Optional[Sequence[LabeledOperator]] = None,
) -> List[InvariantMonomial]:
    return InvariantSearch().find_invariants(family, samples, max_terms, max_exp, seed, extra_operators)
