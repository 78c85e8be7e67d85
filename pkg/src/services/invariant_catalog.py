"""Hard-coded invariant catalogs and the invariant count table."""

import logging
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.models.errors import DimensionError, UnknownCatalogError
from src.models.invariants import (
    CountRow,
    InvariantCatalogEntry,
    InvariantFamily,
    InvariantMonomial,
    MonomialTerm,
)
from src.models.operators import LabeledOperator, OperatorLabel
from src.services.channel_zoo import build_family, random_density
from src.services.operator_basis import basis_matrix, operator_from_token
from config.settings import settings

logger = logging.getLogger(__name__)

Spec = Tuple[List[Tuple[str, int]], InvariantFamily, str]

FIRST, SECOND, THIRD = InvariantFamily.FIRST, InvariantFamily.SECOND, InvariantFamily.THIRD

QUBIT_SOURCE = "qubit-catalog"
QUNIT_SOURCE = "qunit-catalog"
ERRATUM_SOURCE = "qubit-erratum"


def _ratio(a: str, b: str, source: str) -> Spec:
    return [(a, 1), (b, -1)], SECOND, source


def _single(a: str, source: str) -> Spec:
    return [(a, 1)], FIRST, source


def _pairs(dim: int) -> List[Tuple[int, int]]:
    return [(k, l) for k in range(1, dim) for l in range(k)]


def _bit_flip(dim: int) -> List[Spec]:
    return [_single("S(1,0)", QUBIT_SOURCE), _ratio("A(1,0)", "D(1,0)", QUBIT_SOURCE)]


def _phase_flip(dim: int) -> List[Spec]:
    return [_single("D(1,0)", QUBIT_SOURCE), _ratio("S(1,0)", "A(1,0)", QUBIT_SOURCE)]


def _bit_phase_flip(dim: int) -> List[Spec]:
    return [_single("A(1,0)", QUBIT_SOURCE), _ratio("S(1,0)", "D(1,0)", QUBIT_SOURCE)]


def _equiprobable(dim: int) -> List[Spec]:
    return [_ratio("S(1,0)", "D(1,0)", QUBIT_SOURCE)]


def _adc(dim: int) -> List[Spec]:
    return [
        _ratio("S(1,0)", "A(1,0)", QUBIT_SOURCE),
        ([("S(1,0)", 1), ("A(1,0)", 1), ("d(1)", -1)], THIRD, QUBIT_SOURCE),
    ]


def _gadc(dim: int) -> List[Spec]:
    return [
        _ratio("S(1,0)", "A(1,0)", QUBIT_SOURCE),
        _ratio("S(1,0)", "D(1,0)", ERRATUM_SOURCE),
    ]


def _none(dim: int) -> List[Spec]:
    return []


def _gen_flip(dim: int) -> List[Spec]:
    specs = [_single(f"XZ({m},0)", QUNIT_SOURCE) for m in range(1, dim)]
    specs += [_ratio(f"XZ(0,{m})", f"XZ({m},{m})", QUNIT_SOURCE) for m in range(1, dim)]
    specs += [
        _ratio(f"XZ(0,{m})", f"XZ({l},{m})", QUNIT_SOURCE)
        for m in range(1, dim) for l in range(1, dim) if l != m
    ]
    return specs


def _gen_phase(dim: int) -> List[Spec]:
    specs = [_single(f"XZ(0,{m})", QUNIT_SOURCE) for m in range(1, dim)]
    specs += [_ratio(f"XZ({m},0)", f"XZ({m},{m})", QUNIT_SOURCE) for m in range(1, dim)]
    specs += [
        _ratio(f"XZ({m},0)", f"XZ({m},{l})", QUNIT_SOURCE)
        for m in range(1, dim) for l in range(1, dim) if l != m
    ]
    return specs


def _gen_flip_phase(dim: int) -> List[Spec]:
    specs = [_single(f"XZ({m},{m})", QUNIT_SOURCE) for m in range(1, dim)]
    specs += [_ratio(f"XZ({m},0)", f"XZ(0,{dim - m})", QUNIT_SOURCE) for m in range(1, dim)]
    ordered = [(m, l) for m in range(1, dim) for l in range(m + 1, dim)]
    specs += [_ratio(f"XZ({m},0)", f"XZ({l},{l - m})", QUNIT_SOURCE) for m, l in ordered]
    specs += [_ratio(f"XZ(0,{m})", f"XZ({l - m},{l})", QUNIT_SOURCE) for m, l in ordered]
    return specs


def _dephasing_qunit(dim: int) -> List[Spec]:
    specs = [_single(f"D({k + 1},{k})", QUNIT_SOURCE) for k in range(dim - 1)]
    specs += [_ratio(f"S({k},{l})", f"A({k},{l})", QUNIT_SOURCE) for k, l in _pairs(dim)]
    return specs


def _depolarizing(dim: int) -> List[Spec]:
    source = QUBIT_SOURCE if dim == 2 else QUNIT_SOURCE
    specs = [_ratio(f"S({k},{l})", f"D({k},{l})", source) for k, l in _pairs(dim)]
    specs += [_ratio(f"A({k},{l})", f"D({k},{l})", source) for k, l in _pairs(dim)]
    specs += [_ratio(f"D({n},0)", "D(1,0)", source) for n in range(2, dim)]
    return specs


def _transposition(dim: int) -> List[Spec]:
    last = dim - 1
    specs = [_single("Ssum", QUNIT_SOURCE)]
    specs += [_ratio(f"Arow({k})", f"D({last},{k})", QUNIT_SOURCE) for k in range(last)]
    if dim >= 3:
        specs += [_ratio(f"Smirror({k})", f"D({last},{k})", QUNIT_SOURCE) for k in range(dim // 2)]
    specs += [_ratio(f"D({l},0)", f"D({last},0)", QUNIT_SOURCE) for l in range(1, last)]
    return specs


def _adc_qunit(dim: int) -> List[Spec]:
    last = dim - 1
    specs = [_ratio(f"S({k},{l})", f"A({k},{l})", QUNIT_SOURCE) for k, l in _pairs(dim)]
    specs.append(([(f"S({last},0)", 1), (f"A({last},0)", 1), (f"d({last})", -1)], THIRD, QUNIT_SOURCE))
    return specs


def _gadc_qunit(dim: int) -> List[Spec]:
    return [_ratio(f"S({k},{l})", f"A({k},{l})", QUNIT_SOURCE) for k, l in _pairs(dim)]


_CATALOGS: Dict[str, Callable[[int], List[Spec]]] = {
    "bit_flip": _bit_flip,
    "phase_flip": _phase_flip,
    "bit_phase_flip": _bit_phase_flip,
    "dephasing_qubit": _phase_flip,
    "pauli": _none,
    "equiprobable_pauli": _equiprobable,
    "adc": _adc,
    "gadc": _gadc,
    "depolarizing": _depolarizing,
    "gen_pauli_channel": _none,
    "gen_flip": _gen_flip,
    "gen_phase": _gen_phase,
    "gen_flip_phase": _gen_flip_phase,
    "transposition_flip": _transposition,
    "dephasing_qunit": _dephasing_qunit,
    "adc_qunit": _adc_qunit,
    "gadc_qunit": _gadc_qunit,
}

CLOSED_FORMS: Dict[str, Callable[[int], int]] = {
    "gen_flip": lambda n: n * (n - 1),
    "gen_phase": lambda n: n * (n - 1),
    "gen_flip_phase": lambda n: n * (n - 1),
    "dephasing_qunit": lambda n: (n - 1) * (n + 2) // 2,
    "depolarizing": lambda n: n * n - 2,
    "transposition_flip": lambda n: (5 * n) // 2 - 2,
    "adc_qunit": lambda n: n * (n - 1) // 2 + 1,
    "gadc_qunit": lambda n: n * (n - 1) // 2,
}


def monomial_from_tokens(
    terms: Iterable[Tuple[str, int]], dim: int, family: InvariantFamily
) -> InvariantMonomial:
    return InvariantMonomial(
        terms=[MonomialTerm(operator=operator_from_token(token, dim), exponent=exp) for token, exp in terms],
        family=family,
    )


def paper_catalog(family_name: str, dim: int, include_errata: bool = False) -> List[InvariantCatalogEntry]:
    """Cataloged invariants of a family at dimension N.

    With ``include_errata`` the GADC list also carries the misprinted
    <S(1,0)>/<D(1,0)> row tagged ``qubit-erratum``; it is not invariant.
    """
    if family_name not in _CATALOGS:
        raise UnknownCatalogError(f"no catalog for '{family_name}'")
    build_family(family_name, dim)  # rejects bad dimensions

    entries = []
    for terms, klass, source in _CATALOGS[family_name](dim):
        if source == ERRATUM_SOURCE and not include_errata:
            continue
        entries.append(InvariantCatalogEntry(
            family_name=family_name,
            dim=dim,
            monomial=monomial_from_tokens(terms, dim, klass),
            source=source,
        ))
    return entries


def catalog_operators(family_name: str, dim: int) -> List[LabeledOperator]:
    """Distinct operators appearing in a family's catalog, in first-use order."""
    seen: Dict[str, LabeledOperator] = {}
    for entry in paper_catalog(family_name, dim):
        for term in entry.monomial.terms:
            seen.setdefault(term.token, term.operator)
    return list(seen.values())


def _traceless_directions(dim: int) -> List[np.ndarray]:
    directions = []
    for k in range(1, dim):
        for l in range(k):
            directions.append(basis_matrix(OperatorLabel.sym(k, l, dim)).matrix)
            directions.append(basis_matrix(OperatorLabel.antisym(k, l, dim)).matrix)
        directions.append(basis_matrix(OperatorLabel.diff_diag(k, 0, dim)).matrix)
    return directions


def independence_rank(monomials: Sequence[InvariantMonomial], dim: int, seed: Optional[int] = None) -> int:
    """Rank of the log-derivative Jacobian of the invariants at a random full-rank state.

    Row entries are sum_a r_a Tr(O_a H_j) / <O_a> over a basis H_j of
    traceless Hermitian perturbations.
    """
    if not monomials:
        return 0
    seed = settings.INVFORGE_SEED if seed is None else seed
    rho = random_density(dim, seed=seed)
    directions = _traceless_directions(dim)
    rows = []
    for monomial in monomials:
        row = np.zeros(len(directions), dtype=complex)
        for term in monomial.terms:
            expectation = rho.expectation(term.operator.matrix)
            for j, h in enumerate(directions):
                row[j] += term.exponent * np.trace(term.operator.matrix @ h) / expectation
        rows.append(row)
    return int(np.linalg.matrix_rank(np.array(rows), tol=1e-8))


def count_catalog(family_name: str, dim: int) -> Tuple[int, int]:
    """(first-family count, second+third count) of a catalog."""
    entries = paper_catalog(family_name, dim)
    first = sum(1 for e in entries if e.monomial.family == FIRST)
    return first, len(entries) - first


def reproduce_count_table(
    dims: Iterable[int], families: Optional[Sequence[str]] = None, with_rank: bool = True
) -> List[CountRow]:
    """Invariant counts per family and N compared against the closed forms."""
    families = list(families or CLOSED_FORMS)
    rows = []
    for name in families:
        if name not in CLOSED_FORMS:
            raise UnknownCatalogError(f"no closed-form count for '{name}'")
        for dim in dims:
            if dim < 3:
                raise DimensionError(f"count table needs N >= 3, got {dim}")
            first, rest = count_catalog(name, dim)
            rank = None
            if with_rank:
                monomials = [e.monomial for e in paper_catalog(name, dim)]
                rank = independence_rank(monomials, dim)
            row = CountRow(
                family=name,
                dim=dim,
                first=first,
                second_third=rest,
                total=first + rest,
                expected=CLOSED_FORMS[name](dim),
                independent=rank,
            )
            if not row.passed:
                logger.warning(f"{name} N={dim}: catalog total {row.total} != closed form {row.expected}")
            rows.append(row)
    return rows

