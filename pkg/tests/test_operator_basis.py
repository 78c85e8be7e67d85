"""Tests for the operator bases, power decompositions and count bookkeeping."""

import numpy as np
import pytest

from src.models.errors import (
    DimensionError,
    IdentityPowerError,
    IncompleteDataError,
    MeasurementBasisError,
    OperatorIndexError,
)
from src.models.operators import LabelKind, OperatorLabel, ProjectorKind
from src.models.transfer import MeasurementRecord
from src.services.operator_basis import (
    basis_expectations_from_counts,
    basis_matrix,
    expand_in_measurement_basis,
    gen_pauli_power,
    omega,
    operator_dictionary,
    operator_from_token,
    parse_token,
    projector_matrix,
    projectors_for,
    recombine,
    transposition_mirror,
    transposition_row,
    transposition_sum,
    unitary_power_decomposition,
)
from tests.conftest import SIGMA_X, SIGMA_Y, SIGMA_Z


def test_qubit_basis_matches_pauli_matrices():
    assert np.allclose(basis_matrix(OperatorLabel.sym(1, 0, 2)).matrix, SIGMA_X)
    assert np.allclose(basis_matrix(OperatorLabel.antisym(1, 0, 2)).matrix, SIGMA_Y)
    assert np.allclose(basis_matrix(OperatorLabel.diff_diag(1, 0, 2)).matrix, -SIGMA_Z)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_sym_antisym_are_hs_orthogonal(dim):
    ops = []
    for k in range(1, dim):
        for l in range(k):
            ops.append(basis_matrix(OperatorLabel.sym(k, l, dim)).matrix)
            ops.append(basis_matrix(OperatorLabel.antisym(k, l, dim)).matrix)
    gram = np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])
    assert np.allclose(gram, 2 * np.eye(len(ops)))


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_sym_antisym_diag_span_all_matrices(dim):
    labels = [OperatorLabel.diag(k, dim) for k in range(dim)]
    for k in range(1, dim):
        for l in range(k):
            labels += [OperatorLabel.sym(k, l, dim), OperatorLabel.antisym(k, l, dim)]
    stacked = np.array([basis_matrix(label).matrix.reshape(-1) for label in labels])
    assert len(labels) == dim * dim
    assert np.linalg.matrix_rank(stacked) == dim * dim


def test_basis_rejects_bad_indices():
    with pytest.raises(OperatorIndexError):
        basis_matrix(OperatorLabel.sym(0, 1, 3))
    with pytest.raises(OperatorIndexError):
        basis_matrix(OperatorLabel.diag(3, 3))
    with pytest.raises(DimensionError):
        basis_matrix(OperatorLabel.diag(0, 1))


@pytest.mark.parametrize("dim", [2, 3, 5])
def test_gen_pauli_commutation(dim):
    x = gen_pauli_power(1, 0, dim).matrix
    z = gen_pauli_power(0, 1, dim).matrix
    assert np.allclose(z @ x, omega(dim) * x @ z)
    assert gen_pauli_power(2 % dim, 1, dim).is_unitary()


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_omega_commutation_for_all_powers(dim):
    for n1 in range(dim):
        for n2 in range(dim):
            z = gen_pauli_power(0, n1, dim).matrix
            x = gen_pauli_power(n2, 0, dim).matrix
            assert np.max(np.abs(z @ x - omega(dim) ** (n1 * n2) * x @ z)) <= 1e-12


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_power_decompositions_resum(dim):
    x = gen_pauli_power(1, 0, dim).matrix
    z = gen_pauli_power(0, 1, dim).matrix
    for m in range(1, dim):
        expected = {
            "X": np.linalg.matrix_power(x, m),
            "Z": np.linalg.matrix_power(z, m),
            "XZ": np.linalg.matrix_power(x @ z, m),
        }
        for kind, matrix in expected.items():
            pairs = unitary_power_decomposition(kind, dim, m)
            assert np.allclose(recombine(pairs, dim), matrix, atol=1e-12)
        for n in range(dim):
            pairs = unitary_power_decomposition("XmZn", dim, m, n)
            assert np.allclose(recombine(pairs, dim), gen_pauli_power(m, n, dim).matrix, atol=1e-12)


def test_power_decomposition_errors():
    with pytest.raises(IdentityPowerError):
        unitary_power_decomposition("X", 3, 0)
    with pytest.raises(IdentityPowerError):
        unitary_power_decomposition("XmZn", 3, 0, 0)
    with pytest.raises(OperatorIndexError):
        unitary_power_decomposition("Z", 3, 3)


def test_z_decomposition_is_diagonal_only():
    pairs = unitary_power_decomposition("Z", 4, 1)
    assert {label.kind for label, _ in pairs} == {LabelKind.DIAG}
    assert len(pairs) == 4


def test_expand_in_measurement_basis_roundtrip(rng):
    for dim in (2, 3, 4):
        matrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        pairs = expand_in_measurement_basis(matrix)
        assert np.allclose(recombine(pairs, dim), matrix)


def test_expand_rejects_bad_input():
    with pytest.raises(MeasurementBasisError):
        expand_in_measurement_basis(np.ones((2, 3)))
    bad = np.eye(2, dtype=complex)
    bad[0, 1] = np.nan
    with pytest.raises(MeasurementBasisError):
        expand_in_measurement_basis(bad)


def test_pair_projectors_reproduce_sym_and_antisym():
    dim = 4
    for k in range(1, dim):
        for l in range(k):
            plus, minus, plus_i, minus_i = (
                projector_matrix(OperatorLabel.pair_projector(kind, k, l, dim))
                for kind in (ProjectorKind.PLUS, ProjectorKind.MINUS, ProjectorKind.PLUS_I, ProjectorKind.MINUS_I)
            )
            assert np.allclose(plus - minus, basis_matrix(OperatorLabel.sym(k, l, dim)).matrix)
            assert np.allclose(plus_i - minus_i, basis_matrix(OperatorLabel.antisym(k, l, dim)).matrix)
            assert np.isclose(np.trace(plus), 1.0)


def test_tokens_roundtrip_over_dictionary():
    for dim in (2, 3, 4):
        for op in operator_dictionary(dim):
            assert parse_token(op.token, dim) == op.label
    label = OperatorLabel.pair_projector(ProjectorKind.MINUS_I, 2, 0, 3)
    assert parse_token(label.token, 3) == label
    assert label.token == "proj(-i,2,0)"


def test_parse_token_errors():
    with pytest.raises(OperatorIndexError):
        parse_token("Q(1,0)", 3)
    with pytest.raises(OperatorIndexError):
        parse_token("S(3,0)", 3)


def test_dictionary_drops_proportional_operators():
    tokens = [op.token for op in operator_dictionary(2)]
    assert tokens == ["XZ(0,0)", "S(1,0)", "A(1,0)", "D(1,0)", "d(0)", "d(1)"]
    tokens3 = [op.token for op in operator_dictionary(3)]
    assert "XZ(1,0)" in tokens3
    assert len(tokens3) == len(set(tokens3))


def test_counts_to_expectations():
    dim = 2
    records = [
        MeasurementRecord(projector=OperatorLabel.pair_projector(ProjectorKind.PLUS, 1, 0, dim), shots=100, successes=75),
        (OperatorLabel.pair_projector(ProjectorKind.MINUS, 1, 0, dim), 100, 25),
        (OperatorLabel.level_projector(0, dim), 200, 50),
    ]
    values = basis_expectations_from_counts(records)
    assert values[OperatorLabel.sym(1, 0, dim)] == pytest.approx(0.5)
    assert values[OperatorLabel.diag(0, dim)] == pytest.approx(0.25)
    assert OperatorLabel.antisym(1, 0, dim) not in values

    with pytest.raises(IncompleteDataError):
        basis_expectations_from_counts(records, [OperatorLabel.antisym(1, 0, dim)])


def test_measurement_record_validation():
    with pytest.raises(ValueError):
        MeasurementRecord(projector=OperatorLabel.level_projector(0, 2), shots=10, successes=11)
    with pytest.raises(ValueError):
        MeasurementRecord(projector=OperatorLabel.sym(1, 0, 2), shots=10, successes=1)


def test_projectors_for_diff_diag_is_not_direct():
    with pytest.raises(MeasurementBasisError):
        projectors_for(OperatorLabel.diff_diag(1, 0, 2))
    assert len(projectors_for(OperatorLabel.antisym(2, 1, 3))) == 2


def test_transposition_operators():
    dim = 4
    ssum = transposition_sum(dim).matrix
    assert np.allclose(ssum, np.ones((dim, dim)) - np.eye(dim))
    row = transposition_row(1, dim).matrix
    assert np.allclose(row, row.conj().T)
    assert np.isclose(np.trace(row), 0)
    mirror = transposition_mirror(0, dim).matrix
    assert np.allclose(mirror, mirror.T)
    assert operator_from_token("Smirror(0)", dim).token == "Smirror(0)"
    with pytest.raises(OperatorIndexError):
        transposition_mirror(0, 2)
