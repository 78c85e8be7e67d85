"""Tests for channel families, CPTP validation and channel-spec parsing."""

import json

import numpy as np
import pytest

from src.models.errors import (
    ChannelSpecDimensionError,
    ChannelSpecError,
    ChannelSpecSyntaxError,
    CPTPViolationError,
    DimensionError,
    ParameterError,
    QubitOnlyChannelError,
    UnknownChannelError,
)
from src.services.channel_zoo import (
    FAMILY_NAMES,
    apply_channel,
    build_family,
    identity_channel,
    instantiate,
    list_families,
    load_channel_spec,
    parse_channel_spec,
    random_density,
    validate_cptp,
)
from tests.conftest import SIGMA_X, SIGMA_Z


def test_registry_has_every_family():
    assert len(FAMILY_NAMES) == 17
    qubit_only = {f.name for f in list_families(3) if f.qubit_only}
    assert qubit_only == {
        "bit_flip", "phase_flip", "bit_phase_flip", "dephasing_qubit",
        "pauli", "equiprobable_pauli", "adc", "gadc",
    }


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_random_draws_are_cptp(name):
    rng = np.random.default_rng(2024)
    family = build_family(name, 2 if name in {f.name for f in list_families(3) if f.qubit_only} else 3)
    for _ in range(50):
        channel = instantiate(family, family.sample(rng))
        assert validate_cptp(channel).passed


@pytest.mark.parametrize("name", ["depolarizing", "adc_qunit", "gadc_qunit", "transposition_flip"])
def test_apply_channel_preserves_state_properties(name):
    rng = np.random.default_rng(99)
    family = build_family(name, 4)
    channel = instantiate(family, family.sample(rng))
    for _ in range(200):
        rho = random_density(4, rng=rng)
        out = apply_channel(channel, rho)
        assert abs(np.trace(out.matrix) - 1) <= 1e-10
        assert np.allclose(out.matrix, out.matrix.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(out.matrix)) >= -1e-9


def test_build_family_errors():
    with pytest.raises(UnknownChannelError):
        build_family("nonexistent", 2)
    with pytest.raises(QubitOnlyChannelError):
        build_family("bit_flip", 3)
    with pytest.raises(DimensionError):
        build_family("depolarizing", 1)


def test_parameter_checks():
    family = build_family("bit_flip", 2)
    with pytest.raises(ParameterError):
        instantiate(family, {})
    with pytest.raises(ParameterError):
        instantiate(family, {"p": 0.1, "q": 0.2})
    with pytest.raises(ParameterError):
        instantiate(family, {"p": 1.5})
    with pytest.raises(ParameterError):
        instantiate(family, {"p": float("nan")})


def test_simplex_sum_is_enforced():
    family = build_family("pauli", 2)
    with pytest.raises(ParameterError):
        instantiate(family, {"p0": 0.5, "p1": 0.2, "p2": 0.1, "p3": 0.1})
    channel = instantiate(family, {"p0": 0.4 + 5e-7, "p1": 0.2, "p2": 0.2, "p3": 0.2})
    assert sum(channel.params.values()) == pytest.approx(1.0, abs=1e-12)


def test_strict_transposition_is_refused():
    strict = build_family("transposition_flip", 3, strict=True)
    with pytest.raises(CPTPViolationError):
        instantiate(strict, {"p": 0.6})
    relaxed = build_family("transposition_flip", 3)
    assert validate_cptp(instantiate(relaxed, {"p": 0.6})).passed


def test_strict_transposition_deviation():
    strict = build_family("transposition_flip", 3, strict=True)
    report = validate_cptp(strict.builder({"p": 0.2}))
    assert not report.passed
    # weights sum to 1 - p + 3p for the three swaps of a qutrit
    assert report.max_deviation == pytest.approx(0.4, abs=1e-12)


def test_bit_flip_action(qubit_state):
    channel = instantiate(build_family("bit_flip", 2), {"p": 0.3})
    out = apply_channel(channel, qubit_state)
    expected = 0.7 * qubit_state.matrix + 0.3 * SIGMA_X @ qubit_state.matrix @ SIGMA_X
    assert np.allclose(out.matrix, expected)


def test_full_dephasing_kills_coherence(qubit_state):
    channel = instantiate(build_family("dephasing_qubit", 2), {"lam": 1.0})
    out = apply_channel(channel, qubit_state)
    assert abs(out.matrix[0, 1]) < 1e-12
    assert np.isclose(out.expectation(SIGMA_Z), qubit_state.expectation(SIGMA_Z))


def test_depolarizing_shrinks_toward_maximally_mixed(qutrit_state):
    channel = instantiate(build_family("depolarizing", 3), {"p": 1.0})
    out = apply_channel(channel, qutrit_state)
    assert np.allclose(out.matrix, np.eye(3) / 3)


def test_apply_channel_dimension_mismatch(qutrit_state):
    with pytest.raises(DimensionError):
        apply_channel(identity_channel(2), qutrit_state)


def test_parse_family_spec():
    text = json.dumps({"name": "adc", "dim": 2, "family_params": {"q": 0.25}})
    channel = parse_channel_spec(text)
    assert channel.name == "adc"
    assert len(channel.kraus) == 2


def test_parse_kraus_spec():
    identity = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    channel = parse_channel_spec(json.dumps({"name": "id", "dim": 2, "kraus": [identity]}))
    assert np.allclose(channel.kraus[0], np.eye(2))


def test_parse_spec_reports_location():
    with pytest.raises(ChannelSpecSyntaxError) as info:
        parse_channel_spec('{"name": "x",\n "dim": 2,,}')
    assert info.value.line == 2

    ragged = [[[1, 0], [0, 0]], [[0, 0]]]
    with pytest.raises(ChannelSpecSyntaxError) as info:
        parse_channel_spec(json.dumps({"name": "x", "dim": 2, "kraus": [ragged]}))
    assert info.value.path == "kraus[0]"

    with pytest.raises(ChannelSpecSyntaxError):
        parse_channel_spec(json.dumps({"name": "x", "dim": 2}))


def test_parse_spec_dimension_and_cptp():
    identity = [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
    with pytest.raises(ChannelSpecDimensionError):
        parse_channel_spec(json.dumps({"name": "x", "dim": 3, "kraus": [identity]}))
    half = [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]
    with pytest.raises(CPTPViolationError):
        parse_channel_spec(json.dumps({"name": "x", "dim": 2, "kraus": [half]}))


def test_random_density_rank():
    pure = random_density(3, rank=1, seed=1)
    assert pure.purity() == pytest.approx(1.0)
    assert random_density(3, seed=5).purity() < 1.0
    with pytest.raises(DimensionError):
        random_density(3, rank=4)


def test_load_channel_spec_from_file(tmp_path):
    path = tmp_path / "adc.json"
    path.write_text(json.dumps({"name": "adc", "dim": 2, "family_params": {"q": 0.5}}), encoding="utf-8")
    assert load_channel_spec(path).params == {"q": 0.5}


def test_load_channel_spec_read_errors(tmp_path):
    with pytest.raises(ChannelSpecError) as info:
        load_channel_spec(tmp_path / "missing.json")
    assert info.value.path == str(tmp_path / "missing.json")

    with pytest.raises(ChannelSpecError):
        load_channel_spec(tmp_path)

    latin = tmp_path / "latin.json"
    latin.write_bytes(b'{"name": "caf\xe9", "dim": 2}')
    with pytest.raises(ChannelSpecError):
        load_channel_spec(latin)
