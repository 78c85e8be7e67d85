"""Tests for the hard-coded catalogs and the invariant count table."""

import numpy as np
import pytest

from src.models.errors import DimensionError, QubitOnlyChannelError, UnknownCatalogError
from src.services.channel_zoo import (
    FAMILY_NAMES,
    apply_channel,
    build_family,
    instantiate,
    list_families,
    random_density,
)
from src.services.invariant_catalog import (
    CLOSED_FORMS,
    ERRATUM_SOURCE,
    catalog_operators,
    count_catalog,
    independence_rank,
    paper_catalog,
    reproduce_count_table,
)
from src.services.invariant_search import evaluate_invariant, verify_invariance

EXPECTED_TOTALS = {
    "gen_flip": [6, 12, 20],
    "gen_phase": [6, 12, 20],
    "gen_flip_phase": [6, 12, 20],
    "dephasing_qunit": [5, 9, 14],
    "depolarizing": [7, 14, 23],
    "transposition_flip": [5, 8, 10],
    "adc_qunit": [4, 7, 11],
    "gadc_qunit": [3, 6, 10],
}

QUBIT_ONLY = {f.name for f in list_families() if f.qubit_only}


@pytest.mark.parametrize("name", sorted(EXPECTED_TOTALS))
def test_count_table_matches_closed_forms(name):
    rows = reproduce_count_table([3, 4, 5], [name], with_rank=False)
    assert [row.total for row in rows] == EXPECTED_TOTALS[name]
    assert all(row.passed for row in rows)
    assert [CLOSED_FORMS[name](n) for n in (3, 4, 5)] == EXPECTED_TOTALS[name]


def test_count_table_first_family_split():
    first, rest = count_catalog("gen_flip", 4)
    assert (first, rest) == (3, 9)
    first, rest = count_catalog("depolarizing", 3)
    assert first == 0 and rest == 7


def test_count_table_rank_column():
    (row,) = reproduce_count_table([3], ["depolarizing"])
    assert row.independent is not None
    assert 0 < row.independent <= row.total


def test_count_table_errors():
    with pytest.raises(DimensionError):
        reproduce_count_table([2], ["gen_flip"])
    with pytest.raises(UnknownCatalogError):
        reproduce_count_table([3], ["bit_flip"])
    with pytest.raises(UnknownCatalogError):
        paper_catalog("nope", 3)
    with pytest.raises(QubitOnlyChannelError):
        paper_catalog("bit_flip", 3)


def test_negative_controls_have_empty_catalogs():
    assert paper_catalog("pauli", 2) == []
    assert paper_catalog("gen_pauli_channel", 3) == []


def test_gadc_erratum_is_opt_in():
    plain = paper_catalog("gadc", 2)
    with_errata = paper_catalog("gadc", 2, include_errata=True)
    assert all(e.source != ERRATUM_SOURCE for e in plain)
    assert [e.monomial.render() for e in with_errata if e.source == ERRATUM_SOURCE] == ["<S(1,0)>/<D(1,0)>"]


def test_gadc_adjudication():
    family = build_family("gadc", 2)
    channel = instantiate(family, {"q": 0.5, "p1": 0.3, "p2": 0.7})
    rho = random_density(2, seed=3)
    out = apply_channel(channel, rho)

    (kept,) = paper_catalog("gadc", 2)
    before, after = evaluate_invariant(kept.monomial, rho), evaluate_invariant(kept.monomial, out)
    assert before is not None and after is not None
    assert abs(after - before) <= 1e-8 * abs(before)

    erratum = next(e for e in paper_catalog("gadc", 2, include_errata=True) if e.source == ERRATUM_SOURCE)
    before, after = evaluate_invariant(erratum.monomial, rho), evaluate_invariant(erratum.monomial, out)
    assert before is not None and after is not None
    assert abs(after - before) / abs(before) > 1e-2

    assert not verify_invariance(erratum.monomial, family, trials=20, seed=1).passed


@pytest.mark.parametrize("name, dim", [
    ("gen_flip", 3), ("gen_phase", 4), ("gen_flip_phase", 4), ("dephasing_qunit", 3),
    ("depolarizing", 3), ("transposition_flip", 4), ("adc_qunit", 3), ("gadc_qunit", 3),
])
def test_qunit_catalogs_verify(name, dim):
    family = build_family(name, dim)
    for entry in paper_catalog(name, dim):
        report = verify_invariance(entry.monomial, family, trials=30, seed=2)
        assert report.passed, f"{entry.monomial}: {report.max_relative_deviation:.3e}"


def test_transposition_catalog_uses_named_operators():
    tokens = {op.token for op in catalog_operators("transposition_flip", 4)}
    assert {"Ssum", "Arow(0)", "Smirror(0)", "Smirror(1)"} <= tokens
    assert "Smirror(0)" not in {op.token for op in catalog_operators("transposition_flip", 2)}


def test_independence_rank_of_dependent_set():
    (kept,) = paper_catalog("gadc", 2)
    assert independence_rank([kept.monomial, kept.monomial], 2) == 1
    assert independence_rank([], 2) == 0


def _relative_changes(entries, channel, rng, states=50):
    changes = []
    for _ in range(states):
        rho = random_density(channel.dim, rng=rng)
        out = apply_channel(channel, rho)
        for entry in entries:
            before = evaluate_invariant(entry.monomial, rho)
            after = evaluate_invariant(entry.monomial, out)
            if before is None or after is None:
                continue
            changes.append(abs(after - before) / abs(before))
    return changes


@pytest.mark.parametrize("name", FAMILY_NAMES)
def test_catalog_invariants_are_unchanged_by_the_channel(name):
    family = build_family(name, 2 if name in QUBIT_ONLY else 3)
    entries = paper_catalog(name, family.dim)
    rng = np.random.default_rng(31)
    changes = []
    for _ in range(50):
        channel = instantiate(family, family.sample(rng, interior=True))
        changes += _relative_changes(entries, channel, rng, states=1)
    if entries:
        assert changes
    assert all(change <= 1e-9 for change in changes)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_catalog_invariants_survive_heavy_depolarizing(dim):
    channel = instantiate(build_family("depolarizing", dim), {"p": 0.95})
    entries = paper_catalog("depolarizing", dim)
    changes = _relative_changes(entries, channel, np.random.default_rng(dim))
    assert len(changes) >= 50
    assert max(changes) <= 1e-9
