"""Tests for catalog file storage."""

import json

import pytest

from src.models.errors import CatalogFormatError
from src.models.invariants import InvariantFamily
from src.services.catalog_store import (
    CatalogStore,
    load_catalog,
    monomial_to_record,
    records_to_monomials,
    save_catalog,
)
from src.services.channel_zoo import build_family
from src.services.invariant_catalog import monomial_from_tokens, paper_catalog
from src.services.invariant_search import find_invariants


def test_save_and_load_catalog(tmp_path):
    monomials = [e.monomial for e in paper_catalog("adc", 2)]
    records = [monomial_to_record(m, "adc", "qubit-catalog") for m in monomials]
    path = save_catalog(tmp_path / "nested" / "adc.json", records)

    data = json.loads(path.read_text(encoding="utf-8"))
    assert data[1]["terms"] == [
        {"op": "S(1,0)", "exp": 1, "lambdas": None},
        {"op": "A(1,0)", "exp": 1, "lambdas": None},
        {"op": "d(1)", "exp": -1, "lambdas": None},
    ]
    assert data[1]["family_class"] == "Third"

    rebuilt = records_to_monomials(load_catalog(path))
    assert [m.canonical_key() for m in rebuilt] == [m.canonical_key() for m in monomials]


def test_search_results_keep_lambdas(tmp_path):
    found = find_invariants(build_family("bit_flip", 2), samples=3, seed=1)
    store = CatalogStore(tmp_path)
    path = store.save("bit_flip", 2, found)
    assert path.name == "bit_flip_N2.json"

    loaded = store.load("bit_flip", 2)
    assert len(loaded) == len(found)
    for before, after in zip(found, loaded):
        assert after.render() == before.render()
        assert len(after.terms[0].lambdas) == 3
    assert store.load("bit_flip", 3) is None
    assert store.stats()["total_files"] == 1
    assert store.clear() == 1


def test_invalid_catalog_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("[{", encoding="utf-8")
    with pytest.raises(CatalogFormatError):
        load_catalog(broken)

    bad_token = tmp_path / "bad.json"
    bad_token.write_text(json.dumps([{
        "family": "adc", "dim": 2, "terms": [{"op": "S(5,0)", "exp": 1}],
        "family_class": "First", "source": "search",
    }]), encoding="utf-8")
    with pytest.raises(CatalogFormatError):
        records_to_monomials(load_catalog(bad_token))

    with pytest.raises(CatalogFormatError):
        load_catalog(tmp_path / "missing.json")

    binary = tmp_path / "binary.json"
    binary.write_bytes(b"\xff\xfe\x00")
    with pytest.raises(CatalogFormatError):
        load_catalog(binary)


def test_record_roundtrip_preserves_class():
    m = monomial_from_tokens([("S(1,0)", 1), ("A(1,0)", -1)], 2, InvariantFamily.SECOND)
    (rebuilt,) = records_to_monomials([monomial_to_record(m, "adc")])
    assert rebuilt.family == InvariantFamily.SECOND
    assert rebuilt.render() == "<S(1,0)>/<A(1,0)>"
