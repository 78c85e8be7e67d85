"""Tests for the command-line front end."""

import io
import json

import pytest

from src.cli import run_cli


def run(*args):
    out = io.StringIO()
    code = run_cli(list(args), out=out)
    return code, out.getvalue()


def test_channels_lists_every_family():
    code, text = run("channels")
    assert code == 0
    assert "gadc_qunit" in text
    assert "p0,p1,p2,p3" in text


def test_find_bit_flip():
    code, text = run("find", "--channel", "bit_flip", "--dim", "2")
    assert code == 0
    assert "<S(1,0)>" in text
    assert "<A(1,0)>/<D(1,0)>" in text
    assert "First" in text and "Second" in text


def test_find_json_output_is_deterministic(tmp_path):
    args = ("find", "--channel", "adc", "--dim", "2", "--json", "--seed", "3")
    code, first = run(*args)
    _, second = run(*args)
    assert code == 0
    assert first == second
    records = json.loads(first)
    assert {"family", "dim", "terms", "family_class", "source"} <= set(records[0])

    saved = tmp_path / "adc.json"
    code, _ = run("find", "--channel", "adc", "--dim", "2", "--save", str(saved))
    assert code == 0 and saved.exists()
    code, text = run("verify", "--channel", "adc", "--dim", "2", "--trials", "20", "--catalog", str(saved))
    assert code == 0


def test_tables_row():
    code, text = run("tables", "--dims", "3", "--families", "gen_flip", "--no-rank")
    assert code == 0
    assert "gen_flip 3 total=6 PASS" in text


def test_verify_gadc_flags_erratum_only():
    code, text = run("verify", "--channel", "gadc", "--dim", "2", "--trials", "50")
    assert code == 0
    lines = text.splitlines()
    assert any("qubit-erratum" in line and "FAIL" in line for line in lines)
    assert any("<S(1,0)>/<A(1,0)>" in line and "PASS" in line for line in lines)


def test_validate_spec_and_channel(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"name": "adc", "dim": 2, "family_params": {"q": 0.3}}), encoding="utf-8")
    code, text = run("validate", "--spec", str(spec))
    assert code == 0
    assert "PASS" in text

    code, _ = run("validate", "--channel", "transposition_flip", "--dim", "3", "--param", "p=0.6", "--strict")
    assert code == 1


def test_validate_unreadable_spec_exits_1(tmp_path):
    code, _ = run("validate", "--spec", str(tmp_path / "missing.json"))
    assert code == 1
    binary = tmp_path / "binary.json"
    binary.write_bytes(b"\xff\xfe\x00")
    code, _ = run("validate", "--spec", str(binary))
    assert code == 1


def test_transmit_exact():
    code, text = run(
        "transmit", "--channel", "depolarizing", "--dim", "2", "--param", "p=0.9",
        "--symbols", "16", "--shots", "inf", "--message-len", "50",
    )
    assert code == 0
    assert "accuracy=1.0000" in text


def test_transmit_json_transcript():
    code, text = run(
        "transmit", "--channel", "bit_flip", "--dim", "2", "--param", "p=0.1",
        "--symbols", "4", "--shots", "1000", "--message-len", "5", "--delta", "0.3", "--json",
    )
    assert code == 0
    transcript = json.loads(text)
    assert len(transcript) == 5
    assert set(transcript[0]) == {
        "symbol", "sent_invariants", "received_invariants", "decoded", "erasure_flag", "shots",
    }


@pytest.mark.parametrize("args", [
    (),
    ("bogus",),
    ("find", "--channel", "bit_flip"),
    ("find", "--channel", "no_such_family", "--dim", "2"),
    ("tables", "--dims", "three"),
    ("transmit", "--channel", "bit_flip", "--dim", "2", "--param", "p"),
    ("find", "--channel", "bit_flip", "--dim", "2", "--unknown-flag"),
])
def test_usage_errors_exit_2(args):
    code, _ = run(*args)
    assert code == 2


def test_library_errors_exit_1():
    code, _ = run("find", "--channel", "bit_flip", "--dim", "3")
    assert code == 1
    code, _ = run("tables", "--dims", "2")
    assert code == 1
