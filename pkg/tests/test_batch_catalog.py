"""Tests for the batch catalog runner."""

import json

from scripts.batch_catalog import BatchCataloger, default_jobs, main


def test_default_jobs_pin_qubit_families():
    jobs = default_jobs([3, 4])
    assert ("bit_flip", 2) in jobs
    assert ("bit_flip", 3) not in jobs
    assert ("gen_flip", 3) in jobs and ("gen_flip", 4) in jobs


def test_process_records_successes_and_errors(tmp_path):
    processor = BatchCataloger(str(tmp_path))
    results = processor.process([("bit_flip", 2), ("bit_flip", 3)], samples=3, seed=1)

    ok = results["bit_flip_N2"]
    assert ok["status"] == "success"
    assert ok["recovered"] == ok["cataloged"] == 2
    assert (tmp_path / "bit_flip_N2.json").exists()
    assert results["bit_flip_N3"]["status"] == "error"

    (combined,) = tmp_path.glob("batch_results_*.json")
    assert set(json.loads(combined.read_text(encoding="utf-8"))) == {"bit_flip_N2", "bit_flip_N3"}

    report = processor.generate_summary_report(results)
    assert "**Full Catalog Recovery:** 1/1" in report
    assert "| bit_flip | 2 | " in report


def test_main_writes_summary(tmp_path):
    code = main(["--families", "adc", "--dims", "3", "--output-dir", str(tmp_path), "--samples", "3"])
    assert code == 0
    assert len(list(tmp_path.glob("batch_summary_*.md"))) == 1
