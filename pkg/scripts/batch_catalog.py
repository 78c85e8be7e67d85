#!/usr/bin/env python3
"""Batch invariant discovery over many channel families."""

import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import settings
from src.models.errors import InvforgeError
from src.services.catalog_store import CatalogStore
from src.services.channel_zoo import FAMILY_NAMES, build_family, list_families
from src.services.invariant_catalog import catalog_operators, paper_catalog
from src.services.invariant_search import InvariantSearch

logger = logging.getLogger(__name__)

Job = Tuple[str, int]


def default_jobs(dims: Sequence[int]) -> List[Job]:
    """Qubit-only families at N=2, every other family at each of ``dims``."""
    jobs: List[Job] = []
    for family in list_families():
        if family.qubit_only:
            jobs.append((family.name, 2))
        else:
            jobs.extend((family.name, dim) for dim in dims)
    return jobs


class BatchCataloger:
    """Runs the invariant search for a list of (family, N) and stores the catalogs."""

    def __init__(self, output_dir: str = settings.CATALOG_DIR):
        self.output_dir = Path(output_dir)
        self.store = CatalogStore(self.output_dir)
        self.search = InvariantSearch()

    def process(self, jobs: Sequence[Job], samples: Optional[int] = None, seed: Optional[int] = None) -> Dict[str, Dict]:
        results: Dict[str, Dict] = {}
        logger.info(f"Processing {len(jobs)} family/dimension pairs")

        for i, (name, dim) in enumerate(jobs, 1):
            key = f"{name}_N{dim}"
            logger.info(f"Processing {i}/{len(jobs)}: {key}")
            try:
                family = build_family(name, dim)
                monomials = self.search.find_invariants(
                    family, samples=samples, seed=seed, extra_operators=catalog_operators(name, dim)
                )
                path = self.store.save(name, dim, monomials)
                found = {m.canonical_key() for m in monomials}
                cataloged = [e.monomial.canonical_key() for e in paper_catalog(name, dim)]
                results[key] = {
                    "status": "success",
                    "family": name,
                    "dim": dim,
                    "found": len(monomials),
                    "cataloged": len(cataloged),
                    "recovered": sum(1 for k in cataloged if k in found),
                    "catalog_file": str(path),
                    "processed_at": datetime.now().isoformat(),
                }
            except InvforgeError as e:
                logger.error(f"Error processing {key}: {e}")
                results[key] = {
                    "status": "error",
                    "family": name,
                    "dim": dim,
                    "error": str(e),
                    "processed_at": datetime.now().isoformat(),
                }

        self.save_combined_results(results)
        return results

    def save_combined_results(self, results: Dict) -> Path:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        filepath = self.output_dir / f"batch_results_{timestamp}.json"
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(results, f, indent=2, ensure_ascii=False)
        logger.info(f"Saved combined results to: {filepath}")
        return filepath

    def generate_summary_report(self, results: Dict) -> str:
        total = len(results)
        successful = [r for r in results.values() if r["status"] == "success"]
        complete = [r for r in successful if r["recovered"] == r["cataloged"]]

        lines = [
            "# Invariant Catalog Batch Report",
            "",
            f"**Processing Date:** {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
            f"**Pairs Processed:** {total}",
            f"**Successful:** {len(successful)}",
            f"**Failed:** {total - len(successful)}",
            f"**Full Catalog Recovery:** {len(complete)}/{len(successful)}",
            "",
            "| family | N | found | cataloged | recovered | status |",
            "|---|---|---|---|---|---|",
        ]
        for data in results.values():
            if data["status"] == "success":
                mark = "✅" if data["recovered"] == data["cataloged"] else "⚠️"
                lines.append(
                    f"| {data['family']} | {data['dim']} | {data['found']} | "
                    f"{data['cataloged']} | {data['recovered']} | {mark} |"
                )
            else:
                lines.append(f"| {data['family']} | {data['dim']} | - | - | - | ❌ {data['error']} |")
        return "\n".join(lines) + "\n"

    def save_summary_report(self, results: Dict) -> Path:
        report = self.generate_summary_report(results)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        filepath = self.output_dir / f"batch_summary_{timestamp}.md"
        with open(filepath, "w", encoding="utf-8") as f:
            f.write(report)
        logger.info(f"Saved summary report to: {filepath}")
        return filepath


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Discover and store invariant catalogs for many channel families")
    parser.add_argument("--families", default=None, help="comma-separated family names (default: all)")
    parser.add_argument("--dims", default="3,4", help="comma-separated N for quNit families (default: 3,4)")
    parser.add_argument("--output-dir", default=settings.CATALOG_DIR)
    parser.add_argument("--samples", type=int, default=settings.DEFAULT_SAMPLES)
    parser.add_argument("--seed", type=int, default=settings.INVFORGE_SEED)
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    args = parser.parse_args(argv)

    log_level = logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(level=log_level, format=settings.LOG_FORMAT)

    dims = [int(d) for d in args.dims.split(",") if d.strip()]
    jobs = default_jobs(dims)
    if args.families:
        wanted = [n.strip() for n in args.families.split(",") if n.strip()]
        unknown = [n for n in wanted if n not in FAMILY_NAMES]
        if unknown:
            parser.error(f"unknown families: {', '.join(unknown)}")
        jobs = [job for job in jobs if job[0] in wanted]

    processor = BatchCataloger(args.output_dir)
    results = processor.process(jobs, samples=args.samples, seed=args.seed)
    processor.save_summary_report(results)

    successful = len([r for r in results.values() if r["status"] == "success"])
    logger.info(f"{'=' * 50}")
    logger.info("BATCH CATALOG COMPLETE")
    logger.info(f"Pairs: {len(results)}, successful: {successful}, failed: {len(results) - successful}")
    logger.info(f"Output directory: {args.output_dir}")
    logger.info(f"{'=' * 50}")
    return 0 if successful == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
