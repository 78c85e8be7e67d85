"""Reading and writing invariant catalog files."""

import json
import logging
import os
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import TypeAdapter, ValidationError

from src.models.errors import CatalogFormatError, InvforgeError
from src.models.invariants import CatalogRecord, InvariantMonomial, MonomialTerm, TermRecord
from src.services.operator_basis import operator_from_token
from config.settings import settings

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_RECORDS = TypeAdapter(List[CatalogRecord])


def monomial_to_record(monomial: InvariantMonomial, family: str, source: str = "search") -> CatalogRecord:
    terms = []
    for term in monomial.terms:
        lambdas = None
        if term.lambdas is not None:
            lambdas = [(lam.real, lam.imag) for lam in term.lambdas]
        terms.append(TermRecord(op=term.token, exp=term.exponent, lambdas=lambdas))
    return CatalogRecord(
        family=family,
        dim=monomial.dim,
        terms=terms,
        family_class=monomial.family,
        source=source,
    )


def records_to_monomials(records: Sequence[CatalogRecord]) -> List[InvariantMonomial]:
    """Rebuild monomials from their operator tokens."""
    monomials = []
    for index, record in enumerate(records):
        try:
            terms = [
                MonomialTerm(
                    operator=operator_from_token(term.op, record.dim),
                    exponent=term.exp,
                    lambdas=[complex(re, im) for re, im in term.lambdas] if term.lambdas else None,
                )
                for term in record.terms
            ]
            monomials.append(InvariantMonomial(terms=terms, family=record.family_class))
        except (InvforgeError, ValidationError) as e:
            raise CatalogFormatError(f"record {index} ({record.family}, N={record.dim}): {e}") from e
    return monomials


def save_catalog(path: PathLike, records: Sequence[CatalogRecord]) -> Path:
    """Write records as a UTF-8 JSON list, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = _RECORDS.dump_python(list(records), mode="json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    logger.info(f"Saved {len(records)} catalog records to {path}")
    return path


def load_catalog(path: PathLike) -> List[CatalogRecord]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            content = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise CatalogFormatError(f"cannot read catalog {path}: {e}") from e
    try:
        records = _RECORDS.validate_json(content)
    except ValidationError as e:
        raise CatalogFormatError(f"invalid catalog {path}: {e}") from e
    logger.info(f"Loaded {len(records)} catalog records from {path}")
    return records


class CatalogStore:
    """Catalog files kept under one directory, one file per family and N."""

    def __init__(self, catalog_dir: Optional[PathLike] = None):
        self.catalog_dir = Path(catalog_dir or settings.CATALOG_DIR)
        os.makedirs(self.catalog_dir, exist_ok=True)

    def path_for(self, family: str, dim: int) -> Path:
        return self.catalog_dir / f"{family}_N{dim}.json"

    def save(self, family: str, dim: int, monomials: Sequence[InvariantMonomial], source: str = "search") -> Path:
        records = [monomial_to_record(m, family, source) for m in monomials]
        return save_catalog(self.path_for(family, dim), records)

    def load(self, family: str, dim: int) -> Optional[List[InvariantMonomial]]:
        """Monomials stored for a family, or None when no file exists."""
        path = self.path_for(family, dim)
        if not path.exists():
            return None
        return records_to_monomials(load_catalog(path))

    def clear(self) -> int:
        cleared = 0
        for path in self.catalog_dir.glob("*.json"):
            path.unlink()
            cleared += 1
        logger.info(f"Cleared {cleared} catalog files")
        return cleared

    def stats(self) -> dict:
        files = sorted(self.catalog_dir.glob("*.json"))
        return {
            "catalog_dir": str(self.catalog_dir),
            "total_files": len(files),
            "total_size_kb": round(sum(p.stat().st_size for p in files) / 1024, 2),
        }
