"""Text formatting utilities for CLI tables."""

from typing import List, Sequence


def truncate_text(text: str, max_length: int, suffix: str = "...") -> str:
    """Truncate text to specified length."""
    if len(text) <= max_length:
        return text

    return text[:max_length - len(suffix)] + suffix


def format_complex(value: complex, digits: int = 6) -> str:
    """Fixed-precision complex number; the imaginary part is dropped when it rounds to zero."""
    re = round(value.real, digits) + 0.0
    im = round(value.imag, digits) + 0.0
    if im == 0:
        return f"{re:.{digits}f}"
    sign = "+" if im >= 0 else "-"
    return f"{re:.{digits}f}{sign}{abs(im):.{digits}f}i"


def format_lambdas(lambdas: Sequence[complex], digits: int = 4, limit: int = 5) -> str:
    shown = ", ".join(format_complex(lam, digits) for lam in lambdas[:limit])
    if len(lambdas) > limit:
        shown += ", ..."
    return f"[{shown}]"


def format_table(headers: Sequence[str], rows: Sequence[Sequence[object]], max_width: int = 60) -> str:
    """Left-aligned fixed-width table with a dashed rule under the header."""
    cells: List[List[str]] = [[truncate_text(str(c), max_width) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def line(values: Sequence[str]) -> str:
        return "  ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()

    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in cells)
    return "\n".join(out)
