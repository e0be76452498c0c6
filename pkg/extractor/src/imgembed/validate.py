"""Standalone output checks for emitted embeddings files.

This deliberately re-implements the consumer's file grammar instead of
importing the consumer: one record per line, ``id<TAB>floats`` with
comma-separated components, blank lines and ``#`` comments ignored,
unique ids, one shared dimension, finite values throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ValidationReport:
    """Line-level findings for one embeddings file."""

    path: str
    records: int = 0
    dimension: int | None = None
    nan_count: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> str:
        lines = [
            f"file: {self.path}",
            f"records: {self.records}",
            f"dimension: {self.dimension if self.dimension is not None else 'NA'}",
            f"non-finite components: {self.nan_count}",
        ]
        for line_no, message in self.errors:
            lines.append(f"line {line_no}: {message}")
        lines.append("status: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)


def validate_output(
    embeddings_path: str | Path, expected_dim: int | None = None
) -> ValidationReport:
    """Check an embeddings file against the record grammar.

    ``expected_dim`` additionally pins the dimension; otherwise the
    first record's dimension is the reference.
    """
    path = Path(embeddings_path)
    report = ValidationReport(path=str(path), dimension=expected_dim)
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.rstrip("\n")
            if not stripped or stripped.startswith("#"):
                continue
            if "\t" not in stripped:
                report.errors.append((line_no, "expected 'id<TAB>floats'"))
                continue
            record_id, vector_text = stripped.split("\t", 1)
            if not record_id:
                report.errors.append((line_no, "empty id"))
                continue
            if record_id in seen:
                report.errors.append((line_no, f"duplicate id {record_id!r}"))
                continue
            seen.add(record_id)
            try:
                values = [float(v) for v in vector_text.split(",")]
            except ValueError:
                report.errors.append(
                    (line_no, f"{record_id!r}: unparseable component")
                )
                continue
            bad = sum(1 for v in values if not math.isfinite(v))
            if bad:
                report.nan_count += bad
                report.errors.append(
                    (line_no, f"{record_id!r}: {bad} non-finite component(s)")
                )
                continue
            if report.dimension is None:
                report.dimension = len(values)
            elif len(values) != report.dimension:
                report.errors.append(
                    (
                        line_no,
                        f"{record_id!r}: dimension {len(values)} != "
                        f"{report.dimension}",
                    )
                )
                continue
            report.records += 1
    return report
