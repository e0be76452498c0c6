"""Batch image descriptor extraction for dense-retrieval catalogs."""

from .extract import (
    ExtractionError,
    build_model,
    extract,
    preprocessor,
    write_tags,
)
from .manifest import ExtractionManifest, ManifestError, load_manifest
from .validate import ValidationReport, validate_output

__all__ = [
    "ExtractionError",
    "ExtractionManifest",
    "ManifestError",
    "ValidationReport",
    "build_model",
    "extract",
    "load_manifest",
    "preprocessor",
    "validate_output",
    "write_tags",
]
