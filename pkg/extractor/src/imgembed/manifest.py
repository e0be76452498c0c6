"""Extraction manifests: which images to embed, with which model.

A manifest is a small YAML file:

.. code-block:: yaml

    model: inception_v3
    weights: imagenet        # or "random" for seeded untrained weights
    dimension: 2048
    images:
      photo-001: images/photo-001.jpg
      photo-002: images/photo-002.jpg
    tags_file: images.tags   # optional sidecar in the catalog tags format

Relative image paths are resolved against the manifest's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

SUPPORTED_MODELS = ("inception_v3",)
WEIGHT_MODES = ("imagenet", "random")


class ManifestError(ValueError):
    """Raised for malformed or inconsistent manifests."""


@dataclass(frozen=True)
class ExtractionManifest:
    """Validated description of one extraction job."""

    model: str
    weights: str
    dimension: int
    images: dict[str, Path] = field(default_factory=dict)
    tags_file: Path | None = None

    def __post_init__(self) -> None:
        if self.model not in SUPPORTED_MODELS:
            raise ManifestError(
                f"unsupported model {self.model!r}; "
                f"supported: {', '.join(SUPPORTED_MODELS)}"
            )
        if self.weights not in WEIGHT_MODES:
            raise ManifestError(
                f"unsupported weights mode {self.weights!r}; "
                f"supported: {', '.join(WEIGHT_MODES)}"
            )
        if self.dimension < 1:
            raise ManifestError("dimension must be >= 1")
        for image_id, path in self.images.items():
            if not image_id or "\t" in image_id:
                raise ManifestError(f"invalid image id {image_id!r}")
            if not path.is_file():
                raise ManifestError(
                    f"image {image_id!r}: file not found: {path}"
                )
        if self.tags_file is not None and not self.tags_file.is_file():
            raise ManifestError(f"tags file not found: {self.tags_file}")

    def sorted_ids(self) -> list[str]:
        return sorted(self.images)


def load_manifest(path: str | Path) -> ExtractionManifest:
    """Parse and validate a manifest file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: manifest must be a mapping")

    images_raw = raw.get("images") or {}
    if not isinstance(images_raw, dict):
        raise ManifestError(f"{path}: 'images' must map ids to paths")
    base = path.parent
    images = {
        str(image_id): (base / str(image_path)).resolve()
        for image_id, image_path in images_raw.items()
    }
    tags_file = raw.get("tags_file")
    return ExtractionManifest(
        model=str(raw.get("model", "inception_v3")),
        weights=str(raw.get("weights", "imagenet")),
        dimension=int(raw.get("dimension", 2048)),
        images=images,
        tags_file=(base / str(tags_file)).resolve() if tags_file else None,
    )
