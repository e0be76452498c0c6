"""Penultimate-layer descriptor extraction.

The classifier head of the backbone is replaced with the identity so a
forward pass yields the pooled penultimate activation (2048 floats for
Inception v3). Preprocessing is pinned to the backbone's published
recipe: resize the short side to 342, center-crop 299, scale to [0, 1],
and normalize with the ImageNet channel statistics. Output records are
written id-sorted in the line-delimited embeddings format
(``id<TAB>comma-separated floats``), with floats printed at full
round-trip precision.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torch import nn
from torchvision import models, transforms

from .manifest import ExtractionManifest

logger = logging.getLogger(__name__)

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)
_RANDOM_WEIGHTS_SEED = 0


class ExtractionError(RuntimeError):
    """Raised when the model cannot be prepared or output written."""


def preprocessor(model_name: str = "inception_v3") -> transforms.Compose:
    """Deterministic image-to-tensor pipeline for the given backbone."""
    if model_name != "inception_v3":
        raise ExtractionError(f"no preprocessing recipe for {model_name!r}")
    return transforms.Compose(
        [
            transforms.Resize(342),
            transforms.CenterCrop(299),
            transforms.ToTensor(),
            transforms.Normalize(_IMAGENET_MEAN, _IMAGENET_STD),
        ]
    )


def build_model(manifest: ExtractionManifest) -> nn.Module:
    """Backbone with its output layer removed, in inference mode.

    ``weights: imagenet`` loads the pretrained checkpoint;
    ``weights: random`` builds a seeded untrained network, which keeps
    every pipeline property except descriptor semantics and needs no
    checkpoint download.
    """
    if manifest.weights == "imagenet":
        weights = models.Inception_V3_Weights.IMAGENET1K_V1
        model = models.inception_v3(weights=weights)
    else:
        torch.manual_seed(_RANDOM_WEIGHTS_SEED)
        model = models.inception_v3(weights=None, init_weights=True)
    if model.fc.in_features != manifest.dimension:
        raise ExtractionError(
            f"model penultimate width {model.fc.in_features} does not "
            f"match manifest dimension {manifest.dimension}"
        )
    model.fc = nn.Identity()
    model.aux_logits = False
    model.AuxLogits = None
    model.eval()
    return model


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ExtractionError(f"non-finite descriptor component {value!r}")
    return repr(float(value))


def _load_image(image_id: str, path: Path) -> Image.Image | None:
    try:
        with Image.open(path) as image:
            return image.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        logger.warning("skipping %s: cannot decode %s (%s)", image_id, path, exc)
        return None


def extract(
    manifest: ExtractionManifest,
    out_path: str | Path,
    model: nn.Module | None = None,
    batch_size: int = 8,
) -> list[str]:
    """Embed every readable manifest image and write the embeddings file.

    Undecodable images are skipped with a logged id. Returns the sorted
    ids actually written. An empty manifest yields an empty output file
    and a warning.
    """
    if not manifest.images:
        logger.warning("manifest lists no images; writing empty output")
        Path(out_path).write_text("", encoding="utf-8")
        return []
    if model is None:
        model = build_model(manifest)
    prep = preprocessor(manifest.model)

    tensors: list[torch.Tensor] = []
    kept_ids: list[str] = []
    for image_id in manifest.sorted_ids():
        image = _load_image(image_id, manifest.images[image_id])
        if image is None:
            continue
        tensors.append(prep(image))
        kept_ids.append(image_id)

    rows: list[np.ndarray] = []
    with torch.no_grad():
        for start in range(0, len(tensors), batch_size):
            batch = torch.stack(tensors[start : start + batch_size])
            out = model(batch)
            rows.extend(out.double().cpu().numpy())

    with open(out_path, "w", encoding="utf-8") as handle:
        for image_id, row in zip(kept_ids, rows):
            if row.shape[0] != manifest.dimension:
                raise ExtractionError(
                    f"{image_id}: got {row.shape[0]} components, "
                    f"expected {manifest.dimension}"
                )
            text = ",".join(_format_float(v) for v in row)
            handle.write(f"{image_id}\t{text}\n")
    return kept_ids


def write_tags(
    manifest: ExtractionManifest, kept_ids: list[str], out_path: str | Path
) -> int:
    """Copy sidecar tag records for the extracted ids. Returns the
    number of records written."""
    if manifest.tags_file is None:
        raise ExtractionError("manifest declares no tags file")
    kept = set(kept_ids)
    written = 0
    with open(manifest.tags_file, encoding="utf-8") as src, open(
        out_path, "w", encoding="utf-8"
    ) as dst:
        for line in src:
            stripped = line.rstrip("\n")
            if not stripped or stripped.startswith("#"):
                continue
            record_id = stripped.split("\t", 1)[0]
            if record_id in kept:
                dst.write(stripped + "\n")
                written += 1
    return written
