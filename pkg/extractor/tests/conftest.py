import shutil

import numpy as np
import pytest
from PIL import Image

from imgembed import build_model, load_manifest


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Twelve decodable images (one a byte-identical duplicate), one
    undecodable file, a tag sidecar, and a manifest covering them all."""
    root = tmp_path_factory.mktemp("images")
    rng = np.random.default_rng(0)
    ids = {}
    for n in range(11):
        image_id = f"img-{n:03d}"
        path = root / f"{image_id}.png"
        pixels = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(path)
        ids[image_id] = path.name
    # Byte-identical duplicate under a different id.
    dup = root / "img-dup.png"
    shutil.copyfile(root / "img-000.png", dup)
    ids["img-dup"] = dup.name
    # Undecodable: right extension, not an image.
    broken = root / "img-broken.png"
    broken.write_text("this is not an image")
    ids["img-broken"] = broken.name

    tags_path = root / "images.tags"
    with open(tags_path, "w", encoding="utf-8") as handle:
        for image_id in sorted(ids):
            handle.write(f"{image_id}\tphoto,synthetic\n")

    manifest_path = root / "manifest.yaml"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        handle.write("model: inception_v3\n")
        handle.write("weights: random\n")
        handle.write("dimension: 2048\n")
        handle.write("tags_file: images.tags\n")
        handle.write("images:\n")
        for image_id, name in sorted(ids.items()):
            handle.write(f"  {image_id}: {name}\n")
    return manifest_path


@pytest.fixture(scope="session")
def manifest(corpus):
    return load_manifest(corpus)


@pytest.fixture(scope="session")
def model(manifest):
    return build_model(manifest)
