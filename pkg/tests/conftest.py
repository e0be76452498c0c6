import numpy as np
import pytest

from fairmmr.catalog import Catalog, EmbeddingItem, GroupMapping, build_catalog


def make_catalog(vectors, tags=None, groups=("M", "W"), rules=None):
    """Small in-memory catalog helper for tests.

    vectors: dict id -> sequence of floats
    tags: dict id -> iterable of tag strings
    rules: tag -> group map; defaults to {'man': 'M', 'woman': 'W'}
    """
    tags = tags or {}
    if rules is None:
        rules = {"man": "M", "woman": "W"}
    mapping = GroupMapping(groups=tuple(groups), tag_rules=dict(rules))
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
    tag_sets = {k: frozenset(t.lower() for t in v) for k, v in tags.items()}
    return build_catalog(arrays, tag_sets, mapping)


@pytest.fixture
def abc_catalog():
    """Three dim-2 items used throughout the retrieval examples."""
    return make_catalog(
        {"a": (0.0, 0.0), "b": (3.0, 4.0), "c": (1.0, 0.0)},
        tags={"a": ["man"]},
    )
