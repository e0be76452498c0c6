"""Item catalog: embeddings, curated tags, and demographic group assignments.

The catalog is loaded once from line-delimited text files and is immutable
afterwards, so it can be shared freely between workers.

File formats:
    embeddings  ``id<TAB>v1,v2,...,vD`` with decimal floats
    tags        ``id<TAB>tag1,tag2,...``
    mapping     YAML with a ``groups:`` ordered list and ``rules:`` tag->group map
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import yaml


class CatalogError(ValueError):
    """Raised when catalog files or records violate the format contract."""


@dataclass(frozen=True)
class EmbeddingItem:
    """A single catalog entry: descriptor vector plus curated tags."""

    id: str
    vector: np.ndarray
    tags: frozenset[str]
    groups: frozenset[str]

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True)
class GroupMapping:
    """Ordered demographic groups and the tag rules that assign them."""

    groups: tuple[str, ...]
    tag_rules: dict[str, str]

    def __post_init__(self) -> None:
        if len(set(self.groups)) != len(self.groups):
            raise CatalogError("duplicate group identifiers in mapping")
        for tag, group in self.tag_rules.items():
            if group not in self.groups:
                raise CatalogError(
                    f"rule {tag!r} -> {group!r} names an undeclared group"
                )

    def groups_for_tags(self, tags: Iterable[str]) -> frozenset[str]:
        return frozenset(
            self.tag_rules[t] for t in tags if t in self.tag_rules
        )


@dataclass(frozen=True)
class Catalog:
    """Immutable, id-indexed item collection with a shared dimension."""

    items: dict[str, EmbeddingItem]
    dimension: int
    group_mapping: GroupMapping
    # Dense view in sorted-id order, built once for vectorized distance work.
    _ids: tuple[str, ...] = field(init=False, repr=False)
    _matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.items:
            raise CatalogError("catalog is empty")
        ids = tuple(sorted(self.items))
        matrix = np.stack([self.items[i].vector for i in ids])
        object.__setattr__(self, "_ids", ids)
        object.__setattr__(self, "_matrix", matrix)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.items

    def __getitem__(self, item_id: str) -> EmbeddingItem:
        return self.items[item_id]

    def __iter__(self) -> Iterator[EmbeddingItem]:
        for item_id in self._ids:
            yield self.items[item_id]

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def matrix(self) -> np.ndarray:
        """Item vectors stacked in sorted-id order; treat as read-only."""
        return self._matrix


def _parse_vector(text: str, item_id: str) -> np.ndarray:
    try:
        vector = np.array([float(x) for x in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise CatalogError(f"item {item_id!r}: unparseable vector component") from exc
    if not np.all(np.isfinite(vector)):
        raise CatalogError(f"item {item_id!r}: non-finite vector component")
    return vector


def parse_embeddings_file(path: str | Path) -> dict[str, np.ndarray]:
    """Read an embeddings file, enforcing unique ids, finiteness, and a
    single shared dimension."""
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                item_id, vector_text = line.split("\t", 1)
            except ValueError as exc:
                raise CatalogError(
                    f"{path}:{line_no}: expected 'id<TAB>floats'"
                ) from exc
            if item_id in vectors:
                raise CatalogError(f"duplicate item id {item_id!r}")
            vector = _parse_vector(vector_text, item_id)
            if dimension is None:
                dimension = vector.shape[0]
            elif vector.shape[0] != dimension:
                raise CatalogError(
                    f"item {item_id!r}: dimension {vector.shape[0]} "
                    f"does not match catalog dimension {dimension}"
                )
            vectors[item_id] = vector
    if not vectors:
        raise CatalogError(f"{path}: no embedding records")
    return vectors


def parse_tags_file(path: str | Path) -> dict[str, frozenset[str]]:
    """Read a tags file. Tags are lowercased and trimmed; case is not
    semantic in the curated vocabularies this toolkit consumes."""
    tags: dict[str, frozenset[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            item_id = parts[0]
            if item_id in tags:
                raise CatalogError(f"duplicate tag record for id {item_id!r}")
            raw = parts[1] if len(parts) > 1 else ""
            cleaned = frozenset(
                t.strip().lower() for t in raw.split(",") if t.strip()
            )
            tags[item_id] = cleaned
    return tags


def load_group_mapping(path: str | Path) -> GroupMapping:
    with open(path, encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    if not isinstance(data, dict) or "groups" not in data:
        raise CatalogError(f"{path}: mapping must declare a 'groups:' list")
    groups = data["groups"]
    rules = data.get("rules", {}) or {}
    if not isinstance(groups, list) or not all(isinstance(g, str) for g in groups):
        raise CatalogError(f"{path}: 'groups:' must be a list of strings")
    if not isinstance(rules, dict):
        raise CatalogError(f"{path}: 'rules:' must be a tag->group map")
    normalized = {str(t).strip().lower(): str(g) for t, g in rules.items()}
    return GroupMapping(groups=tuple(groups), tag_rules=normalized)


def build_catalog(
    vectors: dict[str, np.ndarray],
    tags: dict[str, frozenset[str]],
    mapping: GroupMapping,
) -> Catalog:
    unknown = sorted(set(tags) - set(vectors))
    if unknown:
        raise CatalogError(
            f"tag records for unknown item ids: {', '.join(unknown[:5])}"
        )
    dimension = next(iter(vectors.values())).shape[0]
    items = {}
    for item_id in sorted(vectors):
        item_tags = tags.get(item_id, frozenset())
        items[item_id] = EmbeddingItem(
            id=item_id,
            vector=vectors[item_id],
            tags=item_tags,
            groups=mapping.groups_for_tags(item_tags),
        )
    return Catalog(items=items, dimension=int(dimension), group_mapping=mapping)


def load_catalog(
    embeddings_path: str | Path,
    tags_path: str | Path,
    mapping_path: str | Path,
) -> Catalog:
    """Load and validate a catalog from its three on-disk files."""
    vectors = parse_embeddings_file(embeddings_path)
    tags = parse_tags_file(tags_path)
    mapping = load_group_mapping(mapping_path)
    return build_catalog(vectors, tags, mapping)


def format_float(value: float) -> str:
    """Shortest decimal text that round-trips the float exactly."""
    if not math.isfinite(value):
        raise CatalogError(f"refusing to serialize non-finite value {value!r}")
    return repr(float(value))


def save_catalog(
    catalog: Catalog,
    embeddings_path: str | Path,
    tags_path: str | Path,
    mapping_path: str | Path | None = None,
) -> None:
    """Write a catalog back out in the load formats (round-trip exact)."""
    with open(embeddings_path, "w", encoding="utf-8") as handle:
        for item in catalog:
            row = ",".join(format_float(v) for v in item.vector)
            handle.write(f"{item.id}\t{row}\n")
    with open(tags_path, "w", encoding="utf-8") as handle:
        for item in catalog:
            handle.write(f"{item.id}\t{','.join(sorted(item.tags))}\n")
    if mapping_path is not None:
        mapping = catalog.group_mapping
        payload = {
            "groups": list(mapping.groups),
            "rules": dict(sorted(mapping.tag_rules.items())),
        }
        with open(mapping_path, "w", encoding="utf-8") as handle:
            yaml.safe_dump(payload, handle, sort_keys=False)


def items_in_group(catalog: Catalog, group: str) -> list[EmbeddingItem]:
    """All items carrying the group, in stable id order."""
    if group not in catalog.group_mapping.groups:
        raise CatalogError(f"unknown group {group!r}")
    return [item for item in catalog if group in item.groups]
