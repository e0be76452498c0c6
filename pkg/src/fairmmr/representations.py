"""Group fairness representations: per-group mean descriptor vectors.

A representation summarizes one demographic group as the componentwise
mean of its members' descriptors, optionally computed from a sampled
fraction of the group to model scarce labeled data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import Catalog, format_float, items_in_group


class RepresentationError(ValueError):
    """Raised for empty groups or invalid sampling parameters."""


@dataclass(frozen=True)
class FairnessRepresentation:
    group: str
    vector: np.ndarray
    sample_size: int
    sampling_fraction: float
    seed: int


@dataclass(frozen=True)
class RepresentationSet:
    """One representation per declared group, in mapping order."""

    reps: tuple[FairnessRepresentation, ...]

    def __post_init__(self) -> None:
        if not self.reps:
            raise RepresentationError("representation set is empty")
        dims = {r.vector.shape[0] for r in self.reps}
        if len(dims) != 1:
            raise RepresentationError(f"mixed representation dimensions: {dims}")
        groups = [r.group for r in self.reps]
        if len(set(groups)) != len(groups):
            raise RepresentationError("duplicate group in representation set")

    def __len__(self) -> int:
        return len(self.reps)

    @property
    def groups(self) -> tuple[str, ...]:
        return tuple(r.group for r in self.reps)

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([r.vector for r in self.reps])


def sample_count(group_size: int, fraction: float) -> int:
    """Number of members averaged at a sampling fraction: ceil, never 0."""
    if group_size < 1:
        raise RepresentationError("group_size must be >= 1")
    if not 0.0 < fraction <= 1.0:
        raise RepresentationError(f"fraction must be in (0, 1], got {fraction}")
    return min(group_size, max(1, math.ceil(fraction * group_size)))


def build_representations(
    catalog: Catalog, fraction: float = 1.0, seed: int = 0
) -> RepresentationSet:
    """Average each group's descriptors into its fairness representation.

    With ``fraction < 1`` a uniform without-replacement sample of
    ``ceil(fraction * group_size)`` members is averaged; draws are
    independent per group but fully determined by ``seed``. ``fraction
    == 1`` uses every member and touches no RNG.
    """
    if not 0.0 < fraction <= 1.0:
        raise RepresentationError(f"fraction must be in (0, 1], got {fraction}")
    groups = catalog.group_mapping.groups
    # One child seed per group keeps the per-group draws independent while
    # remaining reproducible from the single user-supplied seed.
    children = np.random.SeedSequence(seed).spawn(len(groups))
    reps = []
    for group, child in zip(groups, children):
        members = items_in_group(catalog, group)
        if not members:
            raise RepresentationError(f"group {group!r} has no members")
        if fraction == 1.0:
            chosen = members
        else:
            count = sample_count(len(members), fraction)
            rng = np.random.default_rng(child)
            idx = rng.choice(len(members), size=count, replace=False)
            chosen = [members[i] for i in sorted(idx)]
        mean = np.mean([m.vector for m in chosen], axis=0)
        reps.append(
            FairnessRepresentation(
                group=group,
                vector=mean,
                sample_size=len(chosen),
                sampling_fraction=fraction,
                seed=seed,
            )
        )
    return RepresentationSet(reps=tuple(reps))


GROUP_ID_PREFIX = "group:"


def save_representations(reps: RepresentationSet, path: str | Path) -> None:
    """Write representations in the embeddings file format with
    ``group:``-prefixed ids, plus sampling metadata in header comments."""
    with open(path, "w", encoding="utf-8") as handle:
        for rep in reps.reps:
            handle.write(
                f"# {GROUP_ID_PREFIX}{rep.group} sample_size={rep.sample_size} "
                f"fraction={format_float(rep.sampling_fraction)} seed={rep.seed}\n"
            )
        for rep in reps.reps:
            row = ",".join(format_float(v) for v in rep.vector)
            handle.write(f"{GROUP_ID_PREFIX}{rep.group}\t{row}\n")


def load_representations(path: str | Path) -> RepresentationSet:
    meta: dict[str, tuple[int, float, int]] = {}
    reps = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields and fields[0].startswith(GROUP_ID_PREFIX):
                    group = fields[0][len(GROUP_ID_PREFIX):]
                    kv = dict(f.split("=", 1) for f in fields[1:])
                    meta[group] = (
                        int(kv.get("sample_size", 0)),
                        float(kv.get("fraction", 1.0)),
                        int(kv.get("seed", 0)),
                    )
                continue
            prefixed_id, vector_text = line.split("\t", 1)
            if not prefixed_id.startswith(GROUP_ID_PREFIX):
                raise RepresentationError(
                    f"representation id {prefixed_id!r} lacks the "
                    f"{GROUP_ID_PREFIX!r} prefix"
                )
            group = prefixed_id[len(GROUP_ID_PREFIX):]
            vector = np.array(
                [float(x) for x in vector_text.split(",")], dtype=np.float64
            )
            sample_size, fraction, seed = meta.get(group, (0, 1.0, 0))
            reps.append(
                FairnessRepresentation(
                    group=group,
                    vector=vector,
                    sample_size=sample_size,
                    sampling_fraction=fraction,
                    seed=seed,
                )
            )
    return RepresentationSet(reps=tuple(reps))
