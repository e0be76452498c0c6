import numpy as np
import pytest

from fairmmr.representations import (
    RepresentationError,
    build_representations,
    load_representations,
    sample_count,
    save_representations,
)

from conftest import make_catalog


def two_group_catalog(rng, per_group=12, dim=6):
    vectors, tags = {}, {}
    for g, tag in enumerate(["man", "woman"]):
        for i in range(per_group):
            item_id = f"{tag}{i:03d}"
            vectors[item_id] = rng.normal(loc=3.0 * g, size=dim)
            tags[item_id] = [tag]
    return make_catalog(vectors, tags)


class TestSampleCount:
    def test_full_fraction_is_group_size(self):
        assert sample_count(291, 1.0) == 291

    def test_ceiling(self):
        assert sample_count(10, 0.25) == 3
        assert sample_count(458, 0.1) == 46

    def test_clamped_to_at_least_one(self):
        assert sample_count(3, 0.01) == 1

    @pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
    def test_invalid_fraction(self, fraction):
        with pytest.raises(RepresentationError):
            sample_count(10, fraction)

    def test_invalid_group_size(self):
        with pytest.raises(RepresentationError):
            sample_count(0, 0.5)


class TestBuildRepresentations:
    def test_single_member_group_is_exact(self):
        catalog = make_catalog(
            {"a": (1.5, -2.0), "b": (9.0, 9.0)},
            tags={"a": ["man"], "b": ["woman"]},
        )
        reps = build_representations(catalog, fraction=1.0)
        by_group = {r.group: r for r in reps.reps}
        assert np.array_equal(by_group["M"].vector, [1.5, -2.0])
        assert by_group["M"].sample_size == 1

    def test_hand_mean(self):
        catalog = make_catalog(
            {"a": (0, 0), "b": (2, 0), "c": (1, 3), "w": (5, 5)},
            tags={"a": ["man"], "b": ["man"], "c": ["man"], "w": ["woman"]},
        )
        reps = build_representations(catalog, fraction=1.0)
        man = next(r for r in reps.reps if r.group == "M")
        np.testing.assert_allclose(man.vector, [1.0, 1.0])

    @pytest.mark.parametrize("fraction", [1.0, 0.25, 0.1])
    def test_supported_fraction_grid(self, fraction):
        catalog = two_group_catalog(np.random.default_rng(0))
        reps = build_representations(catalog, fraction=fraction, seed=5)
        assert reps.groups == ("M", "W")
        expected = sample_count(12, fraction)
        assert all(r.sample_size == expected for r in reps.reps)

    def test_empty_group_errors_with_name(self):
        catalog = make_catalog(
            {"a": (0, 0)}, tags={"a": ["man"]}
        )
        with pytest.raises(RepresentationError, match="W"):
            build_representations(catalog)

    def test_invalid_fraction(self):
        catalog = two_group_catalog(np.random.default_rng(1))
        with pytest.raises(RepresentationError):
            build_representations(catalog, fraction=0.0)


class TestSamplingProperties:
    def test_full_fraction_independent_of_seed(self):
        catalog = two_group_catalog(np.random.default_rng(2))
        a = build_representations(catalog, 1.0, seed=1)
        b = build_representations(catalog, 1.0, seed=999)
        for ra, rb in zip(a.reps, b.reps):
            assert np.array_equal(ra.vector, rb.vector)

    def test_deterministic_for_fixed_seed(self):
        catalog = two_group_catalog(np.random.default_rng(3))
        a = build_representations(catalog, 0.25, seed=42)
        b = build_representations(catalog, 0.25, seed=42)
        for ra, rb in zip(a.reps, b.reps):
            assert np.array_equal(ra.vector, rb.vector)

    def test_componentwise_bounds(self):
        # Each mean component must lie within the group's min/max envelope.
        catalog = two_group_catalog(np.random.default_rng(4), per_group=20)
        reps = build_representations(catalog, 0.25, seed=7)
        for rep in reps.reps:
            members = [
                item.vector for item in catalog if rep.group in item.groups
            ]
            lo = np.min(members, axis=0)
            hi = np.max(members, axis=0)
            assert np.all(rep.vector >= lo - 1e-12)
            assert np.all(rep.vector <= hi + 1e-12)

    def test_exact_full_group_mean_at_fraction_one(self):
        catalog = two_group_catalog(np.random.default_rng(5), per_group=9)
        reps = build_representations(catalog, 1.0)
        for rep in reps.reps:
            members = [
                item.vector for item in catalog if rep.group in item.groups
            ]
            np.testing.assert_allclose(rep.vector, np.mean(members, axis=0))


class TestSerialization:
    def test_round_trip(self, tmp_path):
        catalog = two_group_catalog(np.random.default_rng(6))
        reps = build_representations(catalog, 0.25, seed=11)
        path = tmp_path / "reps.tsv"
        save_representations(reps, path)
        loaded = load_representations(path)
        assert loaded.groups == reps.groups
        for ra, rb in zip(reps.reps, loaded.reps):
            assert np.array_equal(ra.vector, rb.vector)
            assert ra.sample_size == rb.sample_size
            assert ra.sampling_fraction == rb.sampling_fraction
            assert ra.seed == rb.seed
