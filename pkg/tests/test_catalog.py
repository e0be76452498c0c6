import numpy as np
import pytest

from fairmmr.catalog import (
    CatalogError,
    GroupMapping,
    items_in_group,
    load_catalog,
    load_group_mapping,
    parse_embeddings_file,
    save_catalog,
)

from conftest import make_catalog


def write_files(tmp_path, embeddings, tags, mapping_text):
    emb = tmp_path / "emb.tsv"
    emb.write_text(embeddings)
    tag = tmp_path / "tags.tsv"
    tag.write_text(tags)
    mapping = tmp_path / "mapping.yaml"
    mapping.write_text(mapping_text)
    return emb, tag, mapping


BASIC_MAPPING = "groups: [M]\nrules:\n  man: M\n"


class TestLoadCatalog:
    def test_basic_load_and_group_derivation(self, tmp_path):
        paths = write_files(
            tmp_path,
            "a\t0,0,0,0\nb\t1,1,1,1\nc\t2,2,2,2\n",
            "a\tman\n",
            BASIC_MAPPING,
        )
        catalog = load_catalog(*paths)
        assert len(catalog) == 3
        assert catalog.dimension == 4
        assert catalog["a"].groups == {"M"}
        assert catalog["b"].groups == frozenset()
        assert catalog["b"].tags == frozenset()

    def test_dimension_mismatch_names_offender(self, tmp_path):
        paths = write_files(
            tmp_path,
            "a\t0,0,0,0\nbad\t1,1,1\n",
            "",
            BASIC_MAPPING,
        )
        with pytest.raises(CatalogError, match="bad"):
            load_catalog(*paths)

    def test_duplicate_id_rejected(self, tmp_path):
        paths = write_files(
            tmp_path, "a\t0,0\na\t1,1\n", "", BASIC_MAPPING
        )
        with pytest.raises(CatalogError, match="duplicate"):
            load_catalog(*paths)

    def test_non_finite_component_rejected(self, tmp_path):
        paths = write_files(
            tmp_path, "a\t0,nan\n", "", BASIC_MAPPING
        )
        with pytest.raises(CatalogError, match="non-finite"):
            load_catalog(*paths)

    def test_tags_lowercased_and_trimmed(self, tmp_path):
        paths = write_files(
            tmp_path,
            "a\t0,0\n",
            "a\t MAN , Coffee\n",
            BASIC_MAPPING,
        )
        catalog = load_catalog(*paths)
        assert catalog["a"].tags == {"man", "coffee"}
        assert catalog["a"].groups == {"M"}

    def test_tag_record_for_unknown_id_rejected(self, tmp_path):
        paths = write_files(
            tmp_path, "a\t0,0\n", "ghost\tman\n", BASIC_MAPPING
        )
        with pytest.raises(CatalogError, match="ghost"):
            load_catalog(*paths)

    def test_reference_scale_group_counts(self, tmp_path):
        # 3249 items with 291 man / 458 woman tag assignments.
        lines, tag_lines = [], []
        for i in range(3249):
            item_id = f"img{i:04d}"
            lines.append(f"{item_id}\t{i % 7},{i % 5},{i % 3},1")
            if i < 291:
                tag_lines.append(f"{item_id}\tman")
            elif i < 291 + 458:
                tag_lines.append(f"{item_id}\twoman")
        paths = write_files(
            tmp_path,
            "\n".join(lines) + "\n",
            "\n".join(tag_lines) + "\n",
            "groups: [man, woman]\nrules:\n  man: man\n  woman: woman\n",
        )
        catalog = load_catalog(*paths)
        assert len(items_in_group(catalog, "man")) == 291
        assert len(items_in_group(catalog, "woman")) == 458


class TestGroupMapping:
    def test_rule_must_name_declared_group(self):
        with pytest.raises(CatalogError):
            GroupMapping(groups=("M",), tag_rules={"woman": "W"})

    def test_mapping_file_parse(self, tmp_path):
        path = tmp_path / "m.yaml"
        path.write_text("groups: [M, W]\nrules:\n  man: M\n  woman: W\n")
        mapping = load_group_mapping(path)
        assert mapping.groups == ("M", "W")
        assert mapping.groups_for_tags({"woman", "dog"}) == {"W"}


class TestItemsInGroup:
    def test_single_member(self, abc_catalog):
        assert [i.id for i in items_in_group(abc_catalog, "M")] == ["a"]

    def test_empty_group(self, abc_catalog):
        assert items_in_group(abc_catalog, "W") == []

    def test_unknown_group_errors(self, abc_catalog):
        with pytest.raises(CatalogError):
            items_in_group(abc_catalog, "X")

    def test_generated_assignment_counts(self):
        rng = np.random.default_rng(7)
        vectors, tags = {}, {}
        for i in range(100):
            item_id = f"i{i:03d}"
            vectors[item_id] = rng.normal(size=4)
            tags[item_id] = ["man"] if i < 40 else ["other"]
        catalog = make_catalog(vectors, tags)
        assert len(items_in_group(catalog, "M")) == 40


class TestInvariants:
    def test_round_trip_idempotent(self, tmp_path):
        rng = np.random.default_rng(3)
        vectors = {f"x{i}": rng.normal(size=5) for i in range(20)}
        tags = {"x0": ["man", "coffee"], "x3": ["woman"]}
        catalog = make_catalog(vectors, tags)
        paths = (tmp_path / "e.tsv", tmp_path / "t.tsv", tmp_path / "m.yaml")
        save_catalog(catalog, *paths)
        reloaded = load_catalog(*paths)
        assert reloaded.ids == catalog.ids
        for item in catalog:
            other = reloaded[item.id]
            assert np.array_equal(other.vector, item.vector)
            assert other.tags == item.tags
            assert other.groups == item.groups

    def test_groups_are_image_of_tag_rules(self):
        catalog = make_catalog(
            {"a": (0, 0), "b": (1, 1)},
            tags={"a": ["man", "woman", "dog"], "b": ["dog"]},
        )
        assert catalog["a"].groups == {"M", "W"}
        assert catalog["b"].groups == frozenset()

    def test_iteration_sorted_by_id(self):
        catalog = make_catalog({"z": (0,), "a": (1,), "m": (2,)})
        assert [i.id for i in catalog] == ["a", "m", "z"]

    def test_empty_catalog_rejected(self, tmp_path):
        paths = write_files(tmp_path, "", "", BASIC_MAPPING)
        with pytest.raises(CatalogError):
            parse_embeddings_file(paths[0])
