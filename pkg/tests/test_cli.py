import pytest

from fairmmr.cli import main


@pytest.fixture(scope="module")
def corpus_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    emb = root / "items.embeddings"
    tags = root / "items.tags"
    mapping = root / "groups.yaml"
    code = main(
        [
            "synth",
            "--groups",
            "2",
            "--items-per-group",
            "25",
            "--dim",
            "16",
            "--topics",
            "2",
            "--seed",
            "3",
            "--out-embeddings",
            str(emb),
            "--out-tags",
            str(tags),
            "--out-mapping",
            str(mapping),
        ]
    )
    assert code == 0
    return emb, tags, mapping


def catalog_args(files):
    emb, tags, mapping = files
    return [
        "--embeddings",
        str(emb),
        "--tags",
        str(tags),
        "--mapping",
        str(mapping),
    ]


class TestSynthIngest:
    def test_ingest_summarizes(self, corpus_files, capsys):
        assert main(["ingest", *catalog_args(corpus_files)]) == 0
        out = capsys.readouterr().out
        assert "items: 50" in out
        assert "dimension: 16" in out
        assert "group g0: 25" in out

    def test_ingest_round_trip_is_identical(self, corpus_files, tmp_path, capsys):
        emb, tags, mapping = corpus_files
        out_emb = tmp_path / "copy.embeddings"
        out_tags = tmp_path / "copy.tags"
        out_map = tmp_path / "copy.yaml"
        code = main(
            [
                "ingest",
                *catalog_args(corpus_files),
                "--out-embeddings",
                str(out_emb),
                "--out-tags",
                str(out_tags),
                "--out-mapping",
                str(out_map),
            ]
        )
        assert code == 0
        assert out_emb.read_bytes() == emb.read_bytes()

    def test_missing_file_is_runtime_error(self, corpus_files, capsys):
        _, tags, mapping = corpus_files
        code = main(
            [
                "ingest",
                "--embeddings",
                "/nonexistent.embeddings",
                "--tags",
                str(tags),
                "--mapping",
                str(mapping),
            ]
        )
        assert code == 3
        assert "error:" in capsys.readouterr().err

    def test_malformed_embeddings_is_validation_error(self, tmp_path, capsys):
        emb = tmp_path / "bad.embeddings"
        emb.write_text("a\t1.0\t2.0\nb\t1.0\n")
        tags = tmp_path / "bad.tags"
        tags.write_text("a\tman\n")
        mapping = tmp_path / "bad.yaml"
        mapping.write_text("groups: [M]\nrules:\n  man: M\n")
        code = main(
            [
                "ingest",
                "--embeddings",
                str(emb),
                "--tags",
                str(tags),
                "--mapping",
                str(mapping),
            ]
        )
        assert code == 2
        assert "b" in capsys.readouterr().err


class TestKnnRerank:
    def test_knn_lists_pool(self, corpus_files, capsys):
        code = main(
            [
                "knn",
                *catalog_args(corpus_files),
                "--query-id",
                "g0-00000",
                "--pool-size",
                "5",
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        ids = [line.split("\t")[0] for line in lines]
        assert "g0-00000" not in ids
        dists = [float(line.split("\t")[1]) for line in lines]
        assert dists == sorted(dists)

    def test_unknown_query_id(self, corpus_files, capsys):
        code = main(
            ["knn", *catalog_args(corpus_files), "--query-id", "nope"]
        )
        assert code == 2

    def test_rerank_fmmr(self, corpus_files, capsys):
        code = main(
            [
                "rerank",
                *catalog_args(corpus_files),
                "--query-id",
                "g0-00000",
                "--lambda",
                "0.5",
                "--k",
                "5",
                "--pool-size",
                "20",
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        assert all(len(line.split("\t")) == 4 for line in lines)

    def test_rerank_with_saved_reps(self, corpus_files, tmp_path, capsys):
        reps_path = tmp_path / "reps.embeddings"
        code = main(
            [
                "reps",
                *catalog_args(corpus_files),
                "--fraction",
                "0.5",
                "--seed",
                "1",
                "--out",
                str(reps_path),
            ]
        )
        assert code == 0
        capsys.readouterr()
        code = main(
            [
                "rerank",
                *catalog_args(corpus_files),
                "--query-id",
                "g1-00003",
                "--lambda",
                "0.3",
                "--k",
                "4",
                "--kernel",
                "fmmr",
                "--reps",
                str(reps_path),
            ]
        )
        assert code == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 4

    def test_invalid_lambda(self, corpus_files, capsys):
        code = main(
            [
                "rerank",
                *catalog_args(corpus_files),
                "--query-id",
                "g0-00000",
                "--lambda",
                "1.5",
            ]
        )
        assert code == 2


class TestTuneEvalReport:
    def test_tune_prints_lambdas(self, corpus_files, capsys):
        code = main(
            [
                "tune",
                *catalog_args(corpus_files),
                "--grid-size",
                "10",
                "--k",
                "5",
                "--pool-size",
                "20",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("overall_lambda\t")
        value = float(out.splitlines()[0].split("\t")[1])
        assert 0.0 <= value < 1.0

    def test_eval_then_report(self, corpus_files, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code = main(
            [
                "eval",
                *catalog_args(corpus_files),
                "--methods",
                "knn_only,fmmr",
                "--train-size",
                "10",
                "--k",
                "5",
                "--pool-size",
                "20",
                "--grid-size",
                "10",
                "--out",
                str(out_dir),
            ]
        )
        assert code == 0
        eval_out = capsys.readouterr().out
        assert "knn_only" in eval_out
        assert (out_dir / "summary.tsv").exists()

        code = main(["report", "--dir", str(out_dir), "--k", "5"])
        assert code == 0
        assert capsys.readouterr().out == eval_out

    def test_eval_unknown_method(self, corpus_files, tmp_path, capsys):
        code = main(
            [
                "eval",
                *catalog_args(corpus_files),
                "--methods",
                "bogus",
                "--out",
                str(tmp_path / "x"),
            ]
        )
        assert code == 2
