import json
from pathlib import Path

import pytest

from opinionchain.cli import main


@pytest.fixture
def gen_config(tmp_path):
    path = tmp_path / "gen.json"
    path.write_text(
        json.dumps(
            {
                "generator": {
                    "num_docs_per_label": 8,
                    "min_segments": 2,
                    "max_segments": 3,
                    "embedding_dim": 4,
                    "num_polar_words": 3,
                    "num_neutral_words": 5,
                }
            }
        )
    )
    return str(path)


@pytest.fixture
def generated(tmp_path, gen_config):
    out = tmp_path / "gen"
    rc = main(["generate", "--out", str(out), "--seed", "5", "--config", gen_config])
    assert rc == 0
    return out


def train_config_file(tmp_path, generated, extra_training=None):
    path = tmp_path / "train.json"
    training = {"num_hidden_states": 2, "max_iterations": 40}
    training.update(extra_training or {})
    path.write_text(
        json.dumps(
            {
                "pipeline": {
                    "blocks": ["embedding"],
                    "embedding_path": str(generated / "embeddings.txt"),
                },
                "training": training,
            }
        )
    )
    return str(path)


def dir_bytes(root: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir()) if p.is_file()}


class TestGenerate:
    def test_outputs_present(self, generated):
        assert (generated / "corpus" / "manifest.tsv").exists()
        assert (generated / "embeddings.txt").exists()
        assert (generated / "config.json").exists()
        assert (generated / "run.log").exists()
        stats = json.loads((generated / "generator_stats.json").read_text())
        assert stats["format"] == "generator-stats/v1"
        assert stats["documents"] == 16
        assert 0.5 <= stats["order_insensitive_bayes_accuracy"] <= 1.0

    def test_fixed_seed_reproduces_files(self, tmp_path, gen_config):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["generate", "--out", str(a), "--seed", "9", "--config", gen_config]) == 0
        assert main(["generate", "--out", str(b), "--seed", "9", "--config", gen_config]) == 0
        assert dir_bytes(a / "corpus") == dir_bytes(b / "corpus")
        assert (a / "embeddings.txt").read_bytes() == (b / "embeddings.txt").read_bytes()
        assert (a / "generator_stats.json").read_bytes() == (b / "generator_stats.json").read_bytes()

    def test_unknown_generator_key_fails(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"generator": {"bogus_knob": 3}}))
        rc = main(["generate", "--out", str(tmp_path / "out"), "--config", str(cfg)])
        assert rc == 1

    def test_unknown_section_fails(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"generater": {}}))
        rc = main(["generate", "--out", str(tmp_path / "out"), "--config", str(cfg)])
        assert rc == 1


class TestSegment:
    def test_segment_and_idempotence(self, tmp_path, generated):
        seg1 = tmp_path / "seg1"
        rc = main(
            ["segment", "--corpus", str(generated / "corpus"), "--threshold-ms", "300", "--out", str(seg1)]
        )
        assert rc == 0
        seg2 = tmp_path / "seg2"
        rc = main(
            ["segment", "--corpus", str(seg1 / "corpus"), "--threshold-ms", "300", "--out", str(seg2)]
        )
        assert rc == 0
        assert dir_bytes(seg1 / "corpus") == dir_bytes(seg2 / "corpus")

    def test_missing_corpus_names_path(self, tmp_path, capsys):
        rc = main(["segment", "--corpus", str(tmp_path / "absent"), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "absent" in capsys.readouterr().err


class TestTrainPredict:
    def test_train_then_predict_reproduces_training_predictions(self, tmp_path, generated):
        cfg = train_config_file(tmp_path, generated)
        t_dir = tmp_path / "t"
        rc = main(
            ["train", "--corpus", str(generated / "corpus"), "--out", str(t_dir), "--config", cfg]
        )
        assert rc == 0
        model = t_dir / "model.json"
        assert model.exists()
        assert json.loads((t_dir / "config.json").read_text())["command"] == "train"

        p_dir = tmp_path / "p"
        rc = main(
            ["predict", "--model", str(model), "--corpus", str(generated / "corpus"), "--out", str(p_dir)]
        )
        assert rc == 0
        lines = (p_dir / "predictions.tsv").read_text().splitlines()
        assert lines[0] == "predictions/v1"
        assert lines[1] == "doc_id\tpredicted\tp_negative\tp_positive"
        assert len(lines) == 2 + 16

        # library-level re-prediction must agree bitwise with the file
        from opinionchain.archive import load_archive
        from opinionchain.corpus import load_corpus

        loaded = load_archive(model)
        for row, doc in zip(lines[2:], load_corpus(generated / "corpus")):
            doc_id, predicted, p_neg, p_pos = row.split("\t")
            label, posterior = loaded.predict_transcript(doc)
            assert doc_id == doc.doc_id
            assert predicted == loaded.label_names[label]
            assert p_neg == repr(float(posterior[0]))
            assert p_pos == repr(float(posterior[1]))

    def test_train_logreg(self, tmp_path, generated):
        cfg = train_config_file(tmp_path, generated)
        t_dir = tmp_path / "tl"
        rc = main(
            [
                "train", "--corpus", str(generated / "corpus"), "--out", str(t_dir),
                "--config", cfg, "--model", "logreg",
            ]
        )
        assert rc == 0
        doc = json.loads((t_dir / "model.json").read_text())
        assert doc["kind"] == "logreg"

    def test_predict_missing_model(self, tmp_path, generated, capsys):
        rc = main(
            [
                "predict", "--model", str(tmp_path / "no_model.json"),
                "--corpus", str(generated / "corpus"), "--out", str(tmp_path / "p"),
            ]
        )
        assert rc == 1
        assert "no_model.json" in capsys.readouterr().err

    def test_bad_feature_block_fails(self, tmp_path, generated, capsys):
        rc = main(
            [
                "train", "--corpus", str(generated / "corpus"), "--out", str(tmp_path / "t"),
                "--features", "bong,nonsense",
            ]
        )
        assert rc == 1
        assert "nonsense" in capsys.readouterr().err


class TestEvaluate:
    def test_reports_written_and_reproducible(self, tmp_path, generated):
        cfg = train_config_file(tmp_path, generated)
        outs = []
        for name in ("e1", "e2"):
            out = tmp_path / name
            rc = main(
                [
                    "evaluate", "--corpus", str(generated / "corpus"), "--out", str(out),
                    "--config", cfg, "--model", "logreg", "--folds", "2", "--seed", "3",
                ]
            )
            assert rc == 0
            outs.append(out)
        for fname in ("report.txt", "report.json", "config.json", "run.log"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
        report = json.loads((outs[0] / "report.json").read_text())
        assert report["format"] == "metrics-report/v1"
        assert len(report["folds"]) == 2
        text = (outs[0] / "report.txt").read_text()
        assert text.startswith("metrics-report/v1\n")

    def test_unlabeled_corpus_fails(self, tmp_path, capsys):
        from opinionchain.corpus import save_corpus
        from conftest import make_transcript

        docs = [make_transcript(doc_id=f"d{i}", valences=None) for i in range(4)]
        corpus_dir = tmp_path / "c"
        save_corpus(docs, corpus_dir)
        rc = main(
            ["evaluate", "--corpus", str(corpus_dir), "--out", str(tmp_path / "e")]
        )
        assert rc == 1
        assert "labeled" in capsys.readouterr().err


class TestInspect:
    def test_state_report_files(self, tmp_path, generated):
        cfg = train_config_file(tmp_path, generated)
        t_dir = tmp_path / "t"
        assert (
            main(["train", "--corpus", str(generated / "corpus"), "--out", str(t_dir), "--config", cfg])
            == 0
        )
        i_dir = tmp_path / "i"
        rc = main(
            [
                "inspect", "--model", str(t_dir / "model.json"),
                "--corpus", str(generated / "corpus"), "--out", str(i_dir), "--top-k", "3",
            ]
        )
        assert rc == 0
        text = (i_dir / "state_report.txt").read_text()
        assert text.startswith("state-report/v1\n")
        doc = json.loads((i_dir / "state_report.json").read_text())
        assert doc["format"] == "state-report/v1"
        assert len(doc["states"]) == 2

    def test_logreg_archive_rejected(self, tmp_path, generated, capsys):
        cfg = train_config_file(tmp_path, generated)
        t_dir = tmp_path / "tl"
        assert (
            main(
                [
                    "train", "--corpus", str(generated / "corpus"), "--out", str(t_dir),
                    "--config", cfg, "--model", "logreg",
                ]
            )
            == 0
        )
        rc = main(
            ["inspect", "--model", str(t_dir / "model.json"), "--out", str(tmp_path / "i")]
        )
        assert rc == 1
        assert "hcrf" in capsys.readouterr().err
