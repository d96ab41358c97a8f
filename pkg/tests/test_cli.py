import json
import subprocess
import sys

import pytest
import yaml

from offlang.cli import main
from offlang.corpus import parse_labeled_tsv

CONFIG = {
    "seed": 7,
    "heuristic": {"hi_threshold": 0.6, "lo_threshold": 0.5, "std_threshold": 0.1},
    "features": {"min_df_word": 1, "min_df_pos": 1, "min_df_char": 2},
    "synthesize": [
        {
            "id": "syn_aa",
            "n_samples": 200,
            "positive_ratio": 0.3,
            "language": "aa",
            "noise_rate": 0.05,
            "seed": 21,
            "path": "{tmp}/syn_aa.tsv",
            "split": {"ratio": 0.2, "seed": 3},
        }
    ],
    "experiments": [
        {
            "name": "gbdt_aa",
            "model": "gbdt",
            "fine_tuning": ["syn_aa_train"],
            "validation": "syn_aa_val",
            "seed": 5,
            "gbdt": {"n_rounds": 15, "max_depth": 3},
        },
        {
            "name": "tx_aa",
            "model": "transformer",
            "fine_tuning": ["syn_aa_train"],
            "validation": "syn_aa_val",
            "seed": 5,
            "transformer": {"d_model": 16, "n_heads": 2, "n_layers": 1,
                             "d_ff": 32, "max_len": 24, "dropout": 0.0},
            "training": {"learning_rate": 0.002, "epochs": 2, "batch_size": 16},
        },
    ],
    "output_dir": "{tmp}/out",
}


@pytest.fixture()
def config_path(tmp_path):
    cfg = json.loads(json.dumps(CONFIG).replace("{tmp}", str(tmp_path)))
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return str(path)


def run(argv):
    return main(argv)


class TestSynthIngest:
    def test_synth_writes_tsv(self, config_path, tmp_path, capsys):
        assert run(["synth", "-c", config_path]) == 0
        data = (tmp_path / "syn_aa.tsv").read_bytes()
        d = parse_labeled_tsv(data, "olid_labeled")
        assert len(d) == 200

    def test_ingest_prints_stats(self, config_path, tmp_path, capsys):
        assert run(["synth", "-c", config_path]) == 0
        assert run(["ingest", "-c", config_path]) == 0
        out = capsys.readouterr().out
        assert "syn_aa" in out and "Positive Ratio" in out
        assert "200" in out

    def test_ingest_missing_file_exit_2(self, config_path, capsys):
        # synth not run: the declared path does not exist yet
        code = run(["ingest", "-c", config_path])
        assert code == 2
        err = capsys.readouterr().err
        assert "syn_aa" in err

    def test_ingest_scored_uses_heuristic(self, tmp_path, capsys):
        scored = tmp_path / "scored.tsv"
        scored.write_text(
            "1\thot take\t0.72\t0.08\n2\tcool take\t0.55\t0.05\n"
            "3\tmild take\t0.55\t0.15\n4\tcalm take\t0.30\t0.20\n",
            encoding="utf-8",
        )
        cfg = {"datasets": [{"id": "sc", "path": str(scored), "format": "scored_english"}]}
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump(cfg), encoding="utf-8")
        assert run(["ingest", "-c", str(p)]) == 0
        out = capsys.readouterr().out
        assert "50.00" in out  # 2 of 4 positive under the three-rule heuristic

    def test_usage_error_exit_1(self, capsys):
        assert run(["ingest"]) == 1  # missing -c


class TestPreprocessCmd:
    def test_text_one_shot(self, capsys):
        assert run(["preprocess", "--text", "#MakeAmericaGreatAgain \U0001F525"]) == 0
        out = capsys.readouterr().out.strip()
        assert out == "Make America Great Again :fire:"

    def test_file_to_file(self, tmp_path, capsys):
        src = tmp_path / "in.tsv"
        src.write_text("1\t#Fun \U0001F525 stuff\tNOT\n", encoding="utf-8")
        dst = tmp_path / "out.tsv"
        assert run(["preprocess", "--in", str(src), "--out", str(dst)]) == 0
        d = parse_labeled_tsv(dst.read_bytes(), "olid_labeled")
        assert d.samples[0].text == "Fun :fire: stuff"


class TestExperimentCmd:
    def test_matrix_reports_and_determinism(self, config_path, tmp_path, capsys):
        assert run(["synth", "-c", config_path]) == 0
        assert run(["--quiet", "experiment", "-c", config_path]) == 0
        out_dir = tmp_path / "out"
        md = (out_dir / "report.md").read_text(encoding="utf-8")
        csv1 = (out_dir / "report.csv").read_bytes()
        assert "gbdt" in md and "transformer" in md
        assert md.count("*") == 1  # one best row
        # rerun: byte-identical csv
        assert run(["--quiet", "experiment", "-c", config_path]) == 0
        csv2 = (out_dir / "report.csv").read_bytes()
        assert csv1 == csv2

    def test_empty_matrix_usage_error(self, tmp_path, capsys):
        p = tmp_path / "c.yaml"
        p.write_text(yaml.safe_dump({"synthesize": [], "experiments": []}), encoding="utf-8")
        assert run(["experiment", "-c", str(p)]) == 1


class TestTrainEvalPredict:
    def test_full_cycle(self, config_path, tmp_path, capsys):
        assert run(["synth", "-c", config_path]) == 0
        model_path = tmp_path / "model.bin"
        assert run(["--quiet", "train", "-c", config_path, "--experiment", "gbdt_aa",
                    "--out", str(model_path)]) == 0
        assert model_path.exists()

        assert run(["evaluate", "--model", str(model_path),
                    "--in", str(tmp_path / "syn_aa.tsv")]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["f1_positive"] > 0.7

        preds_path = tmp_path / "preds.tsv"
        assert run(["predict", "--model", str(model_path),
                    "--in", str(tmp_path / "syn_aa.tsv"), "--out", str(preds_path)]) == 0
        lines = preds_path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 200
        assert all(l.split("\t")[1] in ("OFF", "NOT") for l in lines)

    def test_predict_output_reingestable(self, config_path, tmp_path, capsys):
        run(["synth", "-c", config_path])
        model_path = tmp_path / "model.bin"
        run(["--quiet", "train", "-c", config_path, "--experiment", "gbdt_aa",
             "--out", str(model_path)])
        preds_path = tmp_path / "p.tsv"
        run(["predict", "--model", str(model_path),
             "--in", str(tmp_path / "syn_aa.tsv"), "--out", str(preds_path)])
        # id<TAB>label has no text column; graft the ids onto dummy text
        rows = [l.split("\t") for l in preds_path.read_text().strip().split("\n")]
        tsv = "".join("%s\tplaceholder text\t%s\n" % (r[0], r[1]) for r in rows)
        d = parse_labeled_tsv(tsv, "olid_labeled")
        assert len(d) == 200

    def test_unknown_experiment_exit_1(self, config_path, tmp_path):
        run(["synth", "-c", config_path])
        assert run(["train", "-c", config_path, "--experiment", "nope",
                    "--out", str(tmp_path / "m.bin")]) == 1

    def test_predict_empty_input_empty_output(self, config_path, tmp_path, capsys):
        run(["synth", "-c", config_path])
        model_path = tmp_path / "model.bin"
        run(["--quiet", "train", "-c", config_path, "--experiment", "gbdt_aa",
             "--out", str(model_path)])
        empty = tmp_path / "empty.tsv"
        empty.write_text("", encoding="utf-8")
        out = tmp_path / "preds_empty.tsv"
        assert run(["predict", "--model", str(model_path),
                    "--in", str(empty), "--out", str(out)]) == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_model_format_mismatch_exit_2(self, config_path, tmp_path, capsys):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"garbage not a model")
        assert run(["predict", "--model", str(bad),
                    "--in", str(tmp_path / "nothing.tsv"), "--out",
                    str(tmp_path / "o.tsv")]) == 2


class TestFeaturize:
    def test_writes_three_tfidf_models(self, config_path, tmp_path, capsys):
        run(["synth", "-c", config_path])
        out_dir = tmp_path / "feat"
        assert run(["--quiet", "featurize", "-c", config_path,
                    "--dataset", "syn_aa_train", "--out", str(out_dir)]) == 0
        from offlang.serialize import load_model

        for fam in ("word", "pos", "char"):
            model = load_model((out_dir / ("tfidf_%s.bin" % fam)).read_bytes())
            assert model.n_cols > 0

    def test_unknown_dataset_exit_1(self, config_path, tmp_path):
        run(["synth", "-c", config_path])
        assert run(["featurize", "-c", config_path, "--dataset", "nope",
                    "--out", str(tmp_path / "f")]) == 1


class TestTransformerCycle:
    def test_train_and_predict(self, config_path, tmp_path, capsys):
        run(["synth", "-c", config_path])
        model_path = tmp_path / "tx.bin"
        assert run(["--quiet", "train", "-c", config_path, "--experiment", "tx_aa",
                    "--out", str(model_path)]) == 0
        preds_path = tmp_path / "tx_preds.tsv"
        assert run(["predict", "--model", str(model_path),
                    "--in", str(tmp_path / "syn_aa.tsv"), "--out", str(preds_path)]) == 0
        lines = preds_path.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 200


class TestResourceOverride:
    def test_env_var_swaps_resources(self, tmp_path, monkeypatch, capsys):
        res_dir = tmp_path / "res"
        res_dir.mkdir()
        import shutil

        from offlang.resources import ENV_VAR, load_default_resources

        bundled = load_default_resources()
        src = __import__("importlib.resources", fromlist=["files"]).files("offlang") / "data"
        for name in ("emoji_table.tsv", "segmenter_words.txt", "pos_lexicon.tsv",
                     "sentiment_lexicon.tsv", "negators.txt", "intensifiers.tsv"):
            shutil.copy(str(src / name), res_dir / name)
        (res_dir / "segmenter_words.txt").write_text("zzzword\n", encoding="utf-8")
        monkeypatch.setenv(ENV_VAR, str(res_dir))
        swapped = load_default_resources()
        assert swapped.seg_lexicon.words == {"zzzword"}
        assert swapped.emoji_table.mapping == bundled.emoji_table.mapping


class TestEntryPoint:
    def test_console_script_help(self):
        out = subprocess.run(
            [sys.executable, "-m", "offlang.cli", "--help"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert "ingest" in out.stdout and "experiment" in out.stdout
