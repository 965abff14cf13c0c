import json

import pytest

from tweetgeo.cli import main
from tweetgeo.synth import SynthSpec, write_corpus
from tweetgeo.textproc import load_vocab
from tweetgeo.train import load_stack_model


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    spec = SynthSpec(n_cities=4, n_countries=2, n_users=420, seed=21)
    write_corpus(spec, root / "raw.jsonl", root / "cities.csv")
    return root


@pytest.fixture(scope="module")
def prep_dir(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("prep")
    rc = main(["prepare", "--data", str(corpus_dir / "raw.jsonl"),
               "--city-table", str(corpus_dir / "cities.csv"),
               "--out-dir", str(out), "--seed", "4",
               "--test-fraction", "0.2", "--dev-users", "60", "--min-count", "3"])
    assert rc == 0
    return out


CNN_FLAGS = ["--embed-dim", "16", "--windows", "2,3", "--filters", "8",
             "--batch-size", "32", "--max-epochs", "6", "--patience", "3",
             "--max-len-text", "10", "--max-len-user-description", "10",
             "--max-len-profile-location", "4", "--max-len-user-name", "3"]


@pytest.fixture(scope="module")
def cnn_bundle(prep_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    rc = main(["train", "--prep-dir", str(prep_dir), "--task", "city",
               "--model", "cnn", "--out", str(out / "cnn.gtlm"),
               "--log", str(out / "log.csv"), "--seed", "1"] + CNN_FLAGS)
    assert rc == 0
    return out / "cnn.gtlm"


def test_prepare_outputs_exist(prep_dir):
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl", "vocab.txt",
                 "category_maps.json", "cities.csv", "stats.csv"):
        assert (prep_dir / name).exists()
    stats = dict(line.split(",") for line in
                 (prep_dir / "stats.csv").read_text().splitlines()[1:])
    assert stats["n_cities"] == "4"
    assert int(stats["n_tweets"]) == 420   # one tweet per user after dedup


def test_prepare_rerun_is_byte_identical(corpus_dir, prep_dir, tmp_path):
    rc = main(["prepare", "--data", str(corpus_dir / "raw.jsonl"),
               "--city-table", str(corpus_dir / "cities.csv"),
               "--out-dir", str(tmp_path), "--seed", "4",
               "--test-fraction", "0.2", "--dev-users", "60", "--min-count", "3"])
    assert rc == 0
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl", "vocab.txt", "stats.csv"):
        assert (tmp_path / name).read_bytes() == (prep_dir / name).read_bytes()


def test_prepare_missing_city_table_errors(corpus_dir, tmp_path):
    rc = main(["prepare", "--data", str(corpus_dir / "raw.jsonl"),
               "--city-table", str(corpus_dir / "nope.csv"),
               "--out-dir", str(tmp_path)])
    assert rc == 2


def test_usage_error_exit_code():
    assert main(["train"]) == 1            # missing required flags
    assert main(["frobnicate"]) == 1       # unknown command
    assert main(["--help"]) == 0


def test_train_cnn_writes_bundle_and_monotone_log(cnn_bundle):
    assert cnn_bundle.exists()
    log = (cnn_bundle.parent / "log.csv").read_text().splitlines()
    assert log[0] == "epoch,train_loss,dev_accuracy,best_dev_accuracy"
    best = [float(line.split(",")[3]) for line in log[1:]]
    assert best == sorted(best)


def test_train_rejects_bad_dropout(prep_dir, tmp_path):
    rc = main(["train", "--prep-dir", str(prep_dir), "--task", "city",
               "--model", "cnn", "--out", str(tmp_path / "x.gtlm"),
               "--dropout", "1.5"] + CNN_FLAGS)
    assert rc == 1


def test_train_stacking_plus_reduces_vocab(prep_dir, tmp_path):
    rc = main(["train", "--prep-dir", str(prep_dir), "--task", "city",
               "--model", "stacking+", "--igr-top-percent", "40",
               "--min-count", "3", "--out", str(tmp_path / "s.gtlm")])
    assert rc == 0
    loaded = load_stack_model(tmp_path / "s.gtlm")
    assert loaded.model.igr_percent == 40.0
    full_vocab = load_vocab(prep_dir / "vocab.txt")
    reduced = loaded.model.base_vocabs["text"]
    # text-base vocabulary was IGR-selected down to ~40% of its own tokens
    assert 0 < len(reduced.content_tokens) < len(full_vocab.content_tokens)


def test_eval_city_reports(cnn_bundle, prep_dir, tmp_path):
    rc = main(["eval", "--model-file", str(cnn_bundle),
               "--test", str(prep_dir / "test.jsonl"), "--out-dir", str(tmp_path)])
    assert rc == 0
    summary = dict(line.split(",") for line in
                   (tmp_path / "metrics_summary.csv").read_text().splitlines()[1:])
    assert {"accuracy", "acc_top5", "acc_at_161", "median_error_km"} <= set(summary)
    assert float(summary["accuracy"]) <= float(summary["acc_top5"])
    assert (tmp_path / "per_class_pr.csv").exists()
    assert (tmp_path / "calibration.csv").exists()


def test_eval_country_omits_distance_metrics(prep_dir, tmp_path):
    rc = main(["train", "--prep-dir", str(prep_dir), "--task", "country",
               "--model", "stacking", "--min-count", "3",
               "--out", str(tmp_path / "c.gtlm")])
    assert rc == 0
    rc = main(["eval", "--model-file", str(tmp_path / "c.gtlm"),
               "--test", str(prep_dir / "test.jsonl"), "--out-dir", str(tmp_path / "rep")])
    assert rc == 0
    summary = (tmp_path / "rep" / "metrics_summary.csv").read_text()
    assert "acc_at_161" not in summary and "median_error_km" not in summary


def test_eval_twice_is_byte_identical(cnn_bundle, prep_dir, tmp_path):
    for d in ("r1", "r2"):
        rc = main(["eval", "--model-file", str(cnn_bundle),
                   "--test", str(prep_dir / "test.jsonl"),
                   "--out-dir", str(tmp_path / d)])
        assert rc == 0
    for name in ("metrics_summary.csv", "per_class_pr.csv", "calibration.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_eval_task_mismatch_errors(cnn_bundle, prep_dir, tmp_path):
    rc = main(["eval", "--model-file", str(cnn_bundle), "--task", "country",
               "--test", str(prep_dir / "test.jsonl"), "--out-dir", str(tmp_path)])
    assert rc == 2


def test_predict_accounting_and_min_prob(cnn_bundle, prep_dir, tmp_path, capsys):
    test_file = prep_dir / "test.jsonl"
    n_rows = len(test_file.read_text().splitlines())
    out = tmp_path / "preds.jsonl"
    rc = main(["predict", "--model-file", str(cnn_bundle),
               "--input", str(test_file), "--out", str(out)])
    assert rc == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(rows) == n_rows   # all parse, none filtered
    for r in rows[:5]:
        assert len(r["ranked_labels"]) == 4   # only 4 city labels exist
        assert r["top_prob"] == pytest.approx(max(r["ranked_probs"]))

    rc = main(["predict", "--model-file", str(cnn_bundle),
               "--input", str(test_file), "--out", str(tmp_path / "high.jsonl"),
               "--min-prob", "0.9"])
    assert rc == 0
    kept = [json.loads(l) for l in (tmp_path / "high.jsonl").read_text().splitlines()]
    assert all(r["top_prob"] >= 0.9 for r in kept)
    assert len(kept) <= n_rows


def test_predict_handles_malformed_and_empty(cnn_bundle, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"user_id": "u1", "text": "hi"}\nnot-json\n')
    out = tmp_path / "o.jsonl"
    rc = main(["predict", "--model-file", str(cnn_bundle), "--input", str(bad),
               "--out", str(out)])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 1   # one row skipped, one written

    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    rc = main(["predict", "--model-file", str(cnn_bundle), "--input", str(empty),
               "--out", str(tmp_path / "eo.jsonl")])
    assert rc == 0
    assert (tmp_path / "eo.jsonl").read_text() == ""


def test_config_file_preloads_defaults(corpus_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("test_fraction=0.2\ndev_users=60\nmin_count=3\nseed=4\n")
    rc = main(["--config", str(cfg), "prepare",
               "--data", str(corpus_dir / "raw.jsonl"),
               "--city-table", str(corpus_dir / "cities.csv"),
               "--out-dir", str(tmp_path / "p")])
    assert rc == 0
    # flag still wins over the config file
    rc = main(["--config", str(cfg), "prepare",
               "--data", str(corpus_dir / "raw.jsonl"),
               "--city-table", str(corpus_dir / "cities.csv"),
               "--out-dir", str(tmp_path / "p2"), "--dev-users", "50"])
    assert rc == 0
    assert (tmp_path / "p" / "dev.jsonl").read_text() != \
        (tmp_path / "p2" / "dev.jsonl").read_text()


def test_help_documents_all_defaults(capsys):
    assert main(["train", "--help"]) == 0
    text = capsys.readouterr().out
    for needle in ("1024", "0.5", "128", "3,4,5", "0.001", "0.01", "10"):
        assert needle in text
