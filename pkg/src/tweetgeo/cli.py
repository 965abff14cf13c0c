"""Command-line pipelines: prepare / train / eval / predict.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal error. A config file of key=value lines can preload any flag
default; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import bayes, bundle as bundle_io, geo, ingest, metrics, textproc
from .cnn import CnnConfig, DEFAULT_MAX_LENS, encode_features, predict_proba
from .encode import CategoryMaps, build_category_maps
from .errors import DataError
from .labels import TASK_CITY, TASK_COUNTRY, city_labels, country_labels
from .train import (TrainConfig, load_model, load_stack_model, save_model,
                    save_stack_model, train, write_train_log)

IGR_DEFAULTS = {TASK_CITY: 40.0, TASK_COUNTRY: 55.0}


def _windows_arg(s: str) -> tuple:
    return tuple(int(x) for x in str(s).split(","))


def _bool_arg(s) -> bool:
    if isinstance(s, bool):
        return s
    if str(s).lower() in ("1", "true", "yes"):
        return True
    if str(s).lower() in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {s!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tweetgeo",
        description="Geolocation of short messages at country or city level.")
    parser.add_argument("--config", help="key=value file preloading flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    p = sub.add_parser("prepare", help="filter, dedup, assign cities, split, build vocab/maps")
    p.add_argument("--data", required=True, help="raw JSONL corpus")
    p.add_argument("--city-table", required=True, help="city CSV (id,name,lat,lon,country,population)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.10,
                   help="fraction of users held out for test (default 0.10)")
    p.add_argument("--dev-users", type=int, default=50_000,
                   help="users whose tweets form the dev set (default 50000)")
    p.add_argument("--min-count", type=int, default=10,
                   help="vocabulary frequency cutoff (default 10)")
    p.set_defaults(func=cmd_prepare)
    commands["prepare"] = p

    p = sub.add_parser("train", help="train a model on a prepared directory")
    p.add_argument("--prep-dir", required=True, help="output directory of `prepare`")
    p.add_argument("--task", required=True, choices=(TASK_COUNTRY, TASK_CITY))
    p.add_argument("--model", required=True, choices=("cnn", "stacking", "stacking+"))
    p.add_argument("--out", required=True, help="model bundle path")
    p.add_argument("--log", help="per-epoch training log CSV (cnn only)")
    p.add_argument("--seed", type=int, default=0, help="training seed (default 0)")
    p.add_argument("--embed-dim", type=int, default=300,
                   help="word vector dimension (default 300)")
    p.add_argument("--windows", type=_windows_arg, default=(3, 4, 5),
                   help="comma-separated filter window sizes (default 3,4,5)")
    p.add_argument("--filters", type=int, default=128,
                   help="filters per window size (default 128)")
    p.add_argument("--dropout", type=float, default=0.5,
                   help="dropout rate on the pooled vector (default 0.5)")
    p.add_argument("--batch-size", type=int, default=1024,
                   help="mini-batch size (default 1024)")
    p.add_argument("--lr", type=float, default=1e-3,
                   help="Adam learning rate (default 0.001)")
    p.add_argument("--max-epochs", type=int, default=20,
                   help="epoch budget (default 20)")
    p.add_argument("--patience", type=int, default=3,
                   help="dev evaluations without improvement before stopping (default 3)")
    p.add_argument("--share-filters", type=_bool_arg, default=True,
                   help="apply one filter bank to all four text fields (default true)")
    for f, n in DEFAULT_MAX_LENS.items():
        p.add_argument(f"--max-len-{f.replace('_', '-')}", type=int, default=n,
                       help=f"token budget for the {f} field (default {n})")
    p.add_argument("--vectors", help="pretrained embedding text file ('<count> <dim>' header)")
    p.add_argument("--alpha", type=float, default=1e-2,
                   help="naive Bayes additive smoothing (default 0.01)")
    p.add_argument("--folds", type=int, default=5, help="stacking folds (default 5)")
    p.add_argument("--igr-top-percent", type=float, default=None,
                   help="stacking+: keep this %% of tokens by information gain ratio "
                        "(default 40 for city, 55 for country)")
    p.add_argument("--min-count", type=int, default=10,
                   help="frequency cutoff for stacking base vocabularies (default 10)")
    p.set_defaults(func=cmd_train)
    commands["train"] = p

    p = sub.add_parser("eval", help="score a model bundle on a labeled test split")
    p.add_argument("--model-file", required=True)
    p.add_argument("--test", required=True, help="labeled test JSONL")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--task", choices=(TASK_COUNTRY, TASK_CITY),
                   help="cross-check against the bundle's task")
    p.set_defaults(func=cmd_eval)
    commands["eval"] = p

    p = sub.add_parser("predict", help="rank locations for unlabeled JSONL records")
    p.add_argument("--model-file", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-prob", type=float, default=None,
                   help="drop predictions whose winning probability is below this")
    p.set_defaults(func=cmd_predict)
    commands["predict"] = p
    return parser, commands


def _load_config_file(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataError(f"{path}:{ln}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config_defaults(commands: dict, overrides: dict):
    for sp in commands.values():
        typed = {}
        for action in sp._actions:
            if action.dest in overrides:
                raw = overrides[action.dest]
                typed[action.dest] = action.type(raw) if action.type else raw
        if typed:
            sp.set_defaults(**typed)


# ---------------------------------------------------------------------------
# commands

def _say(*parts):
    print(*parts)


def cmd_prepare(ns) -> int:
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = geo.load_city_table(ns.city_table)
    records, skipped = ingest.read_jsonl(ns.data)
    if not records:
        raise DataError(f"{ns.data}: no usable records")
    geo.assign_cities(records, table)
    deduped = ingest.dedup_user_city(records, seed=ns.seed)
    spec = ingest.SplitSpec(test_user_fraction=ns.test_fraction,
                            dev_user_count=ns.dev_users, seed=ns.seed)
    train_recs, dev_recs, test_recs = ingest.split_by_user(deduped, spec)

    ingest.write_jsonl(train_recs, out / "train.jsonl")
    ingest.write_jsonl(dev_recs, out / "dev.jsonl")
    ingest.write_jsonl(test_recs, out / "test.jsonl")
    geo.save_city_table(table, out / "cities.csv")

    streams = (textproc.tokenize(getattr(r, f))
               for r in train_recs for f in ("text", "user_description", "profile_location"))
    vocab = textproc.build_vocab(streams, min_count=ns.min_count)
    textproc.save_vocab(vocab, out / "vocab.txt")

    maps = build_category_maps(train_recs)
    (out / "category_maps.json").write_text(
        json.dumps(maps.value_lists(), ensure_ascii=False, sort_keys=True, indent=1),
        encoding="utf-8")

    stats = ingest.dataset_stats(deduped)
    with open(out / "stats.csv", "w", encoding="utf-8") as f:
        f.write("stat,value\n")
        for k, v in vars(stats).items():
            f.write(f"{k},{v!r}\n")
    _say(f"prepare: {len(records)} parsed (+{skipped} skipped), {len(deduped)} after dedup -> "
         f"train {len(train_recs)} / dev {len(dev_recs)} / test {len(test_recs)}; "
         f"vocab {len(vocab)}")
    return 0


def _load_prep(prep_dir):
    prep = Path(prep_dir)
    for name in ("train.jsonl", "dev.jsonl", "vocab.txt", "category_maps.json", "cities.csv"):
        if not (prep / name).exists():
            raise DataError(f"{prep / name} missing; run `tweetgeo prepare` first")
    train_recs, _ = ingest.read_jsonl(prep / "train.jsonl")
    dev_recs, _ = ingest.read_jsonl(prep / "dev.jsonl")
    vocab = textproc.load_vocab(prep / "vocab.txt")
    maps = CategoryMaps.from_value_lists(
        json.loads((prep / "category_maps.json").read_text(encoding="utf-8")))
    table = geo.load_city_table(prep / "cities.csv")
    return train_recs, dev_recs, vocab, maps, table


def cmd_train(ns) -> int:
    train_recs, dev_recs, vocab, maps, table = _load_prep(ns.prep_dir)
    labels = city_labels(table) if ns.task == TASK_CITY else country_labels(train_recs)

    if ns.model == "cnn":
        ccfg = CnnConfig(
            embed_dim=ns.embed_dim,
            windows=ns.windows,
            filters_per_window=ns.filters,
            dropout_rate=ns.dropout,
            max_lens={f: getattr(ns, f"max_len_{f}") for f in DEFAULT_MAX_LENS},
            label_count=len(labels),
            share_filters=ns.share_filters,
        )
        tcfg = TrainConfig(batch_size=ns.batch_size, max_epochs=ns.max_epochs,
                           patience=ns.patience, seed=ns.seed, lr=ns.lr)
        train_feats = encode_features(train_recs, vocab, maps, ccfg,
                                      labels.label_array(train_recs))
        dev_feats = encode_features(dev_recs, vocab, maps, ccfg,
                                    labels.label_array(dev_recs))
        result = train(train_feats, dev_feats, ccfg, tcfg, len(vocab), maps.block_size,
                       vectors_path=ns.vectors, vocab=vocab)
        save_model(result.model, vocab, maps, labels, ns.out)
        if ns.log:
            write_train_log(ns.log, result.log)
        _say(f"train: cnn task={ns.task} best dev acc {result.best_dev_accuracy:.4f} "
             f"at epoch {result.best_epoch}; bundle -> {ns.out}")
    else:
        igr = ns.igr_top_percent
        if ns.model == "stacking+" and igr is None:
            igr = IGR_DEFAULTS[ns.task]
        if ns.model == "stacking":
            igr = None
        y = labels.label_array(train_recs)
        if np.any(y < 0):
            raise DataError("training records with labels outside the label table")
        model = bayes.fit_stacking(train_recs, y, len(labels), folds=ns.folds,
                                   alpha=ns.alpha, igr_percent=igr, min_count=ns.min_count)
        save_stack_model(model, labels, ns.out)
        _say(f"train: {ns.model} task={ns.task} folds={ns.folds} "
             f"igr={igr if igr is not None else '-'}; bundle -> {ns.out}")
    return 0


def _load_any(path):
    model_type, _ = bundle_io.read_sections(path)
    if model_type == "cnn":
        return "cnn", load_model(path)
    if model_type == "stack":
        return "stack", load_stack_model(path)
    raise DataError(f"{path}: unknown model type {model_type!r}")


def _probabilities(kind, b, records) -> np.ndarray:
    if kind == "cnn":
        feats = encode_features(records, b.vocab, b.maps, b.model.config)
        return predict_proba(b.model, feats)
    return bayes.posterior_stacking(b.model, records)


def cmd_eval(ns) -> int:
    kind, b = _load_any(ns.model_file)
    if ns.task and ns.task != b.labels.task:
        raise DataError(f"bundle was trained for task {b.labels.task!r}, not {ns.task!r}")
    records, skipped = ingest.read_jsonl(ns.test)
    if not records:
        raise DataError(f"{ns.test}: no usable records")
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    probs = _probabilities(kind, b, records)
    preds = []
    for r, p in zip(records, probs):
        ranked = metrics.ranked_top5(p)
        preds.append(metrics.Prediction(
            true_label=b.labels.record_label(r),
            ranked_labels=ranked,
            top_prob=float(p[ranked[0]]),
            true_coords=(r.lat, r.lon),
        ))

    rows = [("n_test", float(len(preds))), ("skipped", float(skipped)),
            ("accuracy", metrics.accuracy(preds)), ("acc_top5", metrics.acc_top5(preds))]
    if b.labels.task == TASK_CITY:
        coords = b.labels.coords_array()
        rows.append(("acc_at_161", metrics.acc_at_161(preds, coords)))
        rows.append(("median_error_km", metrics.median_error_km(preds, coords)))
    metrics.write_metrics_summary(out / "metrics_summary.csv", rows)
    metrics.write_per_class_pr(out / "per_class_pr.csv",
                               metrics.per_class_pr(preds, len(b.labels)),
                               label_names=b.labels.values)
    metrics.write_calibration(out / "calibration.csv", metrics.calibration_bins(preds))
    _say("eval: " + "  ".join(f"{k}={v:.4f}" for k, v in rows))
    return 0


def cmd_predict(ns) -> int:
    kind, b = _load_any(ns.model_file)
    written = filtered = skipped = 0
    with open(ns.input, encoding="utf-8") as fin, \
            open(ns.out, "w", encoding="utf-8") as fout:
        batch = []
        for line in fin:
            if not line.strip():
                continue
            try:
                batch.append(ingest.parse_record(line, require_coords=False))
            except ingest.RecordSkip:
                skipped += 1
        if batch:
            probs = _probabilities(kind, b, batch)
            for r, p in zip(batch, probs):
                ranked = metrics.ranked_top5(p)
                top = float(p[ranked[0]])
                if ns.min_prob is not None and top < ns.min_prob:
                    filtered += 1
                    continue
                fout.write(json.dumps({
                    "user_id": r.user_id,
                    "ranked_labels": [b.labels.values[i] for i in ranked],
                    "ranked_probs": [float(p[i]) for i in ranked],
                    "top_prob": top,
                }, ensure_ascii=False, sort_keys=True) + "\n")
                written += 1
    _say(f"predict: {written} written, {filtered} below min-prob, {skipped} skipped")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser, commands = build_parser()
    try:
        if known.config:
            _apply_config_defaults(commands, _load_config_file(known.config))
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        return ns.func(ns)
    except (DataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
