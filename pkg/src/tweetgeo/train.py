"""Mini-batch training with per-epoch dev evaluation, early stopping on dev
accuracy, and lossless model-bundle serialization.

Everything random (shuffles, dropout masks) is derived by hashing the run
seed with the epoch or step counter, so a rerun with the same seed is
bit-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bundle as bundle_io
from .bayes import StackModel, MnbModel, BASE_FIELDS
from .cnn import CnnConfig, CnnModel, FeatureBatch, backward, forward, predict_proba
from .cnn import init_model, load_pretrained_embeddings
from .encode import CategoryMaps
from .errors import BundleError, DataError
from .labels import LabelTable
from .nncore import AdamState, adam_step, cross_entropy_batch
from .textproc import Vocabulary


def _mix(*parts) -> int:
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


@dataclass
class TrainConfig:
    batch_size: int = 1024
    max_epochs: int = 20
    patience: int = 3
    seed: int = 0
    eval_every: int = 1
    lr: float = 1e-3

    def __post_init__(self):
        if self.batch_size < 1 or self.patience < 1 or self.eval_every < 1:
            raise ValueError("batch_size, patience and eval_every must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    dev_accuracy: float
    best_dev_accuracy: float


@dataclass
class TrainResult:
    model: CnnModel
    log: list
    best_epoch: int
    best_dev_accuracy: float


def _dev_accuracy(model: CnnModel, dev: FeatureBatch) -> float:
    probs = predict_proba(model, dev)
    return float(np.mean(np.argmax(probs, axis=1) == dev.labels))


def train(train_feats: FeatureBatch, dev_feats: FeatureBatch, ccfg: CnnConfig,
          tcfg: TrainConfig, vocab_size: int, cat_block_size: int,
          vectors_path=None, vocab: Optional[Vocabulary] = None) -> TrainResult:
    """Train a freshly initialized model; keep the parameters of the epoch
    with the best dev accuracy and stop once `patience` evaluations pass
    without improvement."""
    if train_feats.size == 0:
        raise DataError("empty training split")
    if dev_feats.size == 0:
        raise DataError("empty dev split; early stopping needs one")
    if train_feats.labels is None or dev_feats.labels is None:
        raise ValueError("feature batches must carry labels")

    model = init_model(ccfg, vocab_size, cat_block_size, seed=tcfg.seed)
    if vectors_path is not None:
        load_pretrained_embeddings(model, vectors_path, vocab)
    states = {name: AdamState.for_param(p, lr=tcfg.lr) for name, p in model.params().items()}

    best = {name: p.copy() for name, p in model.params().items()}
    best_acc, best_epoch, stale = -1.0, 0, 0
    log: list[EpochLog] = []
    step = 0
    for epoch in range(1, tcfg.max_epochs + 1):
        order = np.random.default_rng(_mix(tcfg.seed, "shuffle", epoch)).permutation(train_feats.size)
        losses = []
        for s in range(0, len(order), tcfg.batch_size):
            batch = train_feats.take(order[s:s + tcfg.batch_size])
            fwd = forward(model, batch, train=True, dropout_seed=_mix(tcfg.seed, "dropout", step))
            losses.append(cross_entropy_batch(fwd.probs, batch.labels))
            grads = backward(model, fwd, batch.labels)
            for name, p in model.params().items():
                adam_step(p, grads[name], states[name])
            step += 1
        if epoch % tcfg.eval_every != 0 and epoch != tcfg.max_epochs:
            log.append(EpochLog(epoch, float(np.mean(losses)), float("nan"), best_acc))
            continue
        dev_acc = _dev_accuracy(model, dev_feats)
        if dev_acc > best_acc:
            best_acc, best_epoch, stale = dev_acc, epoch, 0
            best = {name: p.copy() for name, p in model.params().items()}
        else:
            stale += 1
        log.append(EpochLog(epoch, float(np.mean(losses)), dev_acc, best_acc))
        if stale >= tcfg.patience:
            break
    for name, p in best.items():
        model.set_param(name, p)
    return TrainResult(model, log, best_epoch, best_acc)


def write_train_log(path, log: list):
    with open(path, "w", encoding="utf-8") as f:
        f.write("epoch,train_loss,dev_accuracy,best_dev_accuracy\n")
        for row in log:
            f.write(f"{row.epoch},{row.train_loss!r},{row.dev_accuracy!r},"
                    f"{row.best_dev_accuracy!r}\n")


# ---------------------------------------------------------------------------
# model bundles

@dataclass
class CnnBundle:
    model: CnnModel
    vocab: Vocabulary
    maps: CategoryMaps
    labels: LabelTable


def _vocab_bytes(vocab: Vocabulary) -> bytes:
    lines = [f"min_count={vocab.min_count}", f"size={len(vocab)}"] + vocab.index_to_token
    return ("\n".join(lines) + "\n").encode("utf-8")


def _vocab_from_bytes(payload: bytes) -> Vocabulary:
    lines = payload.decode("utf-8").split("\n")
    min_count = int(lines[0].removeprefix("min_count="))
    size = int(lines[1].removeprefix("size="))
    return Vocabulary(lines[2:2 + size], min_count=min_count)


def _labels_json(labels: LabelTable) -> dict:
    return {"task": labels.task, "values": labels.values, "coords": labels.coords}


def _labels_from_json(obj) -> LabelTable:
    coords = obj.get("coords")
    return LabelTable(obj["task"], obj["values"],
                      coords=None if coords is None else [tuple(c) for c in coords])


def save_model(model: CnnModel, vocab: Vocabulary, maps: CategoryMaps,
               labels: LabelTable, path):
    """Write a CNN bundle; load_model(save_model(...)) is bit-exact."""
    cfg = model.config
    config = {
        "embed_dim": cfg.embed_dim,
        "windows": list(cfg.windows),
        "filters_per_window": cfg.filters_per_window,
        "dropout_rate": cfg.dropout_rate,
        "max_lens": cfg.max_lens,
        "label_count": cfg.label_count,
        "share_filters": cfg.share_filters,
        "cat_block_size": model.cat_block_size,
        "vocab_size": model.vocab_size,
    }
    sections = [
        ("config", bundle_io.encode_json(config)),
        ("vocabulary", _vocab_bytes(vocab)),
        ("category_maps", bundle_io.encode_json(maps.value_lists())),
        ("label_table", bundle_io.encode_json(_labels_json(labels))),
    ]
    for name, p in model.params().items():
        sections.append((f"tensor:{name}", bundle_io.encode_tensor(p)))
    bundle_io.write_sections(path, "cnn", sections)


def load_model(path) -> CnnBundle:
    model_type, sections = bundle_io.read_sections(path)
    if model_type != "cnn":
        raise BundleError(f"{path}: expected a cnn bundle, found {model_type!r}")
    for required in ("config", "vocabulary", "category_maps", "label_table"):
        if required not in sections:
            raise BundleError(f"{path}: bundle lacks section {required!r}")
    cfgj = bundle_io.decode_json(sections["config"], "config")
    cfg = CnnConfig(
        embed_dim=cfgj["embed_dim"],
        windows=tuple(cfgj["windows"]),
        filters_per_window=cfgj["filters_per_window"],
        dropout_rate=cfgj["dropout_rate"],
        max_lens=cfgj["max_lens"],
        label_count=cfgj["label_count"],
        share_filters=cfgj["share_filters"],
    )
    vocab = _vocab_from_bytes(sections["vocabulary"])
    maps = CategoryMaps.from_value_lists(bundle_io.decode_json(sections["category_maps"]))
    labels = _labels_from_json(bundle_io.decode_json(sections["label_table"]))
    if len(labels) != cfg.label_count:
        raise BundleError(f"{path}: label table size {len(labels)} != model "
                          f"label count {cfg.label_count}")
    if maps.block_size != cfgj["cat_block_size"]:
        raise BundleError(f"{path}: category maps do not match the stored block size")

    model = init_model(cfg, cfgj["vocab_size"], cfgj["cat_block_size"], seed=0)
    expected = model.params()
    for name, init_value in expected.items():
        key = f"tensor:{name}"
        if key not in sections:
            raise BundleError(f"{path}: bundle lacks tensor {name!r}")
        t = bundle_io.decode_tensor(sections[key], name)
        if t.shape != init_value.shape:
            raise BundleError(f"{path}: tensor {name} has shape {t.shape}, "
                              f"expected {init_value.shape}")
        model.set_param(name, t.astype(np.float32))
    if len(vocab) != model.vocab_size:
        raise BundleError(f"{path}: vocabulary size {len(vocab)} != embedding rows")
    return CnnBundle(model, vocab, maps, labels)


@dataclass
class StackBundle:
    model: StackModel
    labels: LabelTable


def save_stack_model(model: StackModel, labels: LabelTable, path):
    config = {
        "label_count": model.label_count,
        "folds": model.folds,
        "alpha": model.alpha,
        "igr_percent": model.igr_percent,
    }
    sections = [
        ("config", bundle_io.encode_json(config)),
        ("label_table", bundle_io.encode_json(_labels_json(labels))),
    ]
    for b in BASE_FIELDS:
        sections.append((f"vocab:{b}", _vocab_bytes(model.base_vocabs[b])))
        sections.append((f"tensor:{b}:prior", bundle_io.encode_tensor(model.bases[b].class_log_prior)))
        sections.append((f"tensor:{b}:log_prob", bundle_io.encode_tensor(model.bases[b].feature_log_prob)))
    sections.append(("tensor:meta:prior", bundle_io.encode_tensor(model.meta.class_log_prior)))
    sections.append(("tensor:meta:log_prob", bundle_io.encode_tensor(model.meta.feature_log_prob)))
    bundle_io.write_sections(path, "stack", sections)


def load_stack_model(path) -> StackBundle:
    model_type, sections = bundle_io.read_sections(path)
    if model_type != "stack":
        raise BundleError(f"{path}: expected a stack bundle, found {model_type!r}")
    cfg = bundle_io.decode_json(sections["config"], "config")
    labels = _labels_from_json(bundle_io.decode_json(sections["label_table"]))
    if len(labels) != cfg["label_count"]:
        raise BundleError(f"{path}: label table size != stored label count")

    def mnb(tag: str) -> MnbModel:
        prior = bundle_io.decode_tensor(sections[f"tensor:{tag}:prior"], tag)
        log_prob = bundle_io.decode_tensor(sections[f"tensor:{tag}:log_prob"], tag)
        if log_prob.shape[0] != cfg["label_count"]:
            raise BundleError(f"{path}: {tag} tensor rows != label count")
        return MnbModel(prior, log_prob, cfg["alpha"], feature_space=tag)

    model = StackModel(
        bases={b: mnb(b) for b in BASE_FIELDS},
        base_vocabs={b: _vocab_from_bytes(sections[f"vocab:{b}"]) for b in BASE_FIELDS},
        meta=mnb("meta"),
        label_count=cfg["label_count"],
        folds=cfg["folds"],
        alpha=cfg["alpha"],
        igr_percent=cfg["igr_percent"],
    )
    return StackBundle(model, labels)
