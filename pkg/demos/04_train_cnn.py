#!/usr/bin/env python3
"""Training the convolutional classifier end to end.

Builds a small city-level model on synthetic data: shared filter banks over
four text fields, max-over-time pooling, dropout, categorical one-hots, and
a softmax head, trained with hand-written backprop + Adam and early stopping
on dev accuracy. Finishes with the four evaluation metrics and the
calibration table.
"""

import numpy as np

from tweetgeo.cnn import CnnConfig, encode_features, predict_proba
from tweetgeo.encode import build_category_maps
from tweetgeo.geo import assign_cities
from tweetgeo.ingest import SplitSpec, dedup_user_city, split_by_user
from tweetgeo.labels import city_labels
from tweetgeo.metrics import (Prediction, acc_at_161, acc_top5, accuracy,
                              calibration_bins, median_error_km, ranked_top5)
from tweetgeo.synth import SynthSpec, generate
from tweetgeo.textproc import build_vocab, tokenize
from tweetgeo.train import TrainConfig, train

records, table = generate(SynthSpec(n_cities=5, n_countries=2, n_users=1500, seed=3))
assign_cities(records, table)
records = dedup_user_city(records, seed=3)
tr, dev, te = split_by_user(records, SplitSpec(0.15, 100, seed=3))
print(f"splits: train {len(tr)} / dev {len(dev)} / test {len(te)}")

vocab = build_vocab(
    (tokenize(getattr(r, f)) for r in tr
     for f in ("text", "user_description", "profile_location")), min_count=5)
maps = build_category_maps(tr)
labels = city_labels(table)
print(f"vocabulary {len(vocab)} entries, one-hot block {maps.block_size}, "
      f"{len(labels)} city labels")

cfg = CnnConfig(embed_dim=32, windows=(2, 3, 4), filters_per_window=24,
                dropout_rate=0.5, label_count=len(labels),
                max_lens={"text": 12, "user_description": 12,
                          "profile_location": 6, "user_name": 4})
tcfg = TrainConfig(batch_size=64, max_epochs=12, patience=3, seed=3)
result = train(
    encode_features(tr, vocab, maps, cfg, labels.label_array(tr)),
    encode_features(dev, vocab, maps, cfg, labels.label_array(dev)),
    cfg, tcfg, len(vocab), maps.block_size)

print("\nepoch  loss     dev_acc")
for row in result.log:
    print(f"  {row.epoch:3d}  {row.train_loss:.4f}  {row.dev_accuracy:.4f}")
print(f"best dev accuracy {result.best_dev_accuracy:.4f} at epoch {result.best_epoch}")

feats = encode_features(te, vocab, maps, cfg)
probs = predict_proba(result.model, feats)
preds = []
for r, p in zip(te, probs):
    ranked = ranked_top5(p)
    preds.append(Prediction(labels.record_label(r), ranked, float(p[ranked[0]]),
                            true_coords=(r.lat, r.lon)))
coords = labels.coords_array()
print(f"\ntest metrics on {len(preds)} tweets:")
print(f"  accuracy        {accuracy(preds):.4f}")
print(f"  acc@top5        {acc_top5(preds):.4f}")
print(f"  acc@161km       {acc_at_161(preds, coords):.4f}")
print(f"  median error    {median_error_km(preds, coords):.1f} km")

print("\ncalibration over the winning probability:")
print("  bin          tweets  accuracy")
for lo, hi, frac, acc in calibration_bins(preds):
    if frac:
        print(f"  [{lo:.1f}, {hi:.1f})  {frac:6.1%}  {acc:.4f}")
