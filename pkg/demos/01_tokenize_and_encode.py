#!/usr/bin/env python3
"""Tokenizing tweets and turning them into model inputs.

Walks through the tweet-aware tokenizer, vocabulary construction with a
frequency cutoff, fixed-length index encoding, 10-minute posting-time slots,
and the categorical one-hot block.
"""

from tweetgeo.encode import build_category_maps, onehot_block, time_slot
from tweetgeo.ingest import Record
from tweetgeo.textproc import build_vocab, encode_tokens, tokenize

samples = [
    "Just landed in NYC!! @anna check https://t.co/abc #travel",
    "Sooooo happy about the #NYC marathon :)",
    "monday again... coffee coffee coffee",
]

print("== tokenizer ==")
for s in samples:
    print(f"  {s!r}\n    -> {tokenize(s)}")

print("\n== vocabulary (min_count=2) ==")
streams = [tokenize(s) for s in samples]
vocab = build_vocab(streams, min_count=2)
print(f"  kept {len(vocab)} entries: {vocab.index_to_token}")

print("\n== fixed-length encoding (max_len=8) ==")
toks = tokenize(samples[1])
idx = encode_tokens(toks, vocab, max_len=8)
print(f"  {toks}\n    -> {idx}  (1 = unknown, 0 = padding)")

print("\n== posting-time slots (144 per day) ==")
for hhmm, secs in [("00:00", 0), ("09:15", 9 * 3600 + 15 * 60), ("23:59", 86399)]:
    print(f"  {hhmm} UTC -> slot {time_slot(secs)}")

print("\n== categorical one-hot block ==")
train = [
    Record(user_id="u1", tweet_lang="en", user_lang="en", timezone="EST", posted_at=0),
    Record(user_id="u2", tweet_lang="en", user_lang="fr", timezone="CET", posted_at=0),
    Record(user_id="u3", tweet_lang="ja", user_lang="ja", timezone="JST", posted_at=0),
]
maps = build_category_maps(train)
print(f"  sizes (TL, UL, TZ): {maps.sizes}, block size {maps.block_size}")
probe = Record(user_id="u9", tweet_lang="en", user_lang="xx", timezone="JST",
               posted_at=9 * 3600 + 15 * 60)
print(f"  active positions for (en, unseen, JST, 09:15): {onehot_block(probe, maps)}")
