"""Tweet-style tokenization, vocabulary construction, and index encoding.

Tokenizer rules (deterministic, self-contained):
  * lowercase everything
  * URLs collapse to the sentinel ``<url>``, @mentions to ``<user>``
  * hashtags stay single tokens, ``#`` included
  * runs of word characters form one token; runs of more than 3 of the same
    character inside a word are collapsed to 3 ("sooooo" -> "sooo")
  * every other non-space character (punctuation, emoji) is its own token
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import DataError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

URL_SENTINEL = "<url>"
USER_SENTINEL = "<user>"

_TOKEN_RE = re.compile(
    r"""(?P<url>https?://\S+|www\.\S+)
      | (?P<user>@\w+)
      | (?P<hashtag>\#\w+)
      | (?P<word>\w+)
      | (?P<other>\S)
    """,
    re.VERBOSE | re.UNICODE,
)

_RUN_RE = re.compile(r"(.)\1{3,}", re.UNICODE)


def _squeeze_runs(token: str) -> str:
    return _RUN_RE.sub(lambda m: m.group(1) * 3, token)


def tokenize(text: str) -> list[str]:
    """Split text into tokens; deterministic, empty string -> empty list."""
    out = []
    for m in _TOKEN_RE.finditer(text.lower()):
        kind = m.lastgroup
        tok = m.group()
        if kind == "url":
            out.append(URL_SENTINEL)
        elif kind == "user":
            out.append(USER_SENTINEL)
        elif kind in ("hashtag", "word"):
            out.append(_squeeze_runs(tok))
        else:
            out.append(tok)
    return out


@dataclass
class Vocabulary:
    """token <-> index mapping with reserved PAD=0 and UNK=1 slots.

    Stored tokens all reached ``min_count`` occurrences in the corpus the
    vocabulary was built from; indices >= 2 are assigned in descending
    frequency order, ties lexicographic.
    """

    index_to_token: list[str]
    min_count: int
    token_to_index: dict[str, int] = None

    def __post_init__(self):
        if self.index_to_token[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("indices 0 and 1 are reserved for PAD and UNK")
        if self.token_to_index is None:
            self.token_to_index = {t: i for i, t in enumerate(self.index_to_token)}
        if len(self.token_to_index) != len(self.index_to_token):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self):
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK_INDEX)

    @property
    def content_tokens(self) -> list[str]:
        return self.index_to_token[2:]


def build_vocab(token_streams: Iterable[Iterable[str]], min_count: int = 10) -> Vocabulary:
    """Count tokens across all streams and keep those with frequency >= min_count."""
    counts = Counter()
    for stream in token_streams:
        counts.update(stream)
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    return Vocabulary([PAD_TOKEN, UNK_TOKEN] + kept, min_count=min_count)


def encode_tokens(tokens: list[str], vocab: Vocabulary, max_len: int) -> list[int]:
    """Token list -> fixed-length index list: truncate, then right-pad with PAD."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    idx = [vocab.index(t) for t in tokens[:max_len]]
    idx.extend([PAD_INDEX] * (max_len - len(idx)))
    return idx


def save_vocab(vocab: Vocabulary, path):
    """Write one token per line in index order, after a two-line header."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"min_count={vocab.min_count}\n")
        f.write(f"size={len(vocab)}\n")
        for t in vocab.index_to_token:
            f.write(t + "\n")


def load_vocab(path) -> Vocabulary:
    with open(path, encoding="utf-8") as f:
        lines = f.read().split("\n")
    try:
        min_count = int(lines[0].removeprefix("min_count="))
        size = int(lines[1].removeprefix("size="))
    except (IndexError, ValueError) as e:
        raise DataError(f"{path}: bad vocabulary header") from e
    tokens = lines[2:2 + size]
    if len(tokens) != size:
        raise DataError(f"{path}: vocabulary truncated: header says {size}, found {len(tokens)}")
    return Vocabulary(tokens, min_count=min_count)
