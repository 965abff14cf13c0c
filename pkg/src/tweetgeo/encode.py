"""Categorical feature maps (tweet language, user language, timezone) and the
10-minute posting-time slot, assembled into one sparse one-hot block.

Each categorical map reserves index 0 for values never seen in training.
The one-hot block concatenates TL, UL, TZ, then 144 time slots; exactly four
positions are active for any record.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

UNK_CAT = "<unk-cat>"
N_TIME_SLOTS = 144
_SLOT_SECONDS = 600  # 24h / 144


def time_slot(posted_at: int) -> int:
    """UTC epoch seconds -> slot index in [0, 143]."""
    if posted_at < 0:
        raise ValueError("posted_at must be >= 0")
    return (posted_at % 86400) // _SLOT_SECONDS


def _freq_map(values) -> dict[str, int]:
    counts = Counter(values)
    ordered = sorted(counts, key=lambda v: (-counts[v], v))
    out = {UNK_CAT: 0}
    for i, v in enumerate(ordered, start=1):
        out[v] = i
    return out


@dataclass
class CategoryMaps:
    """value -> dense index maps for the three categorical fields."""

    tweet_lang: dict[str, int]
    user_lang: dict[str, int]
    timezone: dict[str, int]

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.tweet_lang), len(self.user_lang), len(self.timezone))

    @property
    def block_size(self) -> int:
        tl, ul, tz = self.sizes
        return tl + ul + tz + N_TIME_SLOTS

    def value_lists(self) -> dict[str, list[str]]:
        """Index-ordered value lists, for serialization."""
        out = {}
        for name in ("tweet_lang", "user_lang", "timezone"):
            m = getattr(self, name)
            out[name] = [v for v, _ in sorted(m.items(), key=lambda kv: kv[1])]
        return out

    @classmethod
    def from_value_lists(cls, lists: dict[str, list[str]]) -> "CategoryMaps":
        maps = {}
        for name in ("tweet_lang", "user_lang", "timezone"):
            values = lists[name]
            if not values or values[0] != UNK_CAT:
                raise ValueError(f"{name} map must start with {UNK_CAT}")
            maps[name] = {v: i for i, v in enumerate(values)}
        return cls(**maps)


def build_category_maps(train_records) -> CategoryMaps:
    """Index observed values by descending train frequency, ties lexicographic."""
    return CategoryMaps(
        tweet_lang=_freq_map(r.tweet_lang for r in train_records),
        user_lang=_freq_map(r.user_lang for r in train_records),
        timezone=_freq_map(r.timezone for r in train_records),
    )


def onehot_block(record, maps: CategoryMaps) -> list[int]:
    """Active positions (exactly 4) in the concatenated TL|UL|TZ|PT one-hot vector."""
    tl, ul, tz = maps.sizes
    return [
        maps.tweet_lang.get(record.tweet_lang, 0),
        tl + maps.user_lang.get(record.user_lang, 0),
        tl + ul + maps.timezone.get(record.timezone, 0),
        tl + ul + tz + time_slot(record.posted_at),
    ]
