"""Deterministic synthetic corpus generator for desk-scale end-to-end runs.

Every city owns a disjoint set of signature tokens that appear only in tweets
from that city, so the labeling task is solvable exactly; city frequencies
follow a Zipf-like law with a configurable exponent, timestamps concentrate in
a city-specific daily window, and languages/timezones correlate with the city.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geo import City, CityTable, save_city_table
from .ingest import Record, write_jsonl

_DAY = 86400
_EPOCH_BASE = 1_483_228_800  # 2017-01-01T00:00:00Z, a midnight


@dataclass
class SynthSpec:
    n_cities: int = 5
    n_countries: int = 2
    signature_tokens_per_city: int = 8
    noise_vocab_size: int = 60
    tokens_per_field: tuple[int, int] = (4, 9)
    n_users: int = 1000
    tweets_per_user: tuple[int, int] = (1, 1)
    class_skew: float = 0.0
    seed: int = 0
    # chance that each text field carries the city signature; at least one
    # field always does, so the joint task stays exactly solvable while any
    # single field alone is an imperfect predictor
    signature_field_probs: tuple[float, float, float] = (0.85, 0.6, 0.7)

    def __post_init__(self):
        if not (self.n_cities >= self.n_countries >= 1):
            raise ValueError("need n_cities >= n_countries >= 1")
        if self.signature_tokens_per_city < 1 or self.noise_vocab_size < 1:
            raise ValueError("token pools must be non-empty")
        lo, hi = self.tokens_per_field
        if not (1 <= lo <= hi):
            raise ValueError("tokens_per_field must be a sane (lo, hi) range")
        lo, hi = self.tweets_per_user
        if not (1 <= lo <= hi <= self.n_cities):
            raise ValueError("tweets_per_user range must fit the number of cities")
        if self.class_skew < 0:
            raise ValueError("class_skew must be >= 0")
        if len(self.signature_field_probs) != 3 or \
                not all(0.0 <= p <= 1.0 for p in self.signature_field_probs):
            raise ValueError("signature_field_probs must be three probabilities")


def city_grid(spec: SynthSpec) -> CityTable:
    """Cities on a coarse world grid (several hundred km apart), country
    assigned round-robin, population decreasing with city index."""
    cities = []
    for i in range(spec.n_cities):
        row, col = divmod(i, 12)
        cities.append(City(
            city_id=i + 1,
            name=f"city{i}",
            lat=-42.0 + 14.0 * row,
            lon=-174.0 + 29.0 * col,
            country_code=f"C{i % spec.n_countries}",
            population=1_000_000 // (i + 1),
        ))
    return CityTable(cities)


def _signature(i: int, spec: SynthSpec) -> list[str]:
    return [f"sig{i}w{j}" for j in range(spec.signature_tokens_per_city)]


def generate(spec: SynthSpec) -> tuple[list[Record], CityTable]:
    """Emit (records, city table); byte-identical output for a fixed spec."""
    rng = np.random.default_rng(spec.seed)
    table = city_grid(spec)
    cities = table.cities
    noise = [f"noise{j}" for j in range(spec.noise_vocab_size)]

    weights = 1.0 / np.power(np.arange(1, spec.n_cities + 1, dtype=np.float64),
                             spec.class_skew)
    weights /= weights.sum()

    sig_pool = [_signature(i, spec) for i in range(spec.n_cities)]

    def field_text(city_idx: int, with_signature: bool) -> str:
        lo, hi = spec.tokens_per_field
        n_tok = int(rng.integers(lo, hi + 1))
        toks = []
        for t in range(n_tok):
            if with_signature and (t == 0 or rng.random() < 0.7):
                toks.append(sig_pool[city_idx][int(rng.integers(0, spec.signature_tokens_per_city))])
            else:
                toks.append(noise[int(rng.integers(0, spec.noise_vocab_size))])
        return " ".join(toks)

    records = []
    for u in range(spec.n_users):
        lo, hi = spec.tweets_per_user
        n_tweets = int(rng.integers(lo, hi + 1))
        visited = rng.choice(spec.n_cities, size=n_tweets, replace=False, p=weights)
        for ci in visited:
            ci = int(ci)
            c = cities[ci]
            p_text, p_desc, p_loc = spec.signature_field_probs
            carries = [rng.random() < p_text, rng.random() < p_desc, rng.random() < p_loc]
            if not any(carries):
                carries[int(rng.integers(0, 3))] = True
            # 10-minute-accurate daily window characteristic of the city
            slot_center = (ci * _DAY) // max(spec.n_cities, 1)
            seconds = (slot_center + int(rng.integers(-1800, 1801))) % _DAY
            day = int(rng.integers(0, 25))
            lang = f"lang{ci % spec.n_countries}" if rng.random() < 0.9 \
                else f"lang{int(rng.integers(0, spec.n_countries))}"
            tz = f"tz{ci}" if rng.random() < 0.9 else f"tz{int(rng.integers(0, spec.n_cities))}"
            loc_word = f"loc{ci}" if carries[2] else noise[int(rng.integers(0, spec.noise_vocab_size))]
            records.append(Record(
                user_id=f"u{u}",
                text=field_text(ci, carries[0]),
                user_description=field_text(ci, carries[1]),
                user_name=f"name{int(rng.integers(0, spec.noise_vocab_size))}",
                profile_location=f"{loc_word} {noise[int(rng.integers(0, spec.noise_vocab_size))]}",
                tweet_lang=lang,
                user_lang=lang,
                timezone=tz,
                posted_at=_EPOCH_BASE + day * _DAY + seconds,
                lat=round(c.lat + float(rng.uniform(-0.04, 0.04)), 6),
                lon=round(c.lon + float(rng.uniform(-0.04, 0.04)), 6),
                country_code=c.country_code,
            ))
    return records, table


def write_corpus(spec: SynthSpec, jsonl_path, table_path) -> tuple[list[Record], CityTable]:
    records, table = generate(spec)
    write_jsonl(records, jsonl_path)
    save_city_table(table, table_path)
    return records, table
