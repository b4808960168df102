"""State scores on the 0-10 scale, national averages, and daily series.

A group's score is 10 times its positive proportion. State rows carry a
95% Wilson interval and tweets per million residents; states with no
posts are omitted (the report layer renders them as "no data").
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Mapping, Sequence

from .classify import POSITIVE, SentimentPrediction
from .geolocate import GeoResolution

#: Two-sided 95% normal quantile used by the Wilson interval.
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class StateSentiment:
    state: str
    n_tweets: int
    n_positive: int
    score: float
    ci_low: float
    ci_high: float
    tweets_per_million: float


@dataclass(frozen=True)
class DailyPoint:
    day: date
    n_tweets: int
    mean_score: float


def wilson_interval(k: int, n: int, z: float = Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    # The interval mathematically lies in [0, 1] and contains p; clamp away
    # float rounding at the endpoints so those invariants hold exactly.
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def _by_state(
    predictions: Sequence[SentimentPrediction],
    resolutions: Mapping[str, GeoResolution] | Iterable[GeoResolution],
) -> dict[str, list[SentimentPrediction]]:
    if not isinstance(resolutions, Mapping):
        resolutions = {r.post_id: r for r in resolutions}
    grouped: dict[str, list[SentimentPrediction]] = {}
    for pred in predictions:
        res = resolutions.get(pred.post_id)
        if res is None:
            raise ValueError(f"prediction {pred.post_id!r} has no geolocation")
        if not res.is_state:
            continue
        grouped.setdefault(res.outcome, []).append(pred)
    return grouped


def state_scores(
    predictions: Sequence[SentimentPrediction],
    resolutions: Mapping[str, GeoResolution] | Iterable[GeoResolution],
    population: Mapping[str, int],
) -> list[StateSentiment]:
    """Per-state sentiment rows, sorted by state code."""
    grouped = _by_state(predictions, resolutions)
    out = []
    for state in sorted(grouped):
        if state not in population:
            raise ValueError(f"population table is missing state {state}")
        preds = grouped[state]
        n = len(preds)
        k = sum(1 for p in preds if p.label == POSITIVE)
        lo, hi = wilson_interval(k, n)
        out.append(
            StateSentiment(
                state=state,
                n_tweets=n,
                n_positive=k,
                score=10.0 * k / n,
                ci_low=10.0 * lo,
                ci_high=10.0 * hi,
                tweets_per_million=1e6 * n / population[state],
            )
        )
    return out


def national_average(
    predictions: Sequence[SentimentPrediction],
    resolutions: Mapping[str, GeoResolution] | Iterable[GeoResolution],
    mode: str = "tweet_weighted",
) -> float:
    """National score: every post weighted equally, or every state."""
    grouped = _by_state(predictions, resolutions)
    if not grouped:
        raise ValueError("no state-resolved predictions")
    if mode == "tweet_weighted":
        total = sum(len(v) for v in grouped.values())
        positive = sum(1 for v in grouped.values() for p in v if p.label == POSITIVE)
        return 10.0 * positive / total
    if mode == "state_mean":
        scores = [
            10.0 * sum(1 for p in v if p.label == POSITIVE) / len(v)
            for v in grouped.values()
        ]
        return sum(scores) / len(scores)
    raise ValueError(f"mode must be tweet_weighted or state_mean, got {mode!r}")


def daily_series(
    predictions: Sequence[SentimentPrediction],
    timestamps: Mapping[str, datetime],
    exclude: tuple[date, date] | None = None,
) -> list[DailyPoint]:
    """One point per UTC calendar day with posts, optionally excluding a window.

    The exclusion range is inclusive on both ends; its days are omitted
    from the series entirely.
    """
    if exclude is not None:
        start, end = exclude
        if end < start:
            raise ValueError(f"exclusion range end {end} before start {start}")
    by_day: dict[date, list[SentimentPrediction]] = {}
    for pred in predictions:
        ts = timestamps.get(pred.post_id)
        if ts is None:
            raise ValueError(f"prediction {pred.post_id!r} has no timestamp")
        day = ts.astimezone(timezone.utc).date()
        if exclude is not None and exclude[0] <= day <= exclude[1]:
            continue
        by_day.setdefault(day, []).append(pred)
    return [
        DailyPoint(
            day=day,
            n_tweets=len(preds),
            mean_score=10.0 * sum(1 for p in preds if p.label == POSITIVE) / len(preds),
        )
        for day, preds in sorted(by_day.items())
    ]


def in_window(ts: datetime, window: tuple[date, date] | None) -> bool:
    """True when ts falls on a day inside the inclusive exclusion window."""
    if window is None:
        return False
    day = ts.astimezone(timezone.utc).date()
    return window[0] <= day <= window[1]
