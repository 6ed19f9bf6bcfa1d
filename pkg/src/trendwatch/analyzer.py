"""Trend-analysis reports: reach, language and category mixes, time series, pairs.

Percentages are exact ``Fraction`` values until serialised.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import HashtagCorpus, Tweet, TrendRecord, format_timestamp
from .errors import EmptyInput, MissingProfile
from .hashcat import Category

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def _num(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, datetime):
        return format_timestamp(v)
    return v


def _kv_csv(d: Mapping) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k in sorted(d):
        w.writerow([k, d[k]])
    return buf.getvalue()


# ---------------------------------------------------------------- reach

@dataclass(frozen=True)
class ReachReport:
    hashtag: str
    n_unique_users: int
    total_followers: int
    reach: int

    def to_dict(self) -> dict:
        return {"hashtag": self.hashtag, "n_unique_users": self.n_unique_users,
                "total_followers": self.total_followers, "reach": self.reach}

    def to_csv(self) -> str:
        return _kv_csv(self.to_dict())


def reach(corpus: HashtagCorpus) -> ReachReport:
    """Unique tweeting users plus the sum of their follower counts, each user once."""
    uids = sorted({t.user_id for t in corpus.tweets})
    total = 0
    for uid in uids:
        if uid not in corpus.users:
            raise MissingProfile(uid)
        total += corpus.users[uid].followers_count
    return ReachReport(corpus.hashtag, len(uids), total, len(uids) + total)


# ---------------------------------------------------------------- languages

LANG_BUCKETS = ("english", "urdu", "unknown", "other")


@dataclass(frozen=True)
class LanguageDistribution:
    counts: Mapping[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def percentages(self) -> dict[str, Fraction]:
        n = self.total
        return {k: Fraction(100 * v, n) if n else Fraction(0) for k, v in self.counts.items()}

    def to_dict(self) -> dict:
        return {"counts": dict(self.counts), "total": self.total,
                "percent": {k: float(v) for k, v in self.percentages().items()}}

    def to_csv(self) -> str:
        pct = self.percentages()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["language", "count", "percent"])
        for k in LANG_BUCKETS:
            w.writerow([k, self.counts[k], float(pct[k])])
        return buf.getvalue()


def language_distribution(tweets: Iterable[Tweet]) -> LanguageDistribution:
    counts = dict.fromkeys(LANG_BUCKETS, 0)
    bucket = {"en": "english", "ur": "urdu", "und": "unknown"}
    for t in tweets:
        counts[bucket.get(t.lang, "other")] += 1
    return LanguageDistribution(counts)


# ---------------------------------------------------------------- categories

@dataclass(frozen=True)
class CategoryDistribution:
    hashtags: Mapping[Category, int]
    tweets: Mapping[Category, int]

    def hashtag_percent(self) -> dict[Category, Fraction]:
        n = sum(self.hashtags.values())
        return {c: Fraction(100 * v, n) for c, v in self.hashtags.items()}

    def tweet_percent(self) -> dict[Category, Fraction]:
        n = sum(self.tweets.values())
        return {c: Fraction(100 * v, n) if n else Fraction(0) for c, v in self.tweets.items()}

    def to_dict(self) -> dict:
        hp, tp = self.hashtag_percent(), self.tweet_percent()
        return {c.value: {"hashtags": self.hashtags[c], "tweets": self.tweets[c],
                          "hashtag_percent": float(hp[c]), "tweet_percent": float(tp[c])}
                for c in Category}

    def to_csv(self) -> str:
        hp, tp = self.hashtag_percent(), self.tweet_percent()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["category", "hashtags", "tweets", "hashtag_percent", "tweet_percent"])
        for c in Category:
            w.writerow([c.value, self.hashtags[c], self.tweets[c], float(hp[c]), float(tp[c])])
        return buf.getvalue()


def category_distribution(predictions: Iterable[tuple[str, Category, int]]) -> CategoryDistribution:
    hashtags = dict.fromkeys(Category, 0)
    tweets = dict.fromkeys(Category, 0)
    seen = False
    for _tag, cat, n in predictions:
        seen = True
        hashtags[cat] += 1
        tweets[cat] += n
    if not seen:
        raise EmptyInput("no hashtag predictions")
    return CategoryDistribution(hashtags, tweets)


# ---------------------------------------------------------------- time series

@dataclass(frozen=True)
class TimeSeries:
    bin_width_s: int
    origin: datetime
    groups: tuple[str, ...]
    bins: tuple[tuple[datetime, dict], ...]  # (bin start, {group: value})

    def column(self, group: str) -> list:
        return [vals[group] for _, vals in self.bins]

    def to_dict(self) -> dict:
        return {
            "bin_width_s": self.bin_width_s,
            "origin": format_timestamp(self.origin),
            "groups": list(self.groups),
            "bins": [{"start": format_timestamp(s), "values": {g: _num(v[g]) for g in self.groups}}
                     for s, v in self.bins],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_start", *self.groups])
        for s, v in self.bins:
            w.writerow([format_timestamp(s), *(_num(v[g]) for g in self.groups)])
        return buf.getvalue()

    def plot_csv(self) -> str:
        """Long format (bin_start, group, value) for external plotting."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_start", "group", "value"])
        for s, v in self.bins:
            for g in self.groups:
                w.writerow([format_timestamp(s), g, _num(v[g])])
        return buf.getvalue()


def _bin_grid(tweets: Sequence[Tweet], bin_width_s: int):
    """Bin index per tweet on a grid anchored at the Unix epoch (a whole UTC hour)."""
    if bin_width_s <= 0:
        raise ValueError("bin_width_s must be positive")
    if not tweets:
        raise EmptyInput("no tweets to bin")
    secs = [int((t.created_at - _EPOCH).total_seconds()) for t in tweets]
    first = min(secs) // bin_width_s
    last = max(secs) // bin_width_s
    origin = _EPOCH + timedelta(seconds=first * bin_width_s)
    return origin, [s // bin_width_s - first for s in secs], last - first + 1


def time_series(tweets: Sequence[Tweet], bin_width_s: int,
                group_of: Callable[[Tweet], str] | None = None,
                groups: Sequence[str] | None = None) -> TimeSeries:
    """Tweet counts per bin and group."""
    tweets = list(tweets)
    origin, slots, n_bins = _bin_grid(tweets, bin_width_s)
    labels = [group_of(t) if group_of else "all" for t in tweets]
    names = tuple(groups) if groups is not None else tuple(sorted(set(labels)))
    counts = [dict.fromkeys(names, 0) for _ in range(n_bins)]
    for slot, g in zip(slots, labels):
        counts[slot][g] += 1
    step = timedelta(seconds=bin_width_s)
    return TimeSeries(bin_width_s, origin, names,
                      tuple((origin + i * step, c) for i, c in enumerate(counts)))


def tweets_per_user_series(tweets: Sequence[Tweet], bin_width_s: int,
                           partition: Callable[[Tweet], str],
                           groups: Sequence[str] = ("manipulator", "organic")) -> TimeSeries:
    """Mean tweets per distinct user for each bin and partition; empty cells are 0."""
    tweets = list(tweets)
    origin, slots, n_bins = _bin_grid(tweets, bin_width_s)
    n_tweets = [Counter() for _ in range(n_bins)]
    users = [{g: set() for g in groups} for _ in range(n_bins)]
    for t, slot in zip(tweets, slots):
        g = partition(t)
        n_tweets[slot][g] += 1
        users[slot][g].add(t.user_id)
    step = timedelta(seconds=bin_width_s)
    bins = []
    for i in range(n_bins):
        vals = {g: Fraction(n_tweets[i][g], len(users[i][g])) if users[i][g] else Fraction(0)
                for g in groups}
        bins.append((origin + i * step, vals))
    return TimeSeries(bin_width_s, origin, tuple(groups), tuple(bins))


# ---------------------------------------------------------------- user mix

@dataclass(frozen=True)
class UserMixReport:
    n_users: int
    bots: int
    manipulators: int
    bot_manipulators: int

    @property
    def humans(self) -> int:
        return self.n_users - self.bots

    @property
    def organic(self) -> int:
        return self.n_users - self.manipulators

    def percent(self, name: str) -> Fraction:
        return Fraction(100 * getattr(self, name), self.n_users)

    def to_dict(self) -> dict:
        names = ("bots", "humans", "manipulators", "organic", "bot_manipulators")
        out = {"n_users": self.n_users}
        for k in names:
            out[k] = getattr(self, k)
            out[f"{k}_percent"] = float(self.percent(k))
        return out

    def to_csv(self) -> str:
        return _kv_csv(self.to_dict())


def user_mix(user_labels: Mapping[str, tuple[bool, bool] | Mapping[str, bool]]) -> UserMixReport:
    """Counts of bots, manipulators and their overlap.

    Values are ``(is_bot, is_manipulator)`` pairs or mappings with ``bot`` and
    ``manipulator`` keys.
    """
    if not user_labels:
        raise EmptyInput("no users")
    bots = manips = both = 0
    for lab in user_labels.values():
        if isinstance(lab, Mapping):
            is_bot, is_manip = bool(lab["bot"]), bool(lab["manipulator"])
        else:
            is_bot, is_manip = bool(lab[0]), bool(lab[1])
        bots += is_bot
        manips += is_manip
        both += is_bot and is_manip
    return UserMixReport(len(user_labels), bots, manips, both)


# ---------------------------------------------------------------- hashtag wars

@dataclass(frozen=True)
class PairReport:
    orig_hashtag: str
    resp_hashtag: str
    orig_trend_time: datetime
    resp_first_tweet: datetime
    resp_after_orig_trend: bool

    def to_dict(self) -> dict:
        return {
            "orig_hashtag": self.orig_hashtag,
            "resp_hashtag": self.resp_hashtag,
            "orig_trend_time": format_timestamp(self.orig_trend_time),
            "resp_first_tweet": format_timestamp(self.resp_first_tweet),
            "resp_after_orig_trend": self.resp_after_orig_trend,
        }

    def to_csv(self) -> str:
        return _kv_csv(self.to_dict())


def response_pair_check(orig: TrendRecord, resp_tweets: Sequence[Tweet], resp_name: str) -> PairReport:
    """Did the response hashtag's first tweet come strictly after the original trended?"""
    if not resp_tweets:
        raise EmptyInput(f"no tweets for #{resp_name}")
    first = min(t.created_at for t in resp_tweets)
    return PairReport(orig.hashtag, resp_name, orig.first_seen, first, first > orig.first_seen)
