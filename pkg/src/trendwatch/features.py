"""Per-user feature extraction: manipulation behaviour and bot profile flags."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import astuple, dataclass, fields
from datetime import datetime
from fractions import Fraction
from typing import Iterable, Sequence

from ._io import atomic_write_text
from .corpus import Corpus, Tweet, UserProfile
from .errors import EmptyInput
from .textproc import tokenize


@dataclass(frozen=True)
class ManipFeatureVector:
    tweets_total: int
    tweets_before: int
    time_after_s: float
    time_before_s: float
    sim_score: float

    def as_row(self) -> list[float]:
        return [float(v) for v in astuple(self)]


@dataclass(frozen=True)
class BotFeatureVector:
    has_description: bool
    url_in_description: bool
    friends_gt_1000: bool
    followers_lt_30: bool
    geo_enabled: bool
    listed_gt_0: bool
    statuses_gt_0: bool
    url_in_profile: bool
    verified: bool
    followers_count: int
    friends_count: int

    def as_row(self) -> list[float]:
        return [float(v) for v in astuple(self)]


MANIP_COLUMNS = [f.name for f in fields(ManipFeatureVector)]
BOT_COLUMNS = [f.name for f in fields(BotFeatureVector)]


def sim_score_exact(user_tweets: Sequence[Sequence[str]]) -> Fraction:
    """Length-weighted frequency of n-grams (n >= 2) shared by two or more tweets, per tweet."""
    m = len(user_tweets)
    if m == 0:
        raise EmptyInput("sim_score needs at least one tweet")
    freq: Counter = Counter()
    df: Counter = Counter()
    for tokens in user_tweets:
        tokens = tuple(tokens)
        grams = [tokens[i:i + w] for w in range(2, len(tokens) + 1)
                 for i in range(len(tokens) - w + 1)]
        freq.update(grams)
        df.update(set(grams))
    total = sum(len(g) * freq[g] for g, d in df.items() if d >= 2)
    return Fraction(total, m)


def sim_score(user_tweets: Sequence[Sequence[str]]) -> float:
    return float(sim_score_exact(user_tweets))


def _mean_gap(times: list[datetime]) -> float:
    # mean of consecutive gaps telescopes to span / (k - 1)
    if len(times) < 2:
        return 0.0
    return (times[-1] - times[0]).total_seconds() / (len(times) - 1)


def manip_features(user_tweets: Sequence[Tweet], trend_first_seen: datetime) -> ManipFeatureVector:
    """Volume, pre-trend volume, mean gaps before/after trend time and similarity.

    Tweets exactly at ``trend_first_seen`` count as after the trend.
    """
    if not user_tweets:
        raise EmptyInput("no tweets for user")
    ordered = sorted(user_tweets, key=lambda t: t.created_at)
    before = [t.created_at for t in ordered if t.created_at < trend_first_seen]
    after = [t.created_at for t in ordered if t.created_at >= trend_first_seen]
    return ManipFeatureVector(
        tweets_total=len(ordered),
        tweets_before=len(before),
        time_after_s=_mean_gap(after),
        time_before_s=_mean_gap(before),
        sim_score=sim_score([tokenize(t.text) for t in ordered]),
    )


def bot_features(user: UserProfile) -> BotFeatureVector:
    return BotFeatureVector(
        has_description=bool(user.description),
        url_in_description=user.description_url_present,
        friends_gt_1000=user.friends_count > 1000,
        followers_lt_30=user.followers_count < 30,
        geo_enabled=bool(user.geo_enabled),
        listed_gt_0=user.listed_count > 0,
        statuses_gt_0=user.statuses_count > 0,
        url_in_profile=bool(user.profile_url),
        verified=bool(user.verified),
        followers_count=user.followers_count,
        friends_count=user.friends_count,
    )


def primary_hashtags(corpus: Corpus) -> dict[str, tuple[str, list[Tweet]]]:
    """Each user's most-tweeted trending hashtag (ties: alphabetical) and those tweets.

    Only original tweets inside each trend's window are counted.
    """
    best: dict[str, tuple[str, list[Tweet]]] = {}
    for tag in sorted(corpus.trends):
        per_user: dict[str, list[Tweet]] = {}
        for t in corpus.hashtag_tweets(tag):
            per_user.setdefault(t.user_id, []).append(t)
        for uid, tweets in per_user.items():
            if uid not in best or len(tweets) > len(best[uid][1]):
                best[uid] = (tag, tweets)
    return dict(sorted(best.items()))


def manip_feature_table(corpus: Corpus) -> dict[str, ManipFeatureVector]:
    out = {}
    for uid, (tag, tweets) in primary_hashtags(corpus).items():
        out[uid] = manip_features(tweets, corpus.trends[tag].first_seen)
    return out


def bot_feature_table(users: Iterable[UserProfile]) -> dict[str, BotFeatureVector]:
    return {u.id: bot_features(u) for u in sorted(users, key=lambda u: u.id)}


def feature_csv(table: dict, columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user_id", *columns])
    for uid, vec in table.items():
        w.writerow([uid, *(_cell(v) for v in astuple(vec))])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    return repr(v) if isinstance(v, float) else v


def write_feature_csv(table: dict, columns: list[str], path) -> None:
    atomic_write_text(path, feature_csv(table, columns))
