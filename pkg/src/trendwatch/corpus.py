"""Corpus records, JSONL ingestion and the tweet-selection rules.

Three JSONL files make up a corpus directory: ``tweets.jsonl``,
``users.jsonl`` and ``trends.jsonl``. Timestamps are RFC 3339 and are
normalised to UTC with second precision on load.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping

from ._io import atomic_write_text
from .errors import IntegrityError, InvalidTimestamp, MalformedRecord, MissingProfile

WINDOW_MARGIN = timedelta(days=1)

TWEETS_FILE = "tweets.jsonl"
USERS_FILE = "users.jsonl"
TRENDS_FILE = "trends.jsonl"

_HASHTAG_RE = re.compile(r"#(\w+)")


# ---------------------------------------------------------------- timestamps

def parse_timestamp(value) -> datetime:
    """Parse an RFC 3339 string into an aware UTC datetime (seconds only)."""
    if not isinstance(value, str) or not value:
        raise InvalidTimestamp(value)
    text = value.strip()
    if text[-1] in "zZ":
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise InvalidTimestamp(value) from None
    if ts.tzinfo is None:
        # RFC 3339 requires an offset; naive values are taken as UTC
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def extract_hashtags(text: str) -> tuple[str, ...]:
    seen = []
    for tag in _HASHTAG_RE.findall(text):
        tag = tag.lower()
        if tag not in seen:
            seen.append(tag)
    return tuple(seen)


# ---------------------------------------------------------------- records

@dataclass(frozen=True)
class Tweet:
    id: str
    user_id: str
    text: str
    created_at: datetime
    lang: str
    hashtags: tuple[str, ...] = ()
    is_retweet: bool = False

    def __post_init__(self):
        if not self.id:
            raise IntegrityError("tweet id must be nonempty")
        for tag in self.hashtags:
            if not tag or "#" in tag or any(c.isspace() for c in tag):
                raise IntegrityError(f"bad hashtag {tag!r} in tweet {self.id}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "text": self.text,
            "created_at": format_timestamp(self.created_at),
            "lang": self.lang,
            "hashtags": list(self.hashtags),
            "is_retweet": self.is_retweet,
        }


@dataclass(frozen=True)
class UserProfile:
    id: str
    description: str = ""
    friends_count: int = 0
    followers_count: int = 0
    geo_enabled: bool = False
    listed_count: int = 0
    statuses_count: int = 0
    profile_url: str = ""
    verified: bool = False
    description_url: str = ""

    def __post_init__(self):
        for name in ("friends_count", "followers_count", "listed_count", "statuses_count"):
            if getattr(self, name) < 0:
                raise IntegrityError(f"{name} < 0 for user {self.id}")

    @property
    def description_url_present(self) -> bool:
        return bool(self.description_url)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "description_url": self.description_url,
            "friends_count": self.friends_count,
            "followers_count": self.followers_count,
            "geo_enabled": self.geo_enabled,
            "listed_count": self.listed_count,
            "statuses_count": self.statuses_count,
            "profile_url": self.profile_url,
            "verified": self.verified,
        }


@dataclass(frozen=True)
class TrendRecord:
    hashtag: str
    location: str
    first_seen: datetime
    last_seen: datetime
    first_trend_location: str = ""
    n_other_countries: int = 0
    trended_worldwide: bool = False

    def __post_init__(self):
        if not self.hashtag:
            raise IntegrityError("trend hashtag must be nonempty")
        if self.first_seen > self.last_seen:
            raise IntegrityError(f"trend {self.hashtag}: first_seen after last_seen")
        if self.n_other_countries < 0:
            raise IntegrityError(f"trend {self.hashtag}: n_other_countries < 0")

    def to_dict(self) -> dict:
        return {
            "hashtag": self.hashtag,
            "location": self.location,
            "first_seen": format_timestamp(self.first_seen),
            "last_seen": format_timestamp(self.last_seen),
            "first_trend_location": self.first_trend_location,
            "n_other_countries": self.n_other_countries,
            "trended_worldwide": self.trended_worldwide,
        }


@dataclass(frozen=True)
class HashtagCorpus:
    """Tweets for one trending hashtag, with every author's profile."""

    hashtag: str
    trend: TrendRecord
    tweets: tuple[Tweet, ...]
    users: Mapping[str, UserProfile] = field(default_factory=dict)

    def __post_init__(self):
        tag = self.hashtag.lower()
        for tw in self.tweets:
            if tag not in tw.hashtags:
                raise IntegrityError(f"tweet {tw.id} does not carry #{tag}")
            if tw.user_id not in self.users:
                raise MissingProfile(tw.user_id)


class LanguageProfile(enum.Enum):
    ENGLISH_ONLY = "EnglishOnly"
    URDU_ONLY = "UrduOnly"
    BILINGUAL = "Bilingual"
    NEITHER = "Neither"


# ---------------------------------------------------------------- loading

def _read_jsonl(path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(lineno, f"bad JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise MalformedRecord(lineno, "not a JSON object")
            yield lineno, obj


def _field(obj: dict, name: str, kind, lineno: int, default=...):
    if name not in obj:
        if default is ...:
            raise MalformedRecord(lineno, f"missing field {name!r}")
        return default
    value = obj[name]
    if kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise MalformedRecord(lineno, f"field {name!r} has wrong type")
    return value


def _timestamp(obj: dict, name: str, lineno: int) -> datetime:
    if name not in obj:
        raise MalformedRecord(lineno, f"missing field {name!r}")
    try:
        return parse_timestamp(obj[name])
    except InvalidTimestamp:
        raise InvalidTimestamp(obj[name], lineno) from None


def load_tweets(path) -> list[Tweet]:
    tweets: list[Tweet] = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        tid = _field(obj, "id", str, lineno)
        text = _field(obj, "text", str, lineno)
        if "hashtags" in obj:
            raw = _field(obj, "hashtags", list, lineno)
            if not all(isinstance(h, str) for h in raw):
                raise MalformedRecord(lineno, "hashtags must be strings")
            tags = tuple(h.lower().lstrip("#") for h in raw)
        else:
            tags = extract_hashtags(text)
        if tid in seen:
            raise MalformedRecord(lineno, f"duplicate tweet id {tid!r}")
        seen.add(tid)
        try:
            tweets.append(Tweet(
                id=tid,
                user_id=_field(obj, "user_id", str, lineno),
                text=text,
                created_at=_timestamp(obj, "created_at", lineno),
                lang=_field(obj, "lang", str, lineno),
                hashtags=tags,
                is_retweet=_field(obj, "is_retweet", bool, lineno),
            ))
        except IntegrityError as exc:
            raise MalformedRecord(lineno, str(exc)) from None
    return tweets


def load_users(path) -> dict[str, UserProfile]:
    users: dict[str, UserProfile] = {}
    for lineno, obj in _read_jsonl(path):
        uid = _field(obj, "id", str, lineno)
        if uid in users:
            raise MalformedRecord(lineno, f"duplicate user id {uid!r}")
        try:
            users[uid] = UserProfile(
                id=uid,
                description=_field(obj, "description", str, lineno, ""),
                description_url=_field(obj, "description_url", str, lineno, ""),
                friends_count=_field(obj, "friends_count", int, lineno),
                followers_count=_field(obj, "followers_count", int, lineno),
                geo_enabled=_field(obj, "geo_enabled", bool, lineno),
                listed_count=_field(obj, "listed_count", int, lineno),
                statuses_count=_field(obj, "statuses_count", int, lineno),
                profile_url=_field(obj, "profile_url", str, lineno, ""),
                verified=_field(obj, "verified", bool, lineno),
            )
        except IntegrityError as exc:
            raise MalformedRecord(lineno, str(exc)) from None
    return users


def load_trends(path) -> dict[str, TrendRecord]:
    trends: dict[str, TrendRecord] = {}
    for lineno, obj in _read_jsonl(path):
        tag = _field(obj, "hashtag", str, lineno).lower().lstrip("#")
        if tag in trends:
            raise MalformedRecord(lineno, f"duplicate trend {tag!r}")
        try:
            trends[tag] = TrendRecord(
                hashtag=tag,
                location=_field(obj, "location", str, lineno),
                first_seen=_timestamp(obj, "first_seen", lineno),
                last_seen=_timestamp(obj, "last_seen", lineno),
                first_trend_location=_field(obj, "first_trend_location", str, lineno, ""),
                n_other_countries=_field(obj, "n_other_countries", int, lineno, 0),
                trended_worldwide=_field(obj, "trended_worldwide", bool, lineno, False),
            )
        except IntegrityError as exc:
            raise MalformedRecord(lineno, str(exc)) from None
    return trends


def _jsonl(records) -> str:
    return "".join(
        json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for r in records
    )


def dump_tweets(tweets: Iterable[Tweet], path) -> None:
    atomic_write_text(path, _jsonl(tweets))


def dump_users(users: Iterable[UserProfile], path) -> None:
    atomic_write_text(path, _jsonl(users))


def dump_trends(trends: Iterable[TrendRecord], path) -> None:
    atomic_write_text(path, _jsonl(trends))


@dataclass(frozen=True)
class Corpus:
    """Everything in one corpus directory."""

    tweets: tuple[Tweet, ...]
    users: Mapping[str, UserProfile]
    trends: Mapping[str, TrendRecord]

    @cached_property
    def by_hashtag(self) -> dict[str, list[Tweet]]:
        index: dict[str, list[Tweet]] = {}
        for t in self.tweets:
            for tag in t.hashtags:
                index.setdefault(tag, []).append(t)
        return index

    def hashtag_tweets(self, hashtag: str, *, windowed: bool = True,
                       originals: bool = True) -> list[Tweet]:
        """Tweets carrying ``hashtag``; by default originals inside the trend window."""
        tag = hashtag.lower().lstrip("#")
        tweets = list(self.by_hashtag.get(tag, ()))
        if originals:
            tweets = original_only(tweets)
        if windowed and tag in self.trends:
            tweets = window_filter(tweets, self.trends[tag])
        return tweets

    def hashtag_corpus(self, hashtag: str, **kw) -> HashtagCorpus:
        tag = hashtag.lower().lstrip("#")
        if tag not in self.trends:
            raise IntegrityError(f"no trend record for #{tag}")
        return HashtagCorpus(tag, self.trends[tag], tuple(self.hashtag_tweets(tag, **kw)),
                             self.users)


def load_corpus(directory) -> Corpus:
    d = Path(directory)
    tweets = load_tweets(d / TWEETS_FILE)
    users = load_users(d / USERS_FILE) if (d / USERS_FILE).exists() else {}
    trends = load_trends(d / TRENDS_FILE) if (d / TRENDS_FILE).exists() else {}
    return Corpus(tuple(tweets), users, trends)


def dump_corpus(corpus: Corpus, directory) -> None:
    d = Path(directory)
    dump_tweets(corpus.tweets, d / TWEETS_FILE)
    dump_users(corpus.users.values(), d / USERS_FILE)
    dump_trends(corpus.trends.values(), d / TRENDS_FILE)


# ---------------------------------------------------------------- selection

def original_only(tweets: Iterable[Tweet]) -> list[Tweet]:
    return [t for t in tweets if not t.is_retweet]


def window_filter(tweets: Iterable[Tweet], trend: TrendRecord) -> list[Tweet]:
    """Keep tweets from one day before first_seen to one day after last_seen, inclusive."""
    lo = trend.first_seen - WINDOW_MARGIN
    hi = trend.last_seen + WINDOW_MARGIN
    return [t for t in tweets if lo <= t.created_at <= hi]


def language_profile(tweets: Iterable[Tweet]) -> LanguageProfile:
    langs = {t.lang for t in tweets}
    en, ur = "en" in langs, "ur" in langs
    if en and ur:
        return LanguageProfile.BILINGUAL
    if en:
        return LanguageProfile.ENGLISH_ONLY
    if ur:
        return LanguageProfile.URDU_ONLY
    return LanguageProfile.NEITHER
