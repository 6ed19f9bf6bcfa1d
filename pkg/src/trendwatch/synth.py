"""Seeded synthetic corpora with planted manipulation, bot, topic and locality signal.

All randomness comes from ``random.Random`` (MT19937) seeded with strings
derived from the config seed, so output depends on ``(config, seed)`` only.

Planted signal, fixed here so tests are reproducible:

* manipulators: 8-25 tweets, 75-100% before trend time, 10-120 s gaps,
  each tweet a shared 3-6 word template plus 0-2 filler words;
* organic users: 1-6 diverse tweets starting 2 h before to 10 h after trend
  time, 600-7200 s gaps;
* bot profiles are "bot-like" (empty description and friends > 1000 and/or
  followers < 30) with probability 0.8, human profiles with 0.2; the other
  profile flags are drawn with class-conditional rates (``_FLAG_RATES``);
* topic hashtags draw words from disjoint 20-word per-topic vocabularies;
* local trends are first seen in the target country, with at most two
  other countries and no worldwide trend.
"""

from __future__ import annotations

import functools
import random
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ._io import read_json, write_json
from .corpus import Corpus, Tweet, TrendRecord, UserProfile, dump_corpus, load_corpus
from .hashcat import TOPICS, Category

BASE_TIME = datetime(2021, 1, 21, tzinfo=timezone.utc)

MANIP_GAP_S = (10, 120)
ORGANIC_GAP_S = (600, 7200)
MANIP_TWEETS = (8, 25)
ORGANIC_TWEETS = (1, 6)
MANIP_BEFORE_FRACTION = (0.75, 1.0)
TEMPLATE_WORDS = (3, 6)
TEMPLATES_PER_HASHTAG = 4
BOTLIKE_P = {True: 0.8, False: 0.2}
BEHAVIOUR_BOT_RATE = 0.5
TOPIC_VOCAB_SIZE = 20
GENERAL_VOCAB_SIZE = 3000
LOCAL_FRACTION = 0.73

# P(flag) for (bot, human)
_FLAG_RATES = {
    "geo_enabled": (0.10, 0.65),
    "listed": (0.20, 0.75),
    "statuses": (0.90, 0.98),
    "profile_url": (0.15, 0.60),
    "description_url": (0.10, 0.40),
    "verified": (0.00, 0.10),
}

OTHER_COUNTRIES = (
    "India", "United States", "United Kingdom", "Japan", "Australia", "Canada",
    "Turkey", "Saudi Arabia", "United Arab Emirates", "Indonesia", "Brazil", "Nigeria",
)

_LATIN_SYL = ("ka", "lo", "mi", "ra", "te", "su", "na", "vo", "zi", "pe", "do", "gu",
              "ba", "fi", "ho", "ju", "ne", "sa", "ti", "wa", "ye", "xo", "qi", "ce")
_URDU_SYL = ("کا", "لو", "می", "را", "تے", "سو", "نا", "وو", "زی", "پے", "دو", "گو",
             "با", "فی", "ہو", "جو", "نے", "سا", "تی", "وا", "یے", "چو", "قی", "شے")


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_manipulators: int = 0
    n_organic: int = 0
    n_bots: int = 0
    n_humans: int = 0
    n_hashtags_per_category: int = 0
    tweets_per_hashtag: int = 120
    target_country: str = "Pakistan"
    n_manip_hashtags: int = 8
    n_other_hashtags: int = 0
    n_urdu_hashtags_per_category: int = 0
    n_crowd_users: int = 50

    def __post_init__(self):
        for k, v in asdict(self).items():
            if isinstance(v, int) and k != "seed" and v < 0:
                raise ValueError(f"{k} must be >= 0")


@dataclass
class LabelledCorpus:
    corpus: Corpus
    user_truth: dict[str, dict] = field(default_factory=dict)  # uid -> {manipulator, bot}
    hashtag_truth: dict[str, dict] = field(default_factory=dict)  # tag -> {category, local}

    def truth_dict(self) -> dict:
        return {"users": self.user_truth, "hashtags": self.hashtag_truth}


def _rng(seed: int, part: str) -> random.Random:
    return random.Random(f"{seed}:{part}")


def _words(rng: random.Random, syllables, n: int, taken: set) -> list[str]:
    out = []
    while len(out) < n:
        w = "".join(rng.choice(syllables) for _ in range(rng.randint(2, 4)))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


@functools.lru_cache(maxsize=16)
def _vocabulary(seed: int):
    """General words plus disjoint English and Urdu topic vocabularies for one seed."""
    taken: set = set()
    rng = _rng(seed, "vocab")
    general = tuple(_words(rng, _LATIN_SYL, GENERAL_VOCAB_SIZE, taken))
    topic = {c: tuple(_words(rng, _LATIN_SYL, TOPIC_VOCAB_SIZE, taken)) for c in TOPICS}
    urdu = {c: tuple(_words(rng, _URDU_SYL, TOPIC_VOCAB_SIZE, taken)) for c in TOPICS}
    return general, topic, urdu


def _profile(uid: str, is_bot: bool, rng: random.Random) -> UserProfile:
    botlike = rng.random() < BOTLIKE_P[is_bot]
    k = 0 if is_bot else 1

    def flag(name):
        return rng.random() < _FLAG_RATES[name][k]

    if botlike:
        mode = rng.randrange(3)
        friends = rng.randint(1001, 8000) if mode != 1 else rng.randint(0, 1000)
        followers = rng.randint(0, 29) if mode != 0 else rng.randint(30, 3000)
        description = ""
    else:
        friends = rng.randint(20, 1000)
        followers = rng.randint(30, 20000)
        description = "profile text of " + uid
    return UserProfile(
        id=uid,
        description=description,
        description_url=("https://example.org/" + uid) if description and flag("description_url") else "",
        friends_count=friends,
        followers_count=followers,
        geo_enabled=flag("geo_enabled"),
        listed_count=rng.randint(1, 200) if flag("listed") else 0,
        statuses_count=rng.randint(1, 50000) if flag("statuses") else 0,
        profile_url=("https://example.com/" + uid) if flag("profile_url") else "",
        verified=flag("verified"),
    )


def _local_trend(tag: str, first_seen: datetime, hours: int, target: str, rng) -> TrendRecord:
    return TrendRecord(tag, target, first_seen, first_seen + timedelta(hours=hours),
                       first_trend_location=target, n_other_countries=rng.randint(0, 2),
                       trended_worldwide=False)


def _global_trend(tag: str, first_seen: datetime, hours: int, target: str, rng) -> TrendRecord:
    if rng.random() < 0.25:
        # started at home but spread worldwide
        return TrendRecord(tag, target, first_seen, first_seen + timedelta(hours=hours),
                           first_trend_location=target, n_other_countries=rng.randint(10, 60),
                           trended_worldwide=True)
    n_other = rng.randint(1, 60)
    return TrendRecord(tag, target, first_seen, first_seen + timedelta(hours=hours),
                       first_trend_location=rng.choice(OTHER_COUNTRIES), n_other_countries=n_other,
                       trended_worldwide=n_other >= 20 and rng.random() < 0.5)


def generate(config: SynthConfig) -> LabelledCorpus:
    seed = config.seed
    general, topic_vocab, urdu_vocab = _vocabulary(seed)

    users: dict[str, UserProfile] = {}
    user_truth: dict[str, dict] = {}
    trends: dict[str, TrendRecord] = {}
    hashtag_truth: dict[str, dict] = {}
    raw: list[tuple[datetime, str, str, str, tuple[str, ...]]] = []  # time, uid, text, lang, tags

    # -- manipulation-target trends and behavioural users
    trng = _rng(seed, "trends")
    n_behaviour = config.n_manipulators + config.n_organic
    manip_tags = []
    if n_behaviour:
        for k in range(max(1, config.n_manip_hashtags)):
            tag = f"trend{k}" + trng.choice(general)
            first = BASE_TIME + timedelta(days=1 + k % 5, hours=trng.randint(6, 20))
            trends[tag] = _local_trend(tag, first, trng.randint(1, 6), config.target_country, trng)
            hashtag_truth[tag] = {"category": Category.OTHER.value, "local": True}
            manip_tags.append(tag)
    templates = {
        tag: [[trng.choice(general) for _ in range(trng.randint(*TEMPLATE_WORDS))]
              for _ in range(TEMPLATES_PER_HASHTAG)]
        for tag in manip_tags
    }

    brng = _rng(seed, "behaviour")
    prng = _rng(seed, "profiles")
    for i in range(n_behaviour):
        uid = f"u{len(users):06d}"
        is_manip = i < config.n_manipulators
        is_bot = prng.random() < BEHAVIOUR_BOT_RATE
        users[uid] = _profile(uid, is_bot, prng)
        user_truth[uid] = {"manipulator": is_manip, "bot": is_bot}
        tag = brng.choice(manip_tags)
        t0 = trends[tag].first_seen
        if is_manip:
            n = brng.randint(*MANIP_TWEETS)
            n_before = min(n, max(1, round(n * brng.uniform(*MANIP_BEFORE_FRACTION))))
            gaps = [brng.randint(*MANIP_GAP_S) for _ in range(n)]
            start = t0 - timedelta(seconds=sum(gaps[:n_before]) + brng.randint(60, 3600))
            times, t = [], start
            for j in range(n_before):
                times.append(t)
                t += timedelta(seconds=gaps[j])
            t = t0 + timedelta(seconds=brng.randint(0, 3600))
            for j in range(n_before, n):
                times.append(t)
                t += timedelta(seconds=gaps[j])
            for t in times:
                words = list(brng.choice(templates[tag]))
                for _ in range(brng.randint(0, 2)):
                    words.insert(brng.randint(0, len(words)), brng.choice(general))
                raw.append((t, uid, " ".join(words) + f" #{tag}", "en", (tag,)))
        else:
            n = brng.randint(*ORGANIC_TWEETS)
            t = t0 + timedelta(seconds=brng.randint(-2 * 3600, 10 * 3600))
            for _ in range(n):
                words = [brng.choice(general) for _ in range(brng.randint(6, 14))]
                raw.append((t, uid, " ".join(words) + f" #{tag}", "en", (tag,)))
                t += timedelta(seconds=brng.randint(*ORGANIC_GAP_S))

    # -- profile-only accounts
    for i in range(config.n_bots + config.n_humans):
        uid = f"u{len(users):06d}"
        is_bot = i < config.n_bots
        users[uid] = _profile(uid, is_bot, prng)
        user_truth[uid] = {"manipulator": False, "bot": is_bot}

    # -- topic hashtags, posted by a crowd of organic accounts
    crng = _rng(seed, "topics")
    plan = []
    for c in TOPICS:
        plan += [(c, "en")] * config.n_hashtags_per_category
        plan += [(c, "ur")] * config.n_urdu_hashtags_per_category
    plan += [(Category.OTHER, "en")] * config.n_other_hashtags
    crowd = []
    if plan:
        for _ in range(max(1, config.n_crowd_users)):
            uid = f"u{len(users):06d}"
            is_bot = crng.random() < BEHAVIOUR_BOT_RATE
            users[uid] = _profile(uid, is_bot, prng)
            user_truth[uid] = {"manipulator": False, "bot": is_bot}
            crowd.append(uid)
    for k, (cat, lang) in enumerate(plan):
        if cat is Category.OTHER:
            vocab = general
        else:
            vocab = (topic_vocab if lang == "en" else urdu_vocab)[cat]
        tag = f"{cat.value.lower()}{k}" + crng.choice(general)
        first = BASE_TIME + timedelta(days=1 + k % 6, hours=crng.randint(0, 23))
        hours = crng.randint(1, 8)
        local = crng.random() < LOCAL_FRACTION
        make = _local_trend if local else _global_trend
        trends[tag] = make(tag, first, hours, config.target_country, crng)
        hashtag_truth[tag] = {"category": cat.value, "local": local}
        span = int((trends[tag].last_seen - first).total_seconds()) + 2 * 86400
        for _ in range(config.tweets_per_hashtag):
            t = first - timedelta(days=1) + timedelta(seconds=crng.randint(0, span))
            words = [crng.choice(vocab) for _ in range(crng.randint(6, 12))]
            raw.append((t, crng.choice(crowd), " ".join(words) + f" #{tag}", lang, (tag,)))

    raw.sort(key=lambda r: (r[0], r[1], r[2]))
    tweets = tuple(
        Tweet(f"t{i:08d}", uid, text, ts, lang, tags, False)
        for i, (ts, uid, text, lang, tags) in enumerate(raw)
    )
    return LabelledCorpus(Corpus(tweets, users, trends), user_truth, hashtag_truth)


def generate_locality_set(n: int = 193, local_fraction: float = LOCAL_FRACTION,
                          label_noise: float = 0.03, seed: int = 0,
                          target_country: str = "Pakistan") -> list[tuple[TrendRecord, bool]]:
    """Trend records with local/global labels; ``round(noise * n)`` labels are flipped."""
    rng = _rng(seed, "locality")
    n_local = round(local_fraction * n)
    rows = []
    for k in range(n):
        tag = f"tag{k}"
        first = BASE_TIME + timedelta(hours=rng.randint(0, 24 * 7))
        hours = rng.randint(1, 10)
        local = k < n_local
        make = _local_trend if local else _global_trend
        rows.append((make(tag, first, hours, target_country, rng), local))
    rng.shuffle(rows)
    for i in rng.sample(range(n), round(label_noise * n)):
        rows[i] = (rows[i][0], not rows[i][1])
    return rows


def write_labelled(lc: LabelledCorpus, directory) -> None:
    dump_corpus(lc.corpus, directory)
    write_json(Path(directory) / "truth.json", lc.truth_dict())


def load_labelled(directory) -> LabelledCorpus:
    corpus = load_corpus(directory)
    truth = read_json(Path(directory) / "truth.json")
    return LabelledCorpus(corpus, truth.get("users", {}), truth.get("hashtags", {}))
