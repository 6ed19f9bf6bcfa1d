import json
from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from conftest import T0, at, profile, tweet
from trendwatch.corpus import (
    Corpus,
    HashtagCorpus,
    LanguageProfile,
    TrendRecord,
    Tweet,
    UserProfile,
    dump_corpus,
    dump_tweets,
    language_profile,
    load_corpus,
    load_trends,
    load_tweets,
    load_users,
    original_only,
    parse_timestamp,
    window_filter,
)
from trendwatch.errors import IntegrityError, InvalidTimestamp, MalformedRecord, MissingProfile

LINE = ('{"id":"1","user_id":"u1","text":"go team #pakvsa","created_at":"2021-01-24T13:00:00Z",'
        '"lang":"en","hashtags":["pakvsa"],"is_retweet":false}')


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return p


class TestLoadTweets:
    def test_single_record(self, tmp_path):
        [t] = load_tweets(write(tmp_path, "t.jsonl", [LINE]))
        assert t == Tweet("1", "u1", "go team #pakvsa", at(13), "en", ("pakvsa",), False)

    def test_missing_created_at(self, tmp_path):
        obj = json.loads(LINE)
        del obj["created_at"]
        with pytest.raises(MalformedRecord) as exc:
            load_tweets(write(tmp_path, "t.jsonl", [json.dumps(obj)]))
        assert exc.value.line == 1

    def test_empty_file(self, tmp_path):
        assert load_tweets(write(tmp_path, "t.jsonl", [])) == []

    def test_bad_json_reports_line(self, tmp_path):
        with pytest.raises(MalformedRecord) as exc:
            load_tweets(write(tmp_path, "t.jsonl", [LINE, "{nope"]))
        assert exc.value.line == 2

    def test_bad_timestamp(self, tmp_path):
        obj = json.loads(LINE)
        obj["created_at"] = "yesterday"
        with pytest.raises(InvalidTimestamp):
            load_tweets(write(tmp_path, "t.jsonl", [json.dumps(obj)]))

    def test_extra_fields_ignored_and_order_kept(self, tmp_path):
        a = json.loads(LINE)
        b = dict(a, id="2", extra={"x": 1})
        out = load_tweets(write(tmp_path, "t.jsonl", [json.dumps(b), json.dumps(a)]))
        assert [t.id for t in out] == ["2", "1"]

    def test_hashtags_extracted_when_absent(self, tmp_path):
        obj = json.loads(LINE)
        del obj["hashtags"]
        obj["text"] = "Match day #PakVsSA and #Cricket_2021!"
        [t] = load_tweets(write(tmp_path, "t.jsonl", [json.dumps(obj)]))
        assert t.hashtags == ("pakvssa", "cricket_2021")

    def test_duplicate_id(self, tmp_path):
        with pytest.raises(MalformedRecord):
            load_tweets(write(tmp_path, "t.jsonl", [LINE, LINE]))

    def test_offsets_normalised_to_utc(self):
        assert parse_timestamp("2021-01-24T18:00:00.750+05:00") == at(13)


def test_load_users_and_trends(tmp_path):
    u = {"id": "u1", "description": "hi", "description_url": "", "friends_count": 5,
         "followers_count": 7, "geo_enabled": True, "listed_count": 0, "statuses_count": 3,
         "profile_url": "", "verified": False}
    users = load_users(write(tmp_path, "u.jsonl", [json.dumps(u)]))
    assert users["u1"].followers_count == 7 and not users["u1"].description_url_present
    tr = {"hashtag": "PakvsSA", "location": "Pakistan", "first_seen": "2021-01-24T06:00:00Z",
          "last_seen": "2021-01-24T08:00:00Z", "first_trend_location": "Pakistan",
          "n_other_countries": 2, "trended_worldwide": False}
    trends = load_trends(write(tmp_path, "tr.jsonl", [json.dumps(tr)]))
    assert trends["pakvssa"].first_seen == at(6)


def test_negative_count_rejected(tmp_path):
    u = {"id": "u1", "friends_count": -1, "followers_count": 0, "geo_enabled": False,
         "listed_count": 0, "statuses_count": 0, "verified": False}
    with pytest.raises(MalformedRecord):
        load_users(write(tmp_path, "u.jsonl", [json.dumps(u)]))


def test_original_only():
    o1, r, o2 = tweet(1), tweet(2, rt=True), tweet(3)
    assert original_only([o1, r, o2]) == [o1, o2]
    assert original_only([r, r]) == []
    assert original_only([o1, o2]) == [o1, o2]


class TestWindow:
    trend = TrendRecord("tag", "Pakistan", at(12), at(12))

    def test_inside(self):
        t = tweet(1, when=at(13))
        assert window_filter([t], self.trend) == [t]

    def test_two_days_before(self):
        assert window_filter([tweet(1, when=at(12 - 48))], self.trend) == []

    def test_boundaries_inclusive(self):
        lo = tweet(1, when=at(12) - timedelta(seconds=86400))
        hi = tweet(2, when=at(12) + timedelta(seconds=86400))
        out = tweet(3, when=at(12) + timedelta(seconds=86401))
        assert window_filter([lo, hi, out], self.trend) == [lo, hi]

    def test_anchored_on_full_span(self):
        trend = TrendRecord("tag", "Pakistan", at(0), at(10))
        t = tweet(1, when=at(10 + 23))
        assert window_filter([t], trend) == [t]


@pytest.mark.parametrize("langs, expected", [
    (["en", "en"], LanguageProfile.ENGLISH_ONLY),
    (["en", "ur", "und"], LanguageProfile.BILINGUAL),
    (["fr", "und"], LanguageProfile.NEITHER),
    (["ur"], LanguageProfile.URDU_ONLY),
    ([], LanguageProfile.NEITHER),
])
def test_language_profile(langs, expected):
    assert language_profile([tweet(i, lang=l) for i, l in enumerate(langs)]) == expected


def test_hashtag_corpus_integrity():
    trend = TrendRecord("tag", "Pakistan", T0, T0)
    users = {"u1": profile("u1")}
    HashtagCorpus("tag", trend, (tweet(1),), users)
    with pytest.raises(MissingProfile):
        HashtagCorpus("tag", trend, (tweet(1, user="ghost"),), users)
    with pytest.raises(IntegrityError):
        HashtagCorpus("tag", trend, (tweet(1, tags=("other",)),), users)


def test_tweet_hashtag_validation():
    with pytest.raises(IntegrityError):
        tweet(1, tags=("#bad",))
    with pytest.raises(IntegrityError):
        tweet(1, tags=("two words",))
    with pytest.raises(IntegrityError):
        Tweet("", "u", "t", T0, "en")


def test_corpus_dir_round_trip(tmp_path):
    c = Corpus((tweet(1), tweet(2, rt=True)), {"u1": profile("u1", followers_count=3)},
               {"tag": TrendRecord("tag", "Pakistan", T0, at(2), "Pakistan", 1, False)})
    dump_corpus(c, tmp_path)
    back = load_corpus(tmp_path)
    assert back.tweets == c.tweets and back.users == c.users and back.trends == c.trends
    assert back.hashtag_tweets("TAG") == [tweet(1)]


# ---------------------------------------------------------------- invariants

LANGS = st.sampled_from(["en", "ur", "und", "fr"])
TAG = st.sampled_from(["tag", "pakvsa", "bb14", "fajr_2021"])


_ROW = st.tuples(
    st.sampled_from(["u1", "u2", "u3"]),
    st.text(alphabet="ab #\u00f1\u06a9\"\\", max_size=12),
    st.integers(-4 * 86400, 4 * 86400),
    LANGS,
    st.lists(TAG, max_size=3, unique=True),
    st.booleans(),
)


def _build(rows):
    return [Tweet(f"t{i}", u, text, T0 + timedelta(seconds=s), lang, tuple(tags), rt)
            for i, (u, text, s, lang, tags, rt) in enumerate(rows)]


def tweets(max_size=12):
    return st.lists(_ROW, max_size=max_size).map(_build)


@st.composite
def trends(draw):
    a = draw(st.integers(-86400, 86400))
    b = draw(st.integers(a, a + 86400))
    return TrendRecord("tag", "Pakistan", T0 + timedelta(seconds=a), T0 + timedelta(seconds=b))


@pytest.mark.invariant
@given(tweets(), trends())
def test_window_filter_subset_and_idempotent(ts, trend):
    once = window_filter(ts, trend)
    assert all(t in ts for t in once)
    assert window_filter(once, trend) == once


@pytest.mark.invariant
@given(tweets())
def test_original_only_idempotent(ts):
    once = original_only(ts)
    assert original_only(once) == once


@pytest.mark.invariant
@given(tweets(), st.sets(st.sampled_from(["u1", "u2", "u3"])))
def test_hashtag_corpus_builds_iff_consistent(ts, known):
    trend = TrendRecord("tag", "Pakistan", T0, T0)
    users = {u: UserProfile(u) for u in known}
    ok = all("tag" in t.hashtags and t.user_id in users for t in ts)
    try:
        HashtagCorpus("tag", trend, tuple(ts), users)
        built = True
    except IntegrityError:
        built = False
    assert built == ok


@pytest.mark.invariant
@given(tweets())
def test_jsonl_round_trip(tmp_path_factory, ts):
    path = tmp_path_factory.mktemp("rt") / "tweets.jsonl"
    dump_tweets(ts, path)
    assert load_tweets(path) == ts
