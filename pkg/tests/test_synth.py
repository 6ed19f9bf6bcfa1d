import filecmp
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trendwatch.corpus import load_corpus
from trendwatch.features import bot_feature_table, manip_feature_table
from trendwatch.locality import locality_features
from trendwatch.synth import SynthConfig, generate, generate_locality_set, load_labelled, write_labelled


@pytest.fixture(scope="module")
def mt():
    return generate(SynthConfig(seed=42, n_manipulators=500, n_organic=500))


def test_user_count(mt):
    assert len(mt.corpus.users) == 1000
    assert sum(t["manipulator"] for t in mt.user_truth.values()) == 500


def test_byte_identical(tmp_path):
    cfg = SynthConfig(seed=7, n_manipulators=20, n_organic=20, n_bots=5, n_humans=5, n_hashtags_per_category=1)
    write_labelled(generate(cfg), tmp_path / "a")
    write_labelled(generate(cfg), tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["trends.jsonl", "truth.json", "tweets.jsonl", "users.jsonl"]
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert not mismatch and not errors


def test_different_seeds_differ():
    a = generate(SynthConfig(seed=1, n_manipulators=5, n_organic=5))
    b = generate(SynthConfig(seed=2, n_manipulators=5, n_organic=5))
    assert a.corpus.tweets != b.corpus.tweets


def test_manipulators_separate(mt):
    table = manip_feature_table(mt.corpus)
    is_manip = {u: t["manipulator"] for u, t in mt.user_truth.items()}
    for field in ("tweets_before", "sim_score"):
        m = np.mean([getattr(f, field) for u, f in table.items() if is_manip[u]])
        o = np.mean([getattr(f, field) for u, f in table.items() if not is_manip[u]])
        assert m > o


def test_bot_profiles_planted():
    lc = generate(SynthConfig(seed=3, n_bots=300, n_humans=300))
    table = bot_feature_table(lc.corpus.users.values())
    def rate(bot):
        rows = [f for u, f in table.items() if lc.user_truth[u]["bot"] == bot]
        return np.mean([f.friends_gt_1000 or f.followers_lt_30 for f in rows])
    assert rate(True) > 0.6 > 0.4 > rate(False)


def test_topic_hashtags_labelled():
    lc = generate(SynthConfig(seed=5, n_hashtags_per_category=2, tweets_per_hashtag=10))
    topical = [h for h, t in lc.hashtag_truth.items() if t["category"] != "Other"]
    assert len(topical) == 12
    for h in topical:
        f = locality_features(lc.corpus.trends[h])
        if lc.hashtag_truth[h]["local"]:
            assert f.first_trend_is_target


def test_locality_set_mix():
    rows = generate_locality_set(seed=0, label_noise=0.0)
    assert len(rows) == 193 and sum(local for _, local in rows) == 141
    noisy = generate_locality_set(seed=0, label_noise=0.03)
    flipped = sum(a[1] != b[1] for a, b in zip(rows, noisy))
    assert flipped == round(0.03 * 193)


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        SynthConfig(n_bots=-1)


# ---------------------------------------------------------------- invariants

CONFIGS = st.builds(
    SynthConfig,
    seed=st.integers(0, 2**32),
    n_manipulators=st.integers(0, 3),
    n_organic=st.integers(0, 3),
    n_bots=st.integers(0, 2),
    n_humans=st.integers(0, 2),
    n_hashtags_per_category=st.integers(0, 1),
    tweets_per_hashtag=st.integers(0, 3),
    n_manip_hashtags=st.integers(1, 2),
    n_crowd_users=st.integers(1, 2),
)


@pytest.mark.invariant
@given(CONFIGS)
@settings(max_examples=1000)
def test_generation_deterministic_labelled_and_ingestible(cfg):
    a, b = generate(cfg), generate(cfg)
    assert a.truth_dict() == b.truth_dict() and a.corpus.tweets == b.corpus.tweets
    assert set(a.user_truth) == set(a.corpus.users)
    assert set(a.hashtag_truth) == set(a.corpus.trends)
    assert len(a.corpus.users) >= cfg.n_manipulators + cfg.n_organic + cfg.n_bots + cfg.n_humans
    with tempfile.TemporaryDirectory() as d:
        write_labelled(a, d)
        back = load_labelled(d)
        assert back.corpus.tweets == a.corpus.tweets
        assert back.corpus.users == a.corpus.users
        assert back.corpus.trends == a.corpus.trends
        assert back.truth_dict() == a.truth_dict()
        assert load_corpus(Path(d)).tweets == a.corpus.tweets
