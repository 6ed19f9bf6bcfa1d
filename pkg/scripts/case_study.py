#!/usr/bin/env python3
"""Synthetic trend case study: who tweets a manipulated hashtag, and when.

Generates a corpus, trains the manipulator detector on half the users, labels
everyone, and writes the hourly tweet counts and tweets-per-user series for
the busiest trend as long-format CSVs for plotting.

Usage:
    python scripts/case_study.py --seed 7 --out case_study/
"""

import argparse
from collections import Counter
from pathlib import Path

import numpy as np

from trendwatch import analyzer, features
from trendwatch._io import atomic_write_text, dumps
from trendwatch.ml import Dataset, train_logreg, train_test_split
from trendwatch.synth import SynthConfig, generate


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="case_study")
    p.add_argument("--bin-width", type=int, default=3600)
    args = p.parse_args()
    out = Path(args.out)

    lc = generate(SynthConfig(seed=args.seed, n_manipulators=200, n_organic=200, n_manip_hashtags=3))
    corpus = lc.corpus
    table = features.manip_feature_table(corpus)
    uids = list(table)
    X = np.array([table[u].as_row() for u in uids])
    y = [int(lc.user_truth[u]["manipulator"]) for u in uids]
    train, _ = train_test_split(Dataset(X, y, features.MANIP_COLUMNS), 0.5, args.seed)
    model = train_logreg(train)
    predicted = dict(zip(uids, model.predict(X).tolist()))

    tag = Counter(t.hashtags[0] for t in corpus.tweets).most_common(1)[0][0]
    tweets = corpus.hashtag_tweets(tag)
    part = lambda t: "manipulator" if predicted.get(t.user_id) else "organic"

    counts = analyzer.time_series(tweets, args.bin_width, part, ("manipulator", "organic"))
    per_user = analyzer.tweets_per_user_series(tweets, args.bin_width, part)
    mix = analyzer.user_mix({u: (lc.user_truth[u]["bot"], bool(predicted[u])) for u in uids})
    atomic_write_text(out / "tweets_per_bin.csv", counts.plot_csv())
    atomic_write_text(out / "tweets_per_user.csv", per_user.plot_csv())
    atomic_write_text(out / "user_mix.json", dumps(mix.to_dict()))

    first = corpus.trends[tag].first_seen
    before = sum(1 for t in tweets if part(t) == "manipulator" and t.created_at < first)
    total = sum(1 for t in tweets if part(t) == "manipulator")
    print(f"#{tag}: {len(tweets)} tweets, trend first seen {first:%Y-%m-%d %H:%M}Z")
    print(f"flagged-manipulator tweets before trend: {before}/{total}")
    print(f"user mix: {mix.to_dict()}")
    print(f"series written to {out}/")


if __name__ == "__main__":
    main()
