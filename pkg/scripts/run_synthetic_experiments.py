#!/usr/bin/env python3
"""Held-out accuracy of the three detectors on synthetic corpora, over several seeds.

Usage:
    python scripts/run_synthetic_experiments.py --seeds 0 1 2 --out results.json
"""

import argparse
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from trendwatch import features
from trendwatch.locality import locality_dataset, locality_features, train_locality
from trendwatch.ml import Dataset, LogRegConfig, evaluate, train_logreg, train_test_split
from trendwatch.synth import SynthConfig, generate, generate_locality_set


@dataclass
class ExperimentConfig:
    n_manipulators: int = 510
    n_organic: int = 500
    n_bots: int = 1000
    n_humans: int = 1000
    n_locality: int = 193
    label_noise: float = 0.03
    train_fraction: float = 0.7


def held_out(ds: Dataset, fit, train_fraction: float, seed: int) -> float:
    train, test = train_test_split(ds, train_fraction, seed)
    model = fit(train)
    return evaluate(model.predict(test.X).tolist(), test.y.tolist(), [0, 1]).accuracy


def manipulator_accuracy(cfg: ExperimentConfig, seed: int) -> float:
    lc = generate(SynthConfig(seed=seed, n_manipulators=cfg.n_manipulators, n_organic=cfg.n_organic))
    table = features.manip_feature_table(lc.corpus)
    X = np.array([v.as_row() for v in table.values()])
    y = [int(lc.user_truth[u]["manipulator"]) for u in table]
    return held_out(Dataset(X, y, features.MANIP_COLUMNS), lambda tr: train_logreg(tr, LogRegConfig()),
                    cfg.train_fraction, seed)


def bot_accuracy(cfg: ExperimentConfig, seed: int) -> float:
    lc = generate(SynthConfig(seed=seed, n_bots=cfg.n_bots, n_humans=cfg.n_humans))
    table = features.bot_feature_table(lc.corpus.users.values())
    X = np.array([v.as_row() for v in table.values()])
    y = [int(lc.user_truth[u]["bot"]) for u in table]
    return held_out(Dataset(X, y, features.BOT_COLUMNS), lambda tr: train_logreg(tr, LogRegConfig()),
                    cfg.train_fraction, seed)


def locality_accuracy(cfg: ExperimentConfig, seed: int) -> float:
    rows = [(locality_features(t), local)
            for t, local in generate_locality_set(cfg.n_locality, label_noise=cfg.label_noise, seed=seed)]
    ds = locality_dataset(rows)

    def fit(train):
        from trendwatch.locality import LocalityFeatures
        return train_locality([(LocalityFeatures(bool(x[0]), int(x[1]), bool(x[2])), bool(t))
                               for x, t in zip(train.X, train.y)])

    return held_out(ds, fit, cfg.train_fraction, seed)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 42])
    p.add_argument("--out", help="write per-seed results as JSON")
    args = p.parse_args()
    cfg = ExperimentConfig()

    rows = []
    print(f"{'seed':>5} {'manip':>8} {'bot':>8} {'local':>8} {'secs':>6}")
    for seed in args.seeds:
        t = time.perf_counter()
        row = {
            "seed": seed,
            "manipulator": manipulator_accuracy(cfg, seed),
            "bot": bot_accuracy(cfg, seed),
            "locality": locality_accuracy(cfg, seed),
        }
        rows.append(row)
        print(f"{seed:>5} {row['manipulator']:>8.4f} {row['bot']:>8.4f} {row['locality']:>8.4f} "
              f"{time.perf_counter() - t:>6.1f}")
    for key in ("manipulator", "bot", "locality"):
        vals = [r[key] for r in rows]
        print(f"{key:>12}: mean {np.mean(vals):.4f}  min {np.min(vals):.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"config": asdict(cfg), "results": rows}, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
