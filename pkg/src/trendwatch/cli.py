"""Command-line pipeline: synth, validate, features, train, classify, analyze, evaluate.

Exit status is 0 on success, 1 on a data error and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION, __version__
from . import analyzer, features, hashcat, locality
from ._io import atomic_write_text, dumps, read_json, write_json
from .corpus import Corpus, language_profile, LanguageProfile, load_corpus
from .errors import (
    DegenerateData,
    InsufficientClassData,
    InsufficientTweets,
    MissingProfile,
    TrendwatchError,
)
from .hashcat import Category, CategoryModelBundle
from .ml import (
    Dataset,
    LogRegConfig,
    TreeConfig,
    evaluate,
    load_model,
    save_model,
    train_logreg,
    train_test_split,
    train_tree,
)
from .synth import SynthConfig, generate, write_labelled

MODEL_FILE = "model.json"
METRICS_FILE = "metrics.json"
TRUTH_FILE = "truth.json"


@dataclass
class RunConfig:
    target_country: str = "Pakistan"
    bin_width_s: int = 3600
    train_fraction: float = 0.7
    seed: int = 0
    min_hashtag_tweets: int = hashcat.MIN_TWEETS
    learning_rate: float = 0.1
    epochs: int = 1000
    l2: float = 1e-4
    max_depth: int = locality.DEFAULT_TREE.max_depth
    min_leaf: int = locality.DEFAULT_TREE.min_leaf

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.min_hashtag_tweets < 1:
            raise ValueError("min_hashtag_tweets must be >= 1")
        if self.bin_width_s <= 0:
            raise ValueError("bin_width_s must be positive")

    def logreg(self, scale: bool = True) -> LogRegConfig:
        return LogRegConfig(self.learning_rate, self.epochs, self.l2, scale)


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve_config(args, file_values: dict[str, str]) -> RunConfig:
    kw = {}
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            kw[f.name] = flag
        elif f.name in file_values:
            kw[f.name] = type(f.default)(file_values[f.name])
    return RunConfig(**kw)


# ------------------------------------------------------------------ helpers

def _emit(text: str, out) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _report(obj, args) -> None:
    _emit(obj.to_csv() if args.csv else dumps(obj.to_dict()), args.out)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _truth(args) -> dict:
    path = args.labels or Path(args.corpus) / TRUTH_FILE
    return read_json(path)


def _fmt(p: float) -> str:
    return repr(float(p))


def _manip_dataset(corpus: Corpus):
    table = features.manip_feature_table(corpus)
    X = np.array([v.as_row() for v in table.values()], dtype=float).reshape(-1, len(features.MANIP_COLUMNS))
    return list(table), X


def _bot_dataset(corpus: Corpus):
    table = features.bot_feature_table(corpus.users.values())
    X = np.array([v.as_row() for v in table.values()], dtype=float).reshape(-1, len(features.BOT_COLUMNS))
    return list(table), X


def _fit_and_score(ds: Dataset, cfg: RunConfig, fit):
    train, test = train_test_split(ds, cfg.train_fraction, cfg.seed)
    model = fit(train)
    pred = model.predict(test.X)
    return model, evaluate(pred.tolist(), test.y.tolist(), [0, 1])


def _category_labels(*label_lists) -> list[str]:
    """Categories seen in any list, in canonical order; absent classes stay out of macro averages."""
    seen = set().union(*map(set, label_lists))
    return [c.value for c in Category if c.value in seen]


def _hashtag_slices(corpus: Corpus):
    """(tag, tweets, profile) for every trend hashtag, sorted by tag."""
    for tag in sorted(corpus.trends):
        tweets = corpus.hashtag_tweets(tag)
        yield tag, tweets, language_profile(tweets)


# ------------------------------------------------------------------ commands

def cmd_synth(args, cfg: RunConfig) -> None:
    sc = SynthConfig(
        seed=cfg.seed,
        n_manipulators=args.n_manipulators,
        n_organic=args.n_organic,
        n_bots=args.n_bots,
        n_humans=args.n_humans,
        n_hashtags_per_category=args.n_hashtags_per_category,
        tweets_per_hashtag=args.tweets_per_hashtag,
        target_country=cfg.target_country,
        n_other_hashtags=args.n_other_hashtags,
        n_urdu_hashtags_per_category=args.n_urdu_hashtags_per_category,
    )
    write_labelled(generate(sc), args.out)


def cmd_validate(args, cfg: RunConfig) -> None:
    corpus = load_corpus(args.corpus)
    for t in corpus.tweets:
        if t.user_id not in corpus.users:
            raise MissingProfile(t.user_id)
    summary = {
        "tweets": len(corpus.tweets),
        "retweets": sum(t.is_retweet for t in corpus.tweets),
        "users": len(corpus.users),
        "trends": len(corpus.trends),
        "language_distribution": analyzer.language_distribution(corpus.tweets).to_dict()["counts"],
        "valid": True,
    }
    _emit(dumps(summary), args.out)


def cmd_features(args, cfg: RunConfig) -> None:
    corpus = load_corpus(args.corpus)
    if args.kind == "manip":
        text = features.feature_csv(features.manip_feature_table(corpus), features.MANIP_COLUMNS)
    else:
        text = features.feature_csv(features.bot_feature_table(corpus.users.values()), features.BOT_COLUMNS)
    _emit(text, args.out)


def cmd_train(args, cfg: RunConfig) -> None:
    corpus = load_corpus(args.corpus)
    truth = _truth(args)
    out = Path(args.out)
    if args.kind in ("manip", "bot"):
        key = "manipulator" if args.kind == "manip" else "bot"
        uids, X = _manip_dataset(corpus) if args.kind == "manip" else _bot_dataset(corpus)
        keep = [i for i, u in enumerate(uids) if u in truth["users"]]
        y = [int(truth["users"][uids[i]][key]) for i in keep]
        names = features.MANIP_COLUMNS if args.kind == "manip" else features.BOT_COLUMNS
        ds = Dataset(X[keep], y, names)
        model, metrics = _fit_and_score(ds, cfg, lambda tr: train_logreg(tr, cfg.logreg()))
        save_model(model, out / MODEL_FILE)
        write_json(out / METRICS_FILE, metrics.to_dict())
    elif args.kind == "locality":
        rows = []
        for tag in sorted(corpus.trends):
            if tag in truth["hashtags"]:
                f = locality.locality_features(corpus.trends[tag], cfg.target_country)
                rows.append((f, bool(truth["hashtags"][tag]["local"])))
        ds = locality.locality_dataset(rows)
        tree_cfg = TreeConfig(cfg.max_depth if cfg.max_depth > 0 else None, cfg.min_leaf)
        model, metrics = _fit_and_score(ds, cfg, lambda tr: train_tree(tr, tree_cfg, n_classes=2))
        save_model(model, out / MODEL_FILE)
        write_json(out / METRICS_FILE, metrics.to_dict())
    else:
        _train_hashcat(corpus, truth, cfg, out)


def _train_hashcat(corpus: Corpus, truth: dict, cfg: RunConfig, out: Path) -> None:
    by_lang = {"en": [], "ur": []}
    for tag, tweets, profile in _hashtag_slices(corpus):
        if tag not in truth["hashtags"]:
            continue
        cat = Category.parse(truth["hashtags"][tag]["category"])
        if profile is LanguageProfile.ENGLISH_ONLY:
            by_lang["en"].append((hashcat.hashtag_document(tweets, "en"), cat))
        elif profile is LanguageProfile.URDU_ONLY:
            by_lang["ur"].append((hashcat.hashtag_document(tweets, "ur"), cat))
    all_metrics = {}
    for lang, labelled in by_lang.items():
        if not labelled:
            continue
        cats = list(Category)
        idx = Dataset(np.arange(len(labelled))[:, None], [cats.index(c) for _, c in labelled])
        try:
            train, test = train_test_split(idx, cfg.train_fraction, cfg.seed)
            bundle = hashcat.train_bundle([labelled[int(i)] for i in train.X[:, 0]], lang,
                                          cfg.logreg(scale=False))
        except (InsufficientClassData, DegenerateData, TrendwatchError) as exc:
            print(f"warning: skipping {lang} bundle: {type(exc).__name__}: {exc}", file=sys.stderr)
            continue
        pred = [hashcat.classify_document(bundle, labelled[int(i)][0]).label.value for i in test.X[:, 0]]
        truth_l = [labelled[int(i)][1].value for i in test.X[:, 0]]
        all_metrics[lang] = evaluate(pred, truth_l, _category_labels(pred, truth_l)).to_dict()
        bundle.save(out / lang)
    if not all_metrics:
        raise InsufficientClassData("all")
    write_json(out / METRICS_FILE, all_metrics)


def cmd_classify(args, cfg: RunConfig) -> None:
    corpus = load_corpus(args.corpus)
    model_dir = Path(args.model)
    if args.kind in ("manip", "bot"):
        uids, X = _manip_dataset(corpus) if args.kind == "manip" else _bot_dataset(corpus)
        model = load_model(model_dir / MODEL_FILE)
        proba = model.predict_proba(X) if len(uids) else []
        rows = [[u, int(p >= 0.5), _fmt(p)] for u, p in zip(uids, proba)]
        text = _csv_text(["user_id", "label", "probability"], rows)
    elif args.kind == "locality":
        model = load_model(model_dir / MODEL_FILE)
        rows = []
        for tag in sorted(corpus.trends):
            f = locality.locality_features(corpus.trends[tag], cfg.target_country)
            rows.append([tag, int(locality.classify_local(model, f))])
        text = _csv_text(["hashtag", "local"], rows)
    else:
        bundles = {lang: CategoryModelBundle.load(model_dir / lang)
                   for lang in ("en", "ur") if (model_dir / lang / "manifest.json").exists()}
        rows = []
        for tag, tweets, _ in _hashtag_slices(corpus):
            try:
                pred = hashcat.classify_hashtag(bundles, tweets, cfg.min_hashtag_tweets)
                rows.append([tag, pred.label.value, _fmt(pred.probability), pred.language_used,
                             len(tweets), "ok"])
            except InsufficientTweets:
                rows.append([tag, "", "", "", len(tweets), "insufficient_tweets"])
            except TrendwatchError as exc:
                rows.append([tag, "", "", "", len(tweets), type(exc).__name__])
        text = _csv_text(["hashtag", "label", "probability", "language_used", "n_tweets", "status"], rows)
    _emit(text, args.out)


def _user_predictions(path) -> dict[str, bool]:
    return {r["user_id"]: r["label"] == "1" for r in _read_csv(path)}


def cmd_analyze(args, cfg: RunConfig) -> None:
    what = args.what
    if what == "catdist":
        rows = [r for r in _read_csv(args.predictions) if r.get("status", "ok") == "ok"]
        rep = analyzer.category_distribution(
            (r["hashtag"], Category.parse(r["label"]), int(r["n_tweets"])) for r in rows)
        return _report(rep, args)
    if what == "usermix":
        manip = _user_predictions(args.manip_predictions)
        bots = _user_predictions(args.bot_predictions)
        labels = {u: (bots[u], manip[u]) for u in sorted(manip) if u in bots}
        return _report(analyzer.user_mix(labels), args)

    corpus = load_corpus(args.corpus)
    if what == "reach":
        return _report(analyzer.reach(corpus.hashtag_corpus(args.hashtag)), args)
    if what == "langdist":
        tweets = corpus.hashtag_tweets(args.hashtag) if args.hashtag else corpus.tweets
        return _report(analyzer.language_distribution(tweets), args)
    if what == "pairs":
        orig = corpus.trends[args.orig.lower().lstrip("#")]
        resp = args.resp.lower().lstrip("#")
        tweets = corpus.hashtag_tweets(resp, windowed=False)
        return _report(analyzer.response_pair_check(orig, tweets, resp), args)

    tweets = corpus.hashtag_tweets(args.hashtag)
    if what == "timeseries":
        if args.by == "none":
            ts = analyzer.time_series(tweets, cfg.bin_width_s)
        else:
            flags = _user_predictions(args.predictions)
            yes, no = ("manipulator", "organic") if args.by == "manip" else ("bot", "human")
            ts = analyzer.time_series(tweets, cfg.bin_width_s,
                                      lambda t: yes if flags.get(t.user_id) else no, (yes, no))
    else:  # tweets-per-user
        flags = _user_predictions(args.predictions)
        ts = analyzer.tweets_per_user_series(
            tweets, cfg.bin_width_s, lambda t: "manipulator" if flags.get(t.user_id) else "organic")
    if args.plot_csv:
        atomic_write_text(args.plot_csv, ts.plot_csv())
    _report(ts, args)


def cmd_evaluate(args, cfg: RunConfig) -> None:
    truth = read_json(args.truth)
    rows = _read_csv(args.predictions)
    if args.task in ("manip", "bot"):
        key = "manipulator" if args.task == "manip" else "bot"
        rows = [r for r in rows if r["user_id"] in truth["users"]]
        pred = [int(r["label"]) for r in rows]
        gold = [int(truth["users"][r["user_id"]][key]) for r in rows]
        labels = [0, 1]
    elif args.task == "locality":
        rows = [r for r in rows if r["hashtag"] in truth["hashtags"]]
        pred = [int(r["local"]) for r in rows]
        gold = [int(truth["hashtags"][r["hashtag"]]["local"]) for r in rows]
        labels = [0, 1]
    else:
        rows = [r for r in rows if r["hashtag"] in truth["hashtags"] and r.get("status") == "ok"]
        pred = [Category.parse(r["label"]).value for r in rows]
        gold = [Category.parse(truth["hashtags"][r["hashtag"]]["category"]).value for r in rows]
        labels = _category_labels(pred, gold)
    _emit(dumps(evaluate(pred, gold, labels).to_dict()), args.out)


# ------------------------------------------------------------------ parser

@functools.lru_cache(maxsize=1)
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trendwatch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version",
                   version=f"trendwatch {__version__} (schema_version {SCHEMA_VERSION})")
    p.add_argument("--config", help="key=value file with defaults; flags win")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, corpus=True, out=True):
        if corpus:
            sp.add_argument("--corpus", required=True, help="corpus directory")
        if out:
            sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--target-country", dest="target_country")
        sp.add_argument("--csv", action="store_true", help="tabular output instead of JSON")

    s = sub.add_parser("synth", help="write a labelled synthetic corpus")
    common(s, corpus=False, out=False)
    s.add_argument("--out", required=True, help="output corpus directory")
    s.add_argument("--n-manipulators", type=int, default=510)
    s.add_argument("--n-organic", type=int, default=500)
    s.add_argument("--n-bots", type=int, default=0)
    s.add_argument("--n-humans", type=int, default=0)
    s.add_argument("--n-hashtags-per-category", type=int, default=10)
    s.add_argument("--n-urdu-hashtags-per-category", type=int, default=0)
    s.add_argument("--n-other-hashtags", type=int, default=0)
    s.add_argument("--tweets-per-hashtag", type=int, default=120)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ingest-validate", help="load and validate a corpus directory")
    common(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("features", help="export per-user feature CSV")
    s.add_argument("kind", choices=["manip", "bot"])
    common(s)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("train", help="train and persist a model, with held-out metrics")
    s.add_argument("kind", choices=["manip", "bot", "hashcat", "locality"])
    common(s, out=False)
    s.add_argument("--out", required=True, help="model directory")
    s.add_argument("--labels", help="truth JSON (default: CORPUS/truth.json)")
    s.add_argument("--train-fraction", dest="train_fraction", type=float)
    s.add_argument("--learning-rate", dest="learning_rate", type=float)
    s.add_argument("--epochs", type=int)
    s.add_argument("--l2", type=float)
    s.add_argument("--max-depth", dest="max_depth", type=int, help="0 = unlimited")
    s.add_argument("--min-leaf", dest="min_leaf", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("classify", help="apply a trained model; writes predictions CSV")
    s.add_argument("kind", choices=["manip", "bot", "hashcat", "locality"])
    common(s)
    s.add_argument("--model", required=True, help="model directory")
    s.add_argument("--min-hashtag-tweets", dest="min_hashtag_tweets", type=int)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("analyze", help="trend-analysis reports")
    a = s.add_subparsers(dest="what", required=True, metavar="REPORT")
    r = a.add_parser("reach")
    common(r)
    r.add_argument("--hashtag", required=True)
    r = a.add_parser("langdist")
    common(r)
    r.add_argument("--hashtag")
    r = a.add_parser("catdist")
    common(r, corpus=False)
    r.add_argument("--predictions", required=True, help="hashcat predictions CSV")
    r = a.add_parser("usermix")
    common(r, corpus=False)
    r.add_argument("--manip-predictions", required=True)
    r.add_argument("--bot-predictions", required=True)
    r = a.add_parser("pairs")
    common(r)
    r.add_argument("--orig", required=True)
    r.add_argument("--resp", required=True)
    for name in ("timeseries", "tweets-per-user"):
        r = a.add_parser(name)
        common(r)
        r.add_argument("--hashtag", required=True)
        r.add_argument("--bin-width", dest="bin_width_s", type=int)
        r.add_argument("--plot-csv", help="also write long-format plot data here")
        if name == "timeseries":
            r.add_argument("--by", choices=["none", "manip", "bot"], default="none")
            r.add_argument("--predictions", help="user predictions CSV for --by")
        else:
            r.add_argument("--predictions", required=True, help="manip predictions CSV")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("evaluate", help="score predictions against truth labels")
    common(s, corpus=False)
    s.add_argument("--task", required=True, choices=["manip", "bot", "hashcat", "locality"])
    s.add_argument("--predictions", required=True)
    s.add_argument("--truth", required=True)
    s.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "what", None) == "timeseries" and args.by != "none" and not args.predictions:
        parser.error("--by needs --predictions")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(args, file_values)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    try:
        args.func(args, cfg)
    except TrendwatchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
