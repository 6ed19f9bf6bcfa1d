"""Hashtag topic classification with per-language one-vs-all logistic models."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import SCHEMA_VERSION
from ._io import read_json, write_json
from .corpus import Tweet
from .errors import (
    InsufficientClassData,
    InsufficientTweets,
    MissingLanguageSlice,
    SchemaError,
)
from .ml import Dataset, LogRegConfig, LogRegModel, train_logreg
from .textproc import TfidfVectorizer, preprocess

MIN_TWEETS = 100
THRESHOLD = 0.5


class Category(enum.Enum):
    POLITICAL = "Political"
    SPORTS = "Sports"
    RELIGIOUS = "Religious"
    CAMPAIGN = "Campaign"
    ENTERTAINMENT = "Entertainment"
    MILITARY = "Military"
    OTHER = "Other"

    @classmethod
    def parse(cls, name: str) -> "Category":
        for c in cls:
            if c.value.lower() == str(name).lower() or c.name.lower() == str(name).lower():
                return c
        raise ValueError(f"unknown category {name!r}")


# Declaration order doubles as the argmax tie-break order.
TOPICS = tuple(c for c in Category if c is not Category.OTHER)

LANGUAGES = {"en": "English", "ur": "Urdu"}

# TF-IDF rows are already in [0, 1]; min-max scaling would only densify them.
DEFAULT_CONFIG = LogRegConfig(scale=False)


@dataclass(frozen=True)
class HashtagPrediction:
    label: Category
    probabilities: Mapping[Category, float]
    language_used: str  # "English", "Urdu" or "Both"

    @property
    def probability(self) -> float:
        return max(self.probabilities.values())

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "probability": self.probability,
            "probabilities": {c.value: p for c, p in self.probabilities.items()},
            "language_used": self.language_used,
        }


@dataclass
class CategoryModelBundle:
    language: str  # "en" or "ur"
    vectorizer: TfidfVectorizer
    models: dict[Category, LogRegModel] = field(default_factory=dict)

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        missing = [c for c in TOPICS if c not in self.models]
        if missing:
            raise SchemaError(f"bundle lacks models for {[c.value for c in missing]}")
        for c, m in self.models.items():
            if m.weights.shape[0] != len(self.vectorizer):
                raise SchemaError(f"{c.value} model does not match vectorizer size")

    def probabilities(self, document: str) -> dict[Category, float]:
        row = self.vectorizer.transform_matrix([document])
        return {c: float(self.models[c].predict_proba(row)[0]) for c in TOPICS}

    def save(self, directory) -> None:
        d = Path(directory)
        self.vectorizer.save(d / "vectorizer.json")
        for c in TOPICS:
            write_json(d / f"{c.value.lower()}.json", self.models[c].to_dict())
        write_json(d / "manifest.json", {
            "language": self.language,
            "schema_version": SCHEMA_VERSION,
            "categories": [c.value for c in TOPICS],
        })

    @classmethod
    def load(cls, directory) -> "CategoryModelBundle":
        d = Path(directory)
        manifest = read_json(d / "manifest.json")
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported bundle schema {manifest.get('schema_version')!r}")
        vec = TfidfVectorizer.load(d / "vectorizer.json")
        models = {c: LogRegModel.from_dict(read_json(d / f"{c.value.lower()}.json")) for c in TOPICS}
        return cls(manifest["language"], vec, models)


def hashtag_document(tweets: Sequence[Tweet], language: str) -> str:
    """Preprocessed text of the tweets in ``language``, oldest first, space-joined."""
    picked = sorted((t for t in tweets if t.lang == language), key=lambda t: t.created_at)
    parts = (preprocess(t.text) for t in picked)
    return " ".join(p for p in parts if p)


def train_bundle(labelled: Sequence[tuple[str, Category]], language: str,
                 config: LogRegConfig = DEFAULT_CONFIG) -> CategoryModelBundle:
    """One vectorizer over all documents and one binary model per topic.

    ``Other`` documents only ever appear as negatives.
    """
    docs = [d for d, _ in labelled]
    labels = [c for _, c in labelled]
    for c in TOPICS:
        if sum(1 for lab in labels if lab is c) < 2:
            raise InsufficientClassData(c)
    vec = TfidfVectorizer.fit(docs, (1, 3))
    X = vec.transform_matrix(docs)
    names = [f"f{j}" for j in range(len(vec))]
    models = {}
    for c in TOPICS:
        y = np.array([1 if lab is c else 0 for lab in labels])
        models[c] = train_logreg(Dataset(X, y, names), config)
    return CategoryModelBundle(language, vec, models)


def decide(probabilities: Mapping[Category, float]) -> Category:
    best, best_p = Category.OTHER, -1.0
    for c in TOPICS:
        if c in probabilities and probabilities[c] > best_p:
            best, best_p = c, probabilities[c]
    return best if best_p >= THRESHOLD else Category.OTHER


def classify_document(bundle: CategoryModelBundle, document: str) -> HashtagPrediction:
    probs = bundle.probabilities(document)
    return HashtagPrediction(decide(probs), probs, LANGUAGES[bundle.language])


def classify_monolingual(bundle: CategoryModelBundle, tweets: Sequence[Tweet],
                         min_tweets: int = MIN_TWEETS) -> HashtagPrediction:
    n = sum(1 for t in tweets if t.lang == bundle.language)
    if n < min_tweets:
        raise InsufficientTweets(n, min_tweets)
    return classify_document(bundle, hashtag_document(tweets, bundle.language))


def merge_bilingual(en: Mapping[Category, float], ur: Mapping[Category, float]) -> HashtagPrediction:
    merged = {c: max(en[c], ur[c]) for c in TOPICS}
    return HashtagPrediction(decide(merged), merged, "Both")


def classify_bilingual(en: CategoryModelBundle, ur: CategoryModelBundle, tweets: Sequence[Tweet],
                       min_tweets: int = MIN_TWEETS) -> HashtagPrediction:
    """Classify each language slice with its own bundle and keep the single highest probability.

    The tweet minimum applies to the English plus Urdu total, not per slice.
    """
    n_en = sum(1 for t in tweets if t.lang == "en")
    n_ur = sum(1 for t in tweets if t.lang == "ur")
    if n_en + n_ur < min_tweets:
        raise InsufficientTweets(n_en + n_ur, min_tweets)
    if n_en == 0:
        raise MissingLanguageSlice("en")
    if n_ur == 0:
        raise MissingLanguageSlice("ur")
    return merge_bilingual(en.probabilities(hashtag_document(tweets, "en")),
                           ur.probabilities(hashtag_document(tweets, "ur")))


def classify_hashtag(bundles: Mapping[str, CategoryModelBundle], tweets: Sequence[Tweet],
                     min_tweets: int = MIN_TWEETS) -> HashtagPrediction:
    """Route by language profile: monolingual bundle, or both for bilingual hashtags."""
    has_en = any(t.lang == "en" for t in tweets) and "en" in bundles
    has_ur = any(t.lang == "ur" for t in tweets) and "ur" in bundles
    if has_en and has_ur:
        return classify_bilingual(bundles["en"], bundles["ur"], tweets, min_tweets)
    if has_en:
        return classify_monolingual(bundles["en"], tweets, min_tweets)
    if has_ur:
        return classify_monolingual(bundles["ur"], tweets, min_tweets)
    raise InsufficientTweets(0, min_tweets)
