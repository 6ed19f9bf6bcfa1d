"""Local vs global trend classification from trend meta-information."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import TrendRecord
from .errors import DimensionMismatch
from .ml import Dataset, TreeConfig, TreeModel, train_tree

FEATURE_NAMES = ["first_trend_is_target", "n_other_countries", "trended_worldwide"]
DEFAULT_TARGET = "Pakistan"
DEFAULT_TREE = TreeConfig(max_depth=4, min_leaf=2)


@dataclass(frozen=True)
class LocalityFeatures:
    first_trend_is_target: bool
    n_other_countries: int
    trended_worldwide: bool

    def as_row(self) -> list[float]:
        return [float(self.first_trend_is_target), float(self.n_other_countries),
                float(self.trended_worldwide)]


def locality_features(trend: TrendRecord, target_country: str = DEFAULT_TARGET) -> LocalityFeatures:
    first = trend.first_trend_location.strip().casefold()
    return LocalityFeatures(first == target_country.strip().casefold(),
                            trend.n_other_countries, trend.trended_worldwide)


def locality_dataset(rows: Sequence[tuple[LocalityFeatures, bool]]) -> Dataset:
    X = np.array([f.as_row() for f, _ in rows], dtype=float).reshape(-1, len(FEATURE_NAMES))
    y = np.array([int(local) for _, local in rows], dtype=np.int64)
    return Dataset(X, y, list(FEATURE_NAMES))


def train_locality(rows: Sequence[tuple[LocalityFeatures, bool]],
                   config: TreeConfig = DEFAULT_TREE) -> TreeModel:
    return train_tree(locality_dataset(rows), config, n_classes=2)


def classify_local(model: TreeModel, features: LocalityFeatures) -> bool:
    """True when the tree routes the encoded features to a 'local' leaf."""
    if len(model.feature_names) != len(FEATURE_NAMES):
        raise DimensionMismatch(f"model expects {len(model.feature_names)} features, locality has 3")
    return bool(model.predict([features.as_row()])[0] == 1)
