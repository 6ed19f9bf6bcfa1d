"""Tweet text cleaning, word n-grams and a TF-IDF vectorizer.

The vectorizer uses smoothed idf, ``ln((1 + N) / (1 + df)) + 1``, raw term
counts and L2 row normalisation.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from ._io import read_json, write_json
from .errors import EmptyCorpus, SchemaError

_URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_TAG_RE = re.compile(r"[#@]\w+")
_SYMBOL_RE = re.compile(r"[^\w\s]|_")
_SPACE_RE = re.compile(r"\s+")


def _symbol(m: re.Match) -> str:
    ch = m.group(0)
    # combining marks (Urdu diacritics etc.) belong to the word
    return ch if unicodedata.category(ch)[0] == "M" else " "


def preprocess(text: str) -> str:
    """Strip URLs, hashtags, mentions and symbols; lowercase; NFC; single spaces."""
    text = unicodedata.normalize("NFC", text)
    text = _URL_RE.sub(" ", text)
    text = _TAG_RE.sub(" ", text)
    text = _SYMBOL_RE.sub(_symbol, text)
    text = unicodedata.normalize("NFC", text.lower())
    return _SPACE_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    return preprocess(text).split()


def ngrams(tokens: Sequence[str], low: int = 1, high: int = 3) -> list[str]:
    """Contiguous n-grams of lengths ``low..high``, ordered by length then position."""
    if not 1 <= low <= high:
        raise ValueError(f"bad n-gram range ({low}, {high})")
    out = []
    n = len(tokens)
    for w in range(low, high + 1):
        for i in range(n - w + 1):
            out.append(" ".join(tokens[i:i + w]))
    return out


@dataclass(frozen=True)
class DocVector:
    """Sparse TF-IDF row: column index -> weight."""

    weights: dict
    size: int

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.weights.values()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.size)
        for j, v in self.weights.items():
            out[j] = v
        return out


class TfidfVectorizer:
    def __init__(self, vocabulary: dict[str, int], idf: Sequence[float],
                 ngram_range: tuple[int, int] = (1, 3)):
        self.vocabulary = dict(vocabulary)
        self.idf = np.asarray(idf, dtype=float)
        self.ngram_range = (int(ngram_range[0]), int(ngram_range[1]))
        if sorted(self.vocabulary.values()) != list(range(len(self.vocabulary))):
            raise ValueError("vocabulary indices must cover 0..n-1")
        if self.idf.shape != (len(self.vocabulary),):
            raise ValueError("idf length does not match vocabulary")

    def __len__(self) -> int:
        return len(self.vocabulary)

    @classmethod
    def fit(cls, docs: Sequence[str], ngram_range: tuple[int, int] = (1, 3)) -> "TfidfVectorizer":
        if not docs:
            raise EmptyCorpus("no documents to fit")
        low, high = ngram_range
        df: Counter = Counter()
        for doc in docs:
            df.update(set(ngrams(tokenize(doc), low, high)))
        if not df:
            raise EmptyCorpus("no n-grams in any document")
        n = len(docs)
        terms = sorted(df)
        vocab = {g: i for i, g in enumerate(terms)}
        idf = [math.log((1 + n) / (1 + df[g])) + 1.0 for g in terms]
        return cls(vocab, idf, (low, high))

    def _counts(self, doc: str) -> Counter:
        grams = ngrams(tokenize(doc), *self.ngram_range)
        vocab = self.vocabulary
        return Counter(vocab[g] for g in grams if g in vocab)

    def transform(self, doc: str) -> DocVector:
        counts = self._counts(doc)
        cols = sorted(counts)
        raw = [counts[j] * self.idf[j] for j in cols]
        norm = math.sqrt(sum(v * v for v in raw))
        if norm == 0.0:
            return DocVector({}, len(self))
        return DocVector({j: float(v / norm) for j, v in zip(cols, raw)}, len(self))

    def transform_matrix(self, docs: Iterable[str]) -> sp.csr_matrix:
        indptr, indices, data = [0], [], []
        for doc in docs:
            vec = self.transform(doc)
            cols = sorted(vec.weights)
            indices.extend(cols)
            data.extend(vec.weights[j] for j in cols)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), indptr),
            shape=(len(indptr) - 1, len(self)),
        )

    # persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "ngram_range": list(self.ngram_range),
            "vocabulary": self.vocabulary,
            "idf": [float(v) for v in self.idf],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TfidfVectorizer":
        try:
            return cls(obj["vocabulary"], obj["idf"], tuple(obj["ngram_range"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad vectorizer document: {exc}") from None

    def save(self, path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "TfidfVectorizer":
        return cls.from_dict(read_json(path))


def fit_tfidf(docs: Sequence[str], ngram_range: tuple[int, int] = (1, 3)) -> TfidfVectorizer:
    return TfidfVectorizer.fit(docs, ngram_range)


def transform(vectorizer: TfidfVectorizer, doc: str) -> DocVector:
    return vectorizer.transform(doc)
