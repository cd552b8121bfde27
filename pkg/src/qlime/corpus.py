"""Text ingestion: tokenizing, vocabulary building, binary vectorizing.

Datasets are CSV files with a ``text,label`` header. ``synth_corpus``
generates a small corpus with a known logistic ground truth for desk-scale
experiments.
"""

from __future__ import annotations

import csv
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import CorpusError, IngestionError

TAG_RE = re.compile(r"<[^>]*>")
TOKEN_RE = re.compile(r"[^\W_]{2,}")
TRAIN_FRACTION = 0.8

# Fixed vocabulary for synthetic corpora; none of these are stopwords.
SYNTH_WORDS = (
    "acting", "awful", "boring", "brilliant", "cast", "charming", "clumsy",
    "director", "dull", "ending", "film", "great", "moving", "music", "plot",
    "scene", "script", "story", "superb", "waste",
)


@dataclass(frozen=True)
class Document:
    text: str
    label: int


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    max_features: int
    stopwords_removed: bool

    def __len__(self):
        return len(self.tokens)

    def index(self, token: str) -> int:
        return self.tokens.index(token)


@dataclass(frozen=True)
class LabeledCorpus:
    documents: tuple[Document, ...]
    train: tuple[int, ...]
    test: tuple[int, ...]

    def __len__(self):
        return len(self.documents)

    def train_docs(self):
        return [self.documents[i] for i in self.train]

    def test_docs(self):
        return [self.documents[i] for i in self.test]


def read_stopwords(path) -> frozenset[str]:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
    return frozenset(words)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    ref = resources.files("qlime") / "data" / "stopwords_en.txt"
    with resources.as_file(ref) as path:
        return read_stopwords(path)


def preprocess(text: str, remove_stopwords: bool = False, stopwords=None) -> list[str]:
    # tags become a space so "good<br/>fun" stays two tokens
    text = TAG_RE.sub(" ", text).lower()
    tokens = TOKEN_RE.findall(text)
    if remove_stopwords:
        stop = default_stopwords() if stopwords is None else stopwords
        tokens = [t for t in tokens if t not in stop]
    return tokens


def build_vocabulary(corpus: LabeledCorpus, max_features: int, remove_stopwords: bool = False) -> Vocabulary:
    """Keep the ``max_features`` tokens with the highest train-split document frequency.

    Ties go to the lexicographically smaller token. The kept tokens are
    stored in lexicographic order, which fixes the feature indices.
    """
    if max_features < 1:
        raise ValueError(f"max_features must be >= 1, got {max_features}")
    if not corpus.train:
        raise CorpusError("cannot build a vocabulary from an empty train split")
    df = Counter()
    for doc in corpus.train_docs():
        df.update(set(preprocess(doc.text, remove_stopwords)))
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = sorted(tok for tok, _ in ranked[:max_features])
    return Vocabulary(tuple(kept), max_features, remove_stopwords)


def vectorize(tokens, vocab: Vocabulary) -> np.ndarray:
    present = set(tokens)
    return np.array([tok in present for tok in vocab.tokens], dtype=np.uint8)


def vectorize_text(text: str, vocab: Vocabulary) -> np.ndarray:
    return vectorize(preprocess(text, vocab.stopwords_removed), vocab)


def split_documents(documents, seed: int) -> LabeledCorpus:
    documents = tuple(documents)
    n = len(documents)
    order = np.random.default_rng(seed).permutation(n)
    n_train = math.ceil(TRAIN_FRACTION * n)
    return LabeledCorpus(
        documents,
        tuple(int(i) for i in order[:n_train]),
        tuple(int(i) for i in order[n_train:]),
    )


def _parse_label(raw: str, row: int) -> int:
    raw = raw.strip()
    if raw not in ("0", "1"):
        raise IngestionError(f"label must be 0 or 1, got {raw!r}", row=row)
    return int(raw)


def load_dataset(path, limit: int | None = None, seed: int = 0) -> LabeledCorpus:
    """Read a ``text,label`` CSV and split it 80/20 by seeded shuffle.

    Row numbers in errors count data records from 1, header excluded.
    When ``limit`` is set, a seeded uniform subset of that many rows is
    used instead of the whole file.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"dataset not found: {path}")
    docs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path} is empty") from None
        if [h.strip().lower() for h in header] != ["text", "label"]:
            raise IngestionError(f"expected header 'text,label', got {','.join(header)!r}")
        try:
            for row, rec in enumerate(reader, start=1):
                if len(rec) != 2:
                    raise IngestionError(f"expected 2 fields, got {len(rec)}", row=row)
                docs.append(Document(rec[0], _parse_label(rec[1], row)))
        except csv.Error as exc:
            raise IngestionError(f"malformed CSV: {exc}", row=len(docs) + 1) from exc
    if not docs:
        raise IngestionError(f"{path} has no data rows")

    rng = np.random.default_rng(seed)
    if limit is not None and limit < len(docs):
        keep = np.sort(rng.choice(len(docs), size=limit, replace=False))
        docs = [docs[i] for i in keep]
    return split_documents(docs, int(rng.integers(2**32)))


def write_dataset(corpus_or_docs, path):
    docs = corpus_or_docs.documents if isinstance(corpus_or_docs, LabeledCorpus) else corpus_or_docs
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["text", "label"])
        for d in docs:
            w.writerow([d.text, d.label])


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def planted_weights(vocab_size: int, n_dominant: int = 5, seed: int = 0,
                    strong: float = 5.0, weak: float = 0.25) -> np.ndarray:
    """Weights with ``n_dominant`` large coordinates of random sign, the rest small."""
    if not 0 <= n_dominant <= vocab_size:
        raise ValueError(f"n_dominant must be in [0, {vocab_size}]")
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=vocab_size)
    mags = np.full(vocab_size, weak)
    mags[rng.choice(vocab_size, size=n_dominant, replace=False)] = strong
    return signs * mags


def synth_corpus(n_docs: int, vocab_size: int, planted_weights, seed: int) -> LabeledCorpus:
    """Random documents over a fixed word list with logistic labels.

    Each word appears independently with probability 1/2; the label is 1 with
    probability sigmoid(w.x - sum(w)/2), which centres the logit.
    """
    w = np.asarray(planted_weights, dtype=np.float64)
    if n_docs < 1:
        raise ValueError(f"n_docs must be >= 1, got {n_docs}")
    if not 1 <= vocab_size <= len(SYNTH_WORDS):
        raise ValueError(f"vocab_size must be in [1, {len(SYNTH_WORDS)}], got {vocab_size}")
    if w.shape != (vocab_size,):
        raise ValueError(f"planted_weights must have length {vocab_size}, got {w.shape}")
    rng = np.random.default_rng(seed)
    words = SYNTH_WORDS[:vocab_size]
    X = rng.integers(0, 2, size=(n_docs, vocab_size))
    p = _sigmoid(X @ w - w.sum() / 2)
    y = (rng.random(n_docs) < p).astype(int)
    docs = [
        Document(" ".join(words[j] for j in np.flatnonzero(row)), int(label))
        for row, label in zip(X, y)
    ]
    return split_documents(docs, int(rng.integers(2**32)))
