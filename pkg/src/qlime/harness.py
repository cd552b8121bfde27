"""Benchmark runner comparing Q-LIME against LIME on held-out instances.

One ``run_experiment`` call covers one (max_features, stopwords, shots)
configuration: build the corpus, fit the vocabulary and classifier on the
train split, then explain a seeded sample of test instances with both
methods, timing each explainer call on its own.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import corpus as corpus_mod
from .errors import ExperimentError, IngestionError, InvariantError, QlimeError
from .explain import LimeConfig, QlimeConfig, lime_explain, overlap, qlime_explain, top_k
from .model import TrainConfig, accuracy, train_logistic

log = logging.getLogger(__name__)

CSV_HEADER = (
    "max_features", "stopwords", "shots", "accuracy", "lime_time",
    "qlime_time", "overlap", "lime_evals", "qlime_evals",
)
SNIPPET_CHARS = 200


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for the bundled synthetic corpus."""
    n_docs: int = 500
    vocab_size: int = 15
    n_dominant: int = 5
    seed: int = 7

    def build(self) -> corpus_mod.LabeledCorpus:
        w = corpus_mod.planted_weights(self.vocab_size, self.n_dominant, seed=self.seed)
        return corpus_mod.synth_corpus(self.n_docs, self.vocab_size, w, seed=self.seed)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str | SynthSpec = field(default_factory=SynthSpec)
    max_features: int = 15
    stopwords: bool = True
    shots: int | None = None
    n_instances: int = 5
    top_k: int = 5
    seed: int = 0
    limit: int | None = None
    lime: LimeConfig = field(default_factory=LimeConfig)
    qlime: QlimeConfig = field(default_factory=QlimeConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if not 1 <= self.max_features <= 20:
            raise ValueError(f"max_features must be in [1, 20], got {self.max_features}")
        if self.n_instances < 1 or self.top_k < 1:
            raise ValueError("n_instances and top_k must be >= 1")

    def label(self) -> str:
        return f"max_features={self.max_features} stopwords={self.stopwords} shots={self.shots}"


@dataclass(frozen=True)
class InstanceResult:
    doc_index: int
    text: str
    popcount: int
    lime_top: list[str]
    qlime_top: list[str]
    overlap: int
    lime_evals: int
    qlime_evals: int
    lime_time: float
    qlime_time: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    accuracy: float
    lime_time: float
    qlime_time: float
    overlap: float
    lime_evals: float
    qlime_evals: float
    per_instance: list[InstanceResult]
    overlap_exact: Fraction = Fraction(0)


def load_corpus(cfg: ExperimentConfig) -> corpus_mod.LabeledCorpus:
    if isinstance(cfg.dataset, SynthSpec):
        return cfg.dataset.build()
    return corpus_mod.load_dataset(cfg.dataset, limit=cfg.limit, seed=cfg.seed)


def _instance_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence([seed, 1]).generate_state(n)]


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, corpus: corpus_mod.LabeledCorpus | None = None) -> ExperimentResult:
    """Run one configuration end to end.

    All fields except the timings are a deterministic function of ``cfg``.
    Passing a prebuilt ``corpus`` skips loading (sweeps reuse it).
    """
    try:
        if corpus is None:
            corpus = load_corpus(cfg)
        vocab = corpus_mod.build_vocabulary(corpus, cfg.max_features, cfg.stopwords)
        if len(vocab) == 0:
            raise ExperimentError("vocabulary is empty")
        X_train = np.array([corpus_mod.vectorize_text(d.text, vocab) for d in corpus.train_docs()])
        y_train = np.array([d.label for d in corpus.train_docs()])
        model = train_logistic(X_train, y_train, cfg.train, vocab=vocab.tokens)
        test_docs = corpus.test_docs()
        if not test_docs:
            raise ExperimentError("test split is empty")
        X_test = np.array([corpus_mod.vectorize_text(d.text, vocab) for d in test_docs])
        y_test = np.array([d.label for d in test_docs])
        acc = accuracy(model, X_test, y_test)
    except (ExperimentError, IngestionError):
        raise
    except QlimeError as exc:
        raise ExperimentError(f"[{cfg.label()}] {exc}") from exc

    # walk a seeded permutation of the test split, skipping instances with nothing to flip
    order = np.random.default_rng([cfg.seed, 0]).permutation(len(test_docs))
    chosen = [int(i) for i in order if X_test[i].any()][: cfg.n_instances]
    if not chosen:
        raise ExperimentError(f"[{cfg.label()}] no test instance has a present feature")
    if len(chosen) < cfg.n_instances:
        log.warning("%s: only %d usable test instances", cfg.label(), len(chosen))

    qcfg = dataclasses.replace(cfg.qlime, shots=cfg.shots)
    per_instance = []
    for i, seed in zip(chosen, _instance_seeds(cfg.seed, len(chosen))):
        x = X_test[i]
        before = model.eval_counter
        le, lt = _timed(lime_explain, model, x, vocab, dataclasses.replace(cfg.lime, seed=seed))
        mid = model.eval_counter
        qe, qt = _timed(qlime_explain, model, x, vocab, dataclasses.replace(qcfg, seed=seed))
        if mid - before != le.model_evals or model.eval_counter - mid != qe.model_evals:
            raise InvariantError(
                f"eval counter disagrees with reported model_evals on test doc {i}"
            )
        per_instance.append(InstanceResult(
            doc_index=corpus.test[i],
            text=test_docs[i].text,
            popcount=int(x.sum()),
            lime_top=top_k(le, cfg.top_k),
            qlime_top=top_k(qe, cfg.top_k),
            overlap=overlap(le, qe, cfg.top_k),
            lime_evals=le.model_evals,
            qlime_evals=qe.model_evals,
            lime_time=lt,
            qlime_time=qt,
        ))

    n = len(per_instance)
    ov = Fraction(sum(r.overlap for r in per_instance), n)
    return ExperimentResult(
        config=cfg,
        accuracy=acc,
        lime_time=sum(r.lime_time for r in per_instance) / n,
        qlime_time=sum(r.qlime_time for r in per_instance) / n,
        overlap=float(ov),
        lime_evals=sum(r.lime_evals for r in per_instance) / n,
        qlime_evals=sum(r.qlime_evals for r in per_instance) / n,
        per_instance=per_instance,
        overlap_exact=ov,
    )


def run_sweep(base: ExperimentConfig, max_features=(5, 10, 15), stopwords=(True, False),
              shots=(None, 100)) -> list[ExperimentResult]:
    corpus = load_corpus(base)
    results = []
    for mf in max_features:
        for sw in stopwords:
            for sh in shots:
                cfg = dataclasses.replace(base, max_features=mf, stopwords=sw, shots=sh)
                log.info("running %s", cfg.label())
                results.append(run_experiment(cfg, corpus))
    return results


def format_row(r: ExperimentResult) -> list[str]:
    c = r.config
    return [
        str(c.max_features), str(c.stopwords), str(c.shots),
        f"{r.accuracy:.2f}", f"{r.lime_time:.3f}", f"{r.qlime_time:.3f}",
        f"{r.overlap:.2f}", f"{r.lime_evals:.2f}", f"{r.qlime_evals:.2f}",
    ]


def emit_results_csv(results, sink) -> None:
    if not results:
        raise ValueError("no results to write")
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(format_row(r))


def _snippet(text: str) -> str:
    text = " ".join(text.split())
    if len(text) > SNIPPET_CHARS:
        text = text[: SNIPPET_CHARS - 3].rstrip() + "..."
    return text.replace("|", "\\|")


def _mark(tokens, shared) -> str:
    return "<br>".join(f"**{t}**" if t in shared else t for t in tokens)


def emit_instance_report(result: ExperimentResult, sink) -> None:
    if not result.per_instance:
        raise ValueError("result has no per-instance rows")
    k = result.config.top_k
    sink.write(f"### {result.config.label()}\n\n")
    sink.write(f"| Review snippet | LIME top-{k} | Q-LIME top-{k} | overlap |\n")
    sink.write("|---|---|---|---|\n")
    for r in result.per_instance:
        shared = set(r.lime_top) & set(r.qlime_top)
        sink.write(
            f"| {_snippet(r.text)} | {_mark(r.lime_top, shared)} "
            f"| {_mark(r.qlime_top, shared)} | {r.overlap} |\n"
        )
    sink.write("\n")
