"""Command-line entry point: ``qlime {train,explain,bench,synth}``.

Exit codes: 0 success, 1 usage error, 2 data/ingestion error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import harness
from .errors import IngestionError, InvariantError, QlimeError
from .explain import LimeConfig, QlimeConfig, lime_explain, overlap, qlime_explain
from .model import LogisticModel, TrainConfig, accuracy, train_logistic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3

log = logging.getLogger("qlime")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(value: str) -> bool:
    v = value.strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {value!r}")


def _shots(value: str) -> int | None:
    v = value.strip().lower()
    if v in ("none", "analytic"):
        return None
    try:
        n = int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be an integer or 'none', got {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("shots must be >= 1")
    return n


def _list_of(conv):
    def parse(value: str):
        try:
            return [conv(v) for v in value.split(",") if v.strip()]
        except argparse.ArgumentTypeError:
            raise
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _grid(value: str) -> list[int]:
    key, sep, vals = value.partition("=")
    if not sep or key.strip() != "max_features":
        raise argparse.ArgumentTypeError(f"expected max_features=K1,K2,..., got {value!r}")
    try:
        return [int(v) for v in vals.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad max_features list {vals!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qlime", description="Quantum-inspired local explanations vs. LIME")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="fit vocabulary + logistic model on a CSV dataset")
    t.add_argument("--data", required=True, help="CSV with text,label header")
    t.add_argument("--max-features", type=int, default=15)
    t.add_argument("--stopwords", type=_on_off, default=True, help="on|off")
    t.add_argument("--limit", type=int, default=None, help="random subset size")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True, help="model JSON path")

    e = sub.add_parser("explain", help="explain one review with a saved model")
    e.add_argument("--model", required=True)
    e.add_argument("--text", required=True)
    e.add_argument("--method", choices=("qlime", "lime", "both"), default="both")
    e.add_argument("--shots", type=_shots, default=None, help="N or none")
    e.add_argument("--repeats", type=int, default=1)
    e.add_argument("--top-k", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="run the LIME vs Q-LIME comparison grid")
    b.add_argument("--data", default="synth", help="CSV path or 'synth'")
    b.add_argument("--grid", type=_grid, default=[5, 10, 15], help="max_features=5,10,15")
    b.add_argument("--stopwords", type=_list_of(_on_off), default=[True, False], help="on,off")
    b.add_argument("--shots", type=_list_of(_shots), default=[None, 100], help="none,100")
    b.add_argument("--instances", type=int, default=5)
    b.add_argument("--top-k", type=int, default=5)
    b.add_argument("--limit", type=int, default=None, help="random subset size for CSV data")
    b.add_argument("--perturbations", type=int, default=300, help="LIME samples per instance")
    b.add_argument("--repeats", type=int, default=1, help="Q-LIME draws per feature")
    b.add_argument("--backend", choices=("dense", "product"), default="dense")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csv", default=None, help="results CSV (stdout if omitted)")
    b.add_argument("--report", default=None, help="per-instance markdown report")

    s = sub.add_parser("synth", help="write a synthetic labelled corpus as CSV")
    s.add_argument("--docs", type=int, default=500)
    s.add_argument("--vocab", type=int, default=15)
    s.add_argument("--dominant", type=int, default=5)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True)
    return p


def cmd_train(args) -> int:
    c = corpus_mod.load_dataset(args.data, limit=args.limit, seed=args.seed)
    vocab = corpus_mod.build_vocabulary(c, args.max_features, args.stopwords)
    if len(vocab) == 0:
        raise UsageError("no tokens survive preprocessing; vocabulary is empty")

    def matrix(docs):
        return np.array([corpus_mod.vectorize_text(d.text, vocab) for d in docs]).reshape(-1, len(vocab))

    X, y = matrix(c.train_docs()), np.array([d.label for d in c.train_docs()])
    m = train_logistic(X, y, TrainConfig(seed=args.seed), vocab=vocab.tokens)
    Path(args.out).write_text(m.to_json() + "\n", encoding="utf-8")
    if c.test:
        acc = accuracy(m, matrix(c.test_docs()), [d.label for d in c.test_docs()])
        print(f"vocab={len(vocab)} train={len(c.train)} test={len(c.test)} accuracy={acc:.4f}",
              file=sys.stderr)
    return EXIT_OK


def cmd_explain(args) -> int:
    path = Path(args.model)
    if not path.is_file():
        raise IngestionError(f"model file not found: {path}")
    m = LogisticModel.from_json(path.read_text(encoding="utf-8"))
    if m.vocab is None:
        raise IngestionError("model JSON has no vocab; cannot vectorize text")
    vocab = corpus_mod.Vocabulary(m.vocab, len(m.vocab), False)
    x = corpus_mod.vectorize_text(args.text, vocab)
    out = {}
    if args.method in ("lime", "both"):
        out["lime"] = lime_explain(m, x, vocab, LimeConfig(seed=args.seed))
    if args.method in ("qlime", "both"):
        cfg = QlimeConfig(shots=args.shots, repeats=args.repeats, seed=args.seed)
        out["qlime"] = qlime_explain(m, x, vocab, cfg)
    if len(out) == 1:
        doc = next(iter(out.values())).to_dict(args.top_k)
    else:
        doc = {k: e.to_dict(args.top_k) for k, e in out.items()}
        doc["overlap"] = overlap(out["lime"], out["qlime"], args.top_k)
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.data == "synth":
        dataset = harness.SynthSpec(seed=args.seed)
    else:
        dataset = args.data
    if args.backend == "product" and any(s is not None for s in args.shots):
        raise UsageError("--backend product only supports --shots none")
    base = harness.ExperimentConfig(
        dataset=dataset,
        n_instances=args.instances,
        top_k=args.top_k,
        seed=args.seed,
        limit=args.limit,
        lime=LimeConfig(n_perturbations=args.perturbations),
        qlime=QlimeConfig(repeats=args.repeats, backend=args.backend),
    )
    results = harness.run_sweep(base, args.grid, args.stopwords, args.shots)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            harness.emit_results_csv(results, fh)
    else:
        harness.emit_results_csv(results, sys.stdout)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write("# Top-k feature comparison: LIME vs Q-LIME\n\n")
            for r in results:
                harness.emit_instance_report(r, fh)
    return EXIT_OK


def cmd_synth(args) -> int:
    w = corpus_mod.planted_weights(args.vocab, args.dominant, seed=args.seed)
    c = corpus_mod.synth_corpus(args.docs, args.vocab, w, seed=args.seed)
    corpus_mod.write_dataset(c, args.out)
    return EXIT_OK


COMMANDS = {"train": cmd_train, "explain": cmd_explain, "bench": cmd_bench, "synth": cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvariantError as exc:
        print(f"qlime: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (QlimeError, OSError) as exc:
        print(f"qlime: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ValueError) as exc:
        print(f"qlime: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
