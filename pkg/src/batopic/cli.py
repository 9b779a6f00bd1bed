"""Command-line pipeline: ingest, train, topics, infer, eval.

Exit codes: 0 success, 2 usage or validation failure, 3 numerical failure
during training. A config file in flat key=value form can seed any flag;
flags given on the command line win.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from . import corpus as corpus_mod
from . import infer_eval
from .model import VARIANT_BAT, VARIANT_GAUSSIAN, NumericalError, TrainConfig, train
from .sampling import STREAM_OOV, SeededRng

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def read_config_file(path):
    """Flat key=value lines; blank lines and #-comments ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge_config_args(args_list):
    """Expand --config into flag tokens placed before the explicit flags.

    argparse resolves repeated flags last-wins, so values from the file act
    as defaults that any flag given on the command line overrides.
    """
    if not args_list:
        return args_list
    config_path = None
    for i, tok in enumerate(args_list):
        if tok == "--config" and i + 1 < len(args_list):
            config_path = args_list[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    if config_path is None:
        return args_list
    if not Path(config_path).exists():
        raise CliError(f"config file not found: {config_path}")
    injected = []
    for key, value in read_config_file(config_path).items():
        injected += [f"--{key.replace('_', '-')}", value]
    return [args_list[0]] + injected + args_list[1:]


def _require(path, what):
    if path is None:
        raise CliError(f"missing required {what}")
    if not Path(path).exists():
        raise CliError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_ingest(args):
    labels = None
    if args.labels:
        labels = corpus_mod.load_labels(_require(args.labels, "label file"))
    if args.docword:
        docword = _require(args.docword, "docword file")
        vocab_file = _require(args.vocab, "vocabulary file")
        corpus = corpus_mod.load_uci_bow(docword, vocab_file, labels)
    elif args.raw_dir:
        raw_dir = _require(args.raw_dir, "raw text directory")
        stopwords = ()
        if args.stopwords:
            stopwords = set(
                Path(_require(args.stopwords, "stopword file"))
                .read_text(encoding="utf-8").split()
            )
        docs, _ = corpus_mod.load_text_directory(raw_dir)
        corpus = corpus_mod.build_corpus(
            docs, labels, args.min_df, args.max_df_ratio, stopwords
        )
    else:
        raise CliError("ingest needs --docword/--vocab or --raw-dir")
    out = args.out or "corpus.zip"
    content_hash = ckpt.save_corpus(out, corpus)
    print(f"wrote {out}: {corpus.num_docs} docs, vocabulary {corpus.vocab.size}, "
          f"sha256 {content_hash}")
    return 0


def cmd_train(args):
    corpus = ckpt.load_corpus(_require(args.corpus, "corpus artifact"))
    cfg = TrainConfig(
        n_topics=args.topics, hidden=args.hidden, n_critic=args.n_critic,
        batch_size=args.batch, clip=args.clip, lr=args.lr,
        beta1=args.beta1, beta2=args.beta2, leak=args.leak,
        alpha=args.alpha, iters=args.iters, seed=args.seed,
    )
    embeddings = None
    if args.variant == VARIANT_GAUSSIAN:
        if not args.embeddings:
            raise CliError("--variant gaussian-bat requires --embeddings")
        embeddings = ckpt.load_embeddings_text(
            _require(args.embeddings, "embeddings file"), corpus.vocab,
            oov_rng=SeededRng(cfg.seed, STREAM_OOV),
        )
    result = train(corpus, cfg, args.variant, embeddings)
    out = args.checkpoint or "model.ckpt"
    ckpt.save_checkpoint(
        out, args.variant, cfg, corpus.vocab,
        result.encoder, result.generator, result.discriminator, cfg.seed,
    )
    history_path = args.out or str(Path(out).with_suffix(".history.jsonl"))
    ckpt.write_history(history_path, cfg, result.history, args.variant)
    print(f"wrote {out} and {history_path} ({cfg.iters} iterations)")
    return 0


def cmd_topics(args):
    model = ckpt.load_checkpoint(_require(args.checkpoint, "checkpoint"))
    topics = infer_eval.extract_topics(model.generator, model.vocab, args.top_n)
    lines = [f"{t.topic_id}\t{' '.join(t.words)}" for t in topics]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({len(topics)} topics)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_infer(args):
    model = ckpt.load_checkpoint(_require(args.checkpoint, "checkpoint"))
    corpus = ckpt.load_corpus(_require(args.corpus, "corpus artifact"))
    if corpus.vocab.tokens != model.vocab.tokens:
        raise CliError("corpus vocabulary does not match the checkpoint vocabulary")
    docs = corpus_mod.tfidf_matrix(corpus)
    clusters = infer_eval.infer_clusters(model.encoder, docs)
    text = "".join(f"{i}\t{int(c)}\n" for i, c in enumerate(clusters))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out} ({len(clusters)} documents)")
    else:
        sys.stdout.write(text)
    return 0


def _load_cluster_file(path):
    clusters = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CliError(f"{path}:{lineno}: expected 'doc_id<TAB>cluster'")
        clusters.append(int(parts[1]))
    return np.asarray(clusters)


def cmd_eval(args):
    report = {}
    corpus = None
    model = None
    if args.checkpoint:
        model = ckpt.load_checkpoint(_require(args.checkpoint, "checkpoint"))
    if args.corpus:
        corpus = ckpt.load_corpus(_require(args.corpus, "corpus artifact"))

    if model is not None and corpus is not None:
        topics = infer_eval.extract_topics(model.generator, model.vocab, args.top_n)
        token_docs = [
            [corpus.vocab.tokens[w] for w, n in sorted(d.counts.items()) for _ in range(n)]
            for d in corpus.docs
        ]
        counts = infer_eval.build_cooccurrence(token_docs, args.window)
        report["coherence"] = infer_eval.coherence_report(topics, counts, args.eps)
        report["topics"] = [{"topic_id": t.topic_id, "words": t.words} for t in topics]

    labels = None
    if args.labels:
        labels = corpus_mod.load_labels(_require(args.labels, "label file"))
    elif corpus is not None and corpus.labels is not None:
        labels = corpus.labels

    clusters = None
    if args.clusters:
        clusters = _load_cluster_file(_require(args.clusters, "cluster file"))
    elif model is not None and corpus is not None:
        clusters = infer_eval.infer_clusters(model.encoder, corpus_mod.tfidf_matrix(corpus))

    if labels is not None and clusters is not None:
        if len(labels) != len(clusters):
            raise CliError(f"{len(labels)} labels vs {len(clusters)} cluster assignments")
        report["accuracy"] = infer_eval.clustering_accuracy(labels, clusters)

    if not report:
        raise CliError("eval needs a checkpoint+corpus for coherence and/or "
                       "labels+clusters for accuracy")
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="batopic",
        description="Adversarially trained topic models: ingest, train, inspect, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file; command-line flags override it")

    p = sub.add_parser("ingest", help="normalize a corpus into a reusable artifact")
    common(p)
    p.add_argument("--docword", help="UCI bag-of-words triple file")
    p.add_argument("--vocab", help="vocabulary file for --docword (one token per line)")
    p.add_argument("--raw-dir", help="directory of UTF-8 text files, one document each")
    p.add_argument("--labels", help="label file, one integer per line")
    p.add_argument("--stopwords", help="stopword file for raw-text ingestion")
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--max-df-ratio", type=float, default=1.0)
    p.add_argument("--out", help="output corpus artifact path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train a model on an ingested corpus")
    common(p)
    p.add_argument("--corpus", help="corpus artifact from ingest")
    p.add_argument("--variant", choices=[VARIANT_BAT, VARIANT_GAUSSIAN], default=VARIANT_BAT)
    p.add_argument("--embeddings", help="embeddings text file (token v1 ... vD)")
    p.add_argument("--topics", type=int, default=20, help="number of topics K")
    p.add_argument("--hidden", type=int, default=64, help="representation layer width")
    p.add_argument("--alpha", type=float, default=None,
                   help="symmetric Dirichlet concentration (default 1/K)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=15000, help="generator iterations")
    p.add_argument("--n-critic", type=int, default=5, help="critic updates per iteration")
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--clip", type=float, default=0.01, help="critic weight clip bound")
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--beta1", type=float, default=0.5)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--leak", type=float, default=0.2)
    p.add_argument("--checkpoint", help="output checkpoint path")
    p.add_argument("--out", help="output history path (default: next to the checkpoint)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("topics", help="write top words per topic from a checkpoint")
    common(p)
    p.add_argument("--checkpoint")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("infer", help="assign a cluster (argmax topic) to every document")
    common(p)
    p.add_argument("--checkpoint")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="coherence report and/or clustering accuracy")
    common(p)
    p.add_argument("--checkpoint")
    p.add_argument("--corpus")
    p.add_argument("--labels")
    p.add_argument("--clusters", help="cluster file from infer (doc_id<TAB>cluster)")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_merge_config_args(argv))
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (corpus_mod.CorpusError, ckpt.CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
