#!/usr/bin/env python3
"""The full command-line pipeline: ingest -> train -> topics -> infer -> eval.

Writes a small corpus in the UCI bag-of-words layout, then drives every CLI
command through a scratch directory and prints the resulting artifacts. The
same flow works on any corpus in UCI form (three header lines D, W, NNZ and
1-based "docId wordId count" triples plus a vocabulary file).

Run:  python3 demos/03_cli_pipeline.py
(~1 minute on one CPU core)
"""

import json
import tempfile
from pathlib import Path

from batopic.cli import main
from batopic.corpus import save_uci_bow
from batopic.synthetic import class_embeddings, sample_planted_corpus

work = Path(tempfile.mkdtemp(prefix="batopic-demo-"))
print(f"scratch directory: {work}")

# --- write raw inputs: UCI bag-of-words + labels + embeddings ---------------
planted = sample_planted_corpus(
    n_topics=3, n_vocab=60, n_docs=400, doc_len=40, mixing_alpha=0.1, seed=7
)
corpus = planted.corpus
save_uci_bow(corpus, work / "docword.txt", work / "vocab.txt")
(work / "labels.txt").write_text("\n".join(str(l) for l in corpus.labels) + "\n")

emb = class_embeddings(planted.topic_word, embed_dim=8, seed=7)
(work / "embeddings.txt").write_text("\n".join(
    " ".join([tok] + [f"{x:.6f}" for x in emb[i]])
    for i, tok in enumerate(corpus.vocab.tokens)
) + "\n")

def run(*argv):
    print(f"\n$ batopic {' '.join(argv)}")
    code = main(list(argv))
    assert code == 0, f"exit code {code}"

# --- ingest ------------------------------------------------------------------
run("ingest", "--docword", str(work / "docword.txt"), "--vocab", str(work / "vocab.txt"),
    "--labels", str(work / "labels.txt"), "--out", str(work / "corpus.zip"))

# --- train (defaults follow the standard recipe; sizes overridden for speed) --
run("train", "--corpus", str(work / "corpus.zip"), "--variant", "gaussian-bat",
    "--embeddings", str(work / "embeddings.txt"), "--topics", "3", "--hidden", "32",
    "--iters", "1200", "--lr", "1e-3", "--seed", "0",
    "--checkpoint", str(work / "model.ckpt"))

# --- topics / infer / eval ----------------------------------------------------
run("topics", "--checkpoint", str(work / "model.ckpt"), "--top-n", "10",
    "--out", str(work / "topics.txt"))
print(Path(work / "topics.txt").read_text().rstrip())

run("infer", "--checkpoint", str(work / "model.ckpt"), "--corpus", str(work / "corpus.zip"),
    "--out", str(work / "clusters.tsv"))
print("first cluster assignments:",
      " ".join(Path(work / "clusters.tsv").read_text().split()[:8]), "...")

run("eval", "--checkpoint", str(work / "model.ckpt"), "--corpus", str(work / "corpus.zip"),
    "--out", str(work / "report.json"))
report = json.loads((work / "report.json").read_text())
print(f"clustering accuracy: {report['accuracy']:.3f}")
print("coherence ladder (npmi):",
      {k: round(v, 4) for k, v in report["coherence"]["npmi"]["top_percent_average"].items()})
