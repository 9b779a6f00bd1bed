"""Corpus ingestion, vocabulary construction, and TF-IDF document vectors.

A document is represented as a point on the vocabulary simplex: term
frequencies weighted by inverse document frequency and normalized to sum
to 1. idf uses the natural logarithm; the base cancels in the normalization
so the choice is cosmetic.

Supported inputs: the UCI bag-of-words layout (three header lines D, W, NNZ
followed by 1-based "docId wordId count" triples plus a one-token-per-line
vocabulary file), and directories of raw UTF-8 text files (one document per
file, read in lexicographic filename order).
"""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_TOKEN_CLEAN = re.compile(r"[^\w]|_", flags=re.UNICODE)


class CorpusError(ValueError):
    """Raised for malformed corpus inputs and degenerate documents."""


@dataclass
class Vocabulary:
    """Token table with per-token document frequencies.

    ids are contiguous in [0, V) and bijective with tokens; ``doc_freq[i]``
    counts the documents containing token i and ``num_docs`` is the corpus
    size, so idf_i = log(num_docs / doc_freq[i]).
    """

    tokens: list
    doc_freq: np.ndarray
    num_docs: int
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.doc_freq = np.asarray(self.doc_freq, dtype=np.int64)
        if not self.index:
            self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.tokens) < 1:
            raise CorpusError("vocabulary needs at least 1 token")
        if len(self.tokens) != len(set(self.tokens)):
            raise CorpusError("vocabulary tokens must be distinct")
        if np.any(self.doc_freq < 1) or np.any(self.doc_freq > self.num_docs):
            raise CorpusError("document frequencies must lie in [1, num_docs]")

    @property
    def size(self):
        return len(self.tokens)

    def idf(self):
        return np.log(self.num_docs / self.doc_freq.astype(np.float64))


@dataclass
class BowDocument:
    """Sparse bag of words: word id -> positive count."""

    counts: dict

    def __post_init__(self):
        if any(c < 1 for c in self.counts.values()):
            raise CorpusError("bag-of-words counts must be >= 1")

    @property
    def total(self):
        return sum(self.counts.values())

    def is_empty(self):
        return not self.counts


@dataclass
class Corpus:
    vocab: Vocabulary
    docs: list
    labels: list = None

    def __post_init__(self):
        if self.vocab.num_docs != len(self.docs):
            raise CorpusError(
                f"vocabulary num_docs={self.vocab.num_docs} but corpus has {len(self.docs)} docs"
            )
        if self.labels is not None and len(self.labels) != len(self.docs):
            raise CorpusError("labels must align one-to-one with documents")

    @property
    def num_docs(self):
        return len(self.docs)


def default_tokenize(text):
    """Lowercase, strip non-alphanumeric characters, split on whitespace."""
    tokens = []
    for raw in text.lower().split():
        tok = _TOKEN_CLEAN.sub("", raw)
        if tok:
            tokens.append(tok)
    return tokens


def build_vocabulary(raw_docs, min_df=1, max_df_ratio=1.0, stopwords=()):
    """Build a Vocabulary from tokenized documents.

    Tokens are kept when min_df <= doc_freq, doc_freq / num_docs <= max_df_ratio,
    and the token is not a stopword. ids are assigned in lexicographic token
    order so vocabularies are reproducible across machines.
    """
    if not raw_docs:
        raise CorpusError("cannot build a vocabulary from zero documents")
    if not 0.0 < max_df_ratio <= 1.0:
        raise CorpusError("max_df_ratio must lie in (0, 1]")
    if min_df < 1:
        raise CorpusError("min_df must be >= 1")
    num_docs = len(raw_docs)
    stopwords = set(stopwords)
    df = {}
    for doc in raw_docs:
        for tok in set(doc):
            df[tok] = df.get(tok, 0) + 1
    kept = sorted(
        tok for tok, n in df.items()
        if n >= min_df and n / num_docs <= max_df_ratio and tok not in stopwords
    )
    if not kept:
        raise CorpusError("vocabulary empty after filtering")
    return Vocabulary(kept, np.array([df[t] for t in kept]), num_docs)


def build_corpus(raw_docs, labels=None, min_df=1, max_df_ratio=1.0, stopwords=()):
    """Vocabulary + bag-of-words corpus from tokenized documents.

    Documents whose every token was filtered out of the vocabulary are
    dropped (together with their labels); the vocabulary document count is
    set to the number of retained documents. Dropping such documents cannot
    change any retained token's document frequency because dropped documents
    contain no in-vocabulary tokens.
    """
    vocab = build_vocabulary(raw_docs, min_df, max_df_ratio, stopwords)
    docs, kept_labels = [], []
    for i, doc in enumerate(raw_docs):
        counts = {}
        for tok in doc:
            wid = vocab.index.get(tok)
            if wid is not None:
                counts[wid] = counts.get(wid, 0) + 1
        if counts:
            docs.append(BowDocument(counts))
            if labels is not None:
                kept_labels.append(labels[i])
    vocab = Vocabulary(vocab.tokens, vocab.doc_freq, len(docs), vocab.index)
    return Corpus(vocab, docs, kept_labels if labels is not None else None)


def tfidf_representation(doc, vocab):
    """Normalized TF-IDF vector of one document (length V, sums to 1).

    weights_i = tf_i * idf_i / sum_v tf_v * idf_v with tf the count fraction
    and idf_i = log(num_docs / doc_freq_i). When every word of the document
    occurs in all documents the idf weights vanish; the normalized tf vector
    is returned instead so the simplex contract still holds.
    """
    if doc.is_empty():
        raise CorpusError("cannot represent empty document")
    v = vocab.size
    tf = np.zeros(v)
    for wid, count in doc.counts.items():
        if wid >= v:
            raise CorpusError(f"word id {wid} outside vocabulary of size {v}")
        tf[wid] = count
    tf /= tf.sum()
    weights = tf * vocab.idf()
    denom = weights.sum()
    if denom == 0.0:
        return tf
    return weights / denom


def tfidf_matrix(corpus):
    """Stacked TF-IDF rows for every document; rows sum to 1."""
    return np.stack([tfidf_representation(d, corpus.vocab) for d in corpus.docs])


# ---------------------------------------------------------------------------
# UCI bag-of-words files
# ---------------------------------------------------------------------------

def load_uci_bow(docword_path, vocab_path, labels=None):
    """Parse the UCI bag-of-words layout into a Corpus.

    Tokens that never occur in the triples are pruned (remapping ids) so the
    vocabulary invariant doc_freq >= 1 holds; word ids become 0-based.
    """
    tokens = [ln.strip() for ln in Path(vocab_path).read_text(encoding="utf-8").splitlines()]
    tokens = [t for t in tokens if t]

    lines = Path(docword_path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 3:
        raise CorpusError(f"{docword_path}: expected 3 header lines (D, W, NNZ)")
    try:
        n_docs, n_words, nnz = (int(lines[i].strip()) for i in range(3))
    except ValueError:
        raise CorpusError(f"{docword_path}: malformed header") from None
    if n_words != len(tokens):
        raise CorpusError(
            f"{docword_path}: header W={n_words} but vocabulary file has {len(tokens)} tokens"
        )

    counts = [dict() for _ in range(n_docs)]
    n_triples = 0
    for lineno, line in enumerate(lines[3:], start=4):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CorpusError(f"{docword_path}:{lineno}: expected 'docId wordId count'")
        try:
            doc_id, word_id, count = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise CorpusError(f"{docword_path}:{lineno}: non-integer triple") from None
        if not 1 <= doc_id <= n_docs:
            raise CorpusError(f"{docword_path}:{lineno}: docId {doc_id} outside [1, {n_docs}]")
        if not 1 <= word_id <= n_words:
            raise CorpusError(f"{docword_path}:{lineno}: wordId {word_id} outside [1, {n_words}]")
        if count < 1:
            raise CorpusError(f"{docword_path}:{lineno}: count must be positive")
        counts[doc_id - 1][word_id - 1] = counts[doc_id - 1].get(word_id - 1, 0) + count
        n_triples += 1
    if n_triples != nnz:
        raise CorpusError(f"{docword_path}: header says NNZ={nnz} but found {n_triples} triples")

    df = np.zeros(n_words, dtype=np.int64)
    for c in counts:
        for wid in c:
            df[wid] += 1
    keep = np.flatnonzero(df > 0)
    remap = {int(old): new for new, old in enumerate(keep)}
    vocab = Vocabulary([tokens[i] for i in keep], df[keep], n_docs)
    docs = [BowDocument({remap[w]: n for w, n in c.items()}) for c in counts]
    return Corpus(vocab, docs, labels)


def save_uci_bow(corpus, docword_path, vocab_path):
    """Write a corpus in the UCI bag-of-words layout (inverse of load_uci_bow)."""
    rows = []
    for doc_id, doc in enumerate(corpus.docs, start=1):
        for word_id in sorted(doc.counts):
            rows.append(f"{doc_id} {word_id + 1} {doc.counts[word_id]}")
    header = [str(corpus.num_docs), str(corpus.vocab.size), str(len(rows))]
    Path(docword_path).write_text("\n".join(header + rows) + "\n", encoding="utf-8")
    Path(vocab_path).write_text("\n".join(corpus.vocab.tokens) + "\n", encoding="utf-8")


def load_text_directory(path, tokenizer=default_tokenize):
    """Tokenized documents from a directory of UTF-8 files, one doc per file.

    Files are read in lexicographic name order; returns (token lists, names).
    """
    files = sorted(p for p in Path(path).iterdir() if p.is_file())
    if not files:
        raise CorpusError(f"{path}: no document files found")
    return [tokenizer(p.read_text(encoding="utf-8")) for p in files], [p.name for p in files]


def load_labels(path):
    """One integer class label per line, aligned with document order."""
    labels = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            labels.append(int(line.strip()))
        except ValueError:
            raise CorpusError(f"{path}:{lineno}: labels must be integers") from None
    return labels
