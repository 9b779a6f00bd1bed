"""Topic extraction, cluster inference, clustering accuracy, and coherence.

Coherence (NPMI and UCI) is computed from boolean sliding-window
co-occurrence counts over a reference corpus — by default the training corpus
itself, window 10, eps 1e-12. Scores computed this way are comparable between
models scored on the same reference corpus, but not to scores from external
reference corpora.
"""

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import GaussianTopicBank, gaussian_topic_word

COHERENCE_LADDER = (50, 70, 90, 100)


@dataclass
class TopicWordList:
    """Top words of one topic, ranked by probability (descending)."""

    topic_id: int
    words: list
    probs: list


@dataclass
class CooccurrenceCounts:
    """Boolean sliding-window counts over a reference corpus.

    A word (or pair) counts once per window containing it; windows slide by
    one token and a document shorter than the window forms a single window.
    """

    window: int
    n_windows: int
    word_counts: Counter
    pair_counts: Counter

    def p_word(self, w):
        return self.word_counts.get(w, 0) / self.n_windows

    def p_pair(self, a, b):
        key = (a, b) if a <= b else (b, a)
        return self.pair_counts.get(key, 0) / self.n_windows


def _rank_top_words(weights, vocab, top_n):
    # ties broken by ascending word id: sort on (-prob, id)
    order = np.lexsort((np.arange(weights.size), -weights))[:top_n]
    return [vocab.tokens[i] for i in order], [float(weights[i]) for i in order]


def extract_topics(model, vocab, top_n=10):
    """Top-``top_n`` word lists for every topic of a trained generator.

    A dense generator is probed with one-hot topic vectors in eval mode; a
    Gaussian bank is read out directly as its topic-word matrix — the same
    matrix the training forward pass uses.
    """
    if top_n > vocab.size:
        raise ValueError(f"top_n={top_n} exceeds vocabulary size {vocab.size}")
    if isinstance(model, GaussianTopicBank):
        phi = gaussian_topic_word(model)
    else:
        probes = np.eye(model.n_topics)
        phi, _ = model.forward(probes, "eval")
    return [
        TopicWordList(k, *_rank_top_words(phi[k], vocab, top_n))
        for k in range(phi.shape[0])
    ]


def infer_clusters(enc, docs):
    """Per-document argmax topic of the encoder output (ties: lowest index)."""
    theta, _ = enc.forward(np.asarray(docs, dtype=np.float64), "eval")
    return np.argmax(theta, axis=1)


def clustering_accuracy(labels, clusters):
    """Best-map clustering accuracy via max-weight bipartite matching.

    Builds the label-cluster contingency matrix and finds the one-to-one
    label/cluster map maximizing the matched count (Kuhn-Munkres);
    rectangular matrices are handled as-is, which is equivalent to padding
    with zero-weight dummy nodes.
    """
    labels = np.asarray(labels)
    clusters = np.asarray(clusters)
    if labels.shape != clusters.shape:
        raise ValueError("labels and clusters must have equal length")
    label_vals = np.unique(labels)
    cluster_vals = np.unique(clusters)
    table = np.zeros((label_vals.size, cluster_vals.size), dtype=np.int64)
    li = np.searchsorted(label_vals, labels)
    ci = np.searchsorted(cluster_vals, clusters)
    np.add.at(table, (li, ci), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / labels.size


def build_cooccurrence(reference_docs, window=10):
    """Sliding-window co-occurrence counts over tokenized documents."""
    if window < 1:
        raise ValueError("window must be >= 1")
    word_counts = Counter()
    pair_counts = Counter()
    n_windows = 0
    for doc in reference_docs:
        if not doc:
            continue
        spans = range(len(doc) - window + 1) if len(doc) > window else (0,)
        for start in spans:
            seen = sorted(set(doc[start:start + window]))
            n_windows += 1
            word_counts.update(seen)
            for i in range(len(seen)):
                for j in range(i + 1, len(seen)):
                    pair_counts[(seen[i], seen[j])] += 1
    return CooccurrenceCounts(window, n_windows, word_counts, pair_counts)


def _topic_words(topic):
    return topic.words if isinstance(topic, TopicWordList) else list(topic)


def _pair_stats(topic, counts, eps):
    words = _topic_words(topic)
    if len(words) < 2:
        raise ValueError("coherence needs at least 2 topic words")
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            p_joint = counts.p_pair(words[i], words[j]) + eps
            marg = counts.p_word(words[i]) * counts.p_word(words[j])
            # a word absent from the reference corpus contributes via eps
            if marg == 0.0:
                marg = eps
            yield p_joint, marg


def npmi_coherence(topic, counts, eps=1e-12):
    """Mean normalized pointwise mutual information over word pairs."""
    vals = [math.log(pj / marg) / -math.log(pj) for pj, marg in _pair_stats(topic, counts, eps)]
    return sum(vals) / len(vals)


def uci_coherence(topic, counts, eps=1e-12):
    """Mean pairwise pointwise mutual information over word pairs."""
    vals = [math.log(pj / marg) for pj, marg in _pair_stats(topic, counts, eps)]
    return sum(vals) / len(vals)


def coherence_report(topics, counts, eps=1e-12, metrics=("npmi", "uci")):
    """Per-topic coherence plus top-P% ladder averages.

    For each metric the report carries every topic's score, the overall
    average, and the averages over topics ranked in the top 50/70/90/100
    percent by that metric.
    """
    fns = {"npmi": npmi_coherence, "uci": uci_coherence}
    report = {}
    for name in metrics:
        scores = [fns[name](t, counts, eps) for t in topics]
        ranked = sorted(scores, reverse=True)
        ladder = {}
        for pct in COHERENCE_LADDER:
            count = max(1, math.ceil(pct * len(scores) / 100))
            ladder[pct] = sum(ranked[:count]) / count
        report[name] = {
            "per_topic": scores,
            "average": sum(scores) / len(scores),
            "top_percent_average": ladder,
        }
    return report
