"""Synthetic corpora with known topic structure, used as recovery oracles.

Documents are sampled from planted topic-word distributions through a
Dirichlet document-topic mixture, so the generating distributions and the
true document classes are available as ground truth for end-to-end checks
and for the narrative demos.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import BowDocument, Corpus, Vocabulary
from .sampling import DirichletPrior, SeededRng, sample_dirichlet


@dataclass
class PlantedCorpus:
    corpus: Corpus
    topic_word: np.ndarray      # (K_true, V) generating distributions
    doc_topic: np.ndarray       # (N, K_true) mixing proportions
    labels: np.ndarray          # dominant planted topic per document


def planted_topic_word(n_topics, n_vocab, rng, inside_mass=0.9):
    """Well-separated topics: each owns an equal vocabulary block.

    ``inside_mass`` of each topic's probability falls on its own block with a
    Zipf-like decay (randomly assigned within the block), the rest spreads
    uniformly over the remaining words. The decay keeps each topic's top
    words clearly heavier than the block tail, so rank-based recovery checks
    are well-posed.
    """
    phi = np.full((n_topics, n_vocab), (1.0 - inside_mass) / n_vocab)
    block = n_vocab // n_topics
    for k in range(n_topics):
        lo, hi = k * block, (k + 1) * block if k < n_topics - 1 else n_vocab
        weights = 1.0 / np.arange(1, hi - lo + 1)
        rng.shuffle(weights)
        phi[k, lo:hi] += inside_mass * weights / weights.sum()
    return phi / phi.sum(axis=1, keepdims=True)


def sample_planted_corpus(n_topics=3, n_vocab=60, n_docs=600, doc_len=40,
                          mixing_alpha=0.1, seed=0, inside_mass=0.9):
    """Corpus drawn from planted topics with symmetric Dirichlet mixing.

    Tokens are synthetic strings ("w0000", "w0001", ...) so the corpus runs
    through the ordinary vocabulary/TF-IDF pipeline. Labels are the dominant
    planted topic of each document.
    """
    rng = SeededRng(seed, 100)
    phi = planted_topic_word(n_topics, n_vocab, rng, inside_mass)
    prior = DirichletPrior.symmetric(n_topics, mixing_alpha)
    doc_topic = sample_dirichlet(prior, rng, size=n_docs)
    word_dists = doc_topic @ phi
    word_dists /= word_dists.sum(axis=1, keepdims=True)

    tokens = [f"w{i:04d}" for i in range(n_vocab)]
    docs = []
    for n in range(n_docs):
        counts_vec = rng.multinomial(doc_len, word_dists[n])
        counts = {int(w): int(c) for w, c in enumerate(counts_vec) if c > 0}
        docs.append(BowDocument(counts))
    df = np.zeros(n_vocab, dtype=np.int64)
    for d in docs:
        for w in d.counts:
            df[w] += 1
    if np.any(df == 0):
        # resample corpora never leave a word unused at these sizes; guard anyway
        raise ValueError("planted corpus left some vocabulary words unused; "
                         "increase n_docs or doc_len")
    labels = np.argmax(doc_topic, axis=1)
    vocab = Vocabulary(tokens, df, n_docs)
    corpus = Corpus(vocab, docs, [int(x) for x in labels])
    return PlantedCorpus(corpus, phi, doc_topic, labels)


def class_embeddings(topic_word, embed_dim, seed=0, spread=0.4, centroid_scale=2.0):
    """Embeddings that encode planted word relatedness.

    Each topic gets a random centroid of norm ``centroid_scale``; every word
    sits at the probability-weighted mixture of the centroids of the topics
    that use it, plus isotropic noise whose scale shrinks with the word's
    topical prominence. Strongly topical words therefore cluster tightly
    around their topic's centroid while tail words scatter, mimicking the
    geometry pre-trained embeddings contribute.
    """
    rng = SeededRng(seed, 102)
    n_topics, n_vocab = topic_word.shape
    centroids = rng.normal((n_topics, embed_dim))
    centroids *= centroid_scale / np.linalg.norm(centroids, axis=1, keepdims=True)
    # weight of topic k for word v, normalized over topics
    w = topic_word / topic_word.sum(axis=0, keepdims=True)
    prominence = (topic_word / topic_word.max(axis=1, keepdims=True)).max(axis=0)
    noise_scale = spread * (1.05 - prominence)
    emb = w.T @ centroids + noise_scale[:, None] * rng.normal((n_vocab, embed_dim))
    return emb
