"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with output visible:  pytest tests/test_acceptance.py -s
The full module takes roughly 20 minutes on one CPU core; criteria 5 and 6
train real models and dominate the runtime.
"""

import itertools
import json
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.stats import spearmanr

from batopic.cli import main as cli_main
from batopic.corpus import save_uci_bow, tfidf_matrix
from batopic.infer_eval import (
    build_cooccurrence,
    clustering_accuracy,
    extract_topics,
    infer_clusters,
    npmi_coherence,
    uci_coherence,
)
from batopic.linalg import cholesky, mvn_log_density
from batopic.model import (
    TrainConfig,
    gaussian_topic_word,
    generator_forward,
    train,
)
from batopic.sampling import DirichletPrior, SeededRng, sample_dirichlet
from batopic.synthetic import class_embeddings, sample_planted_corpus

from gradcheck import check_full_gradients
from test_infer_eval import brute_force_accuracy, hand_corpus


@contextmanager
def criterion(number, name):
    try:
        yield
    except Exception:
        print(f"\n[criterion {number}] {name}: FAIL")
        raise
    print(f"\n[criterion {number}] {name}: PASS")


# -------------------------------------------------------------------------
# 1. gradient fidelity
# -------------------------------------------------------------------------

def test_criterion_1_gradient_fidelity():
    with criterion(1, "gradient fidelity vs central finite differences"):
        for variant in ("bat", "gaussian-bat"):
            worst = check_full_gradients(
                variant, n_vocab=12, n_topics=3, hidden=6, embed_dim=4,
                batch=4, seed=0, tol=1e-4, h=1e-5,
            )
            assert worst < 1e-4


# -------------------------------------------------------------------------
# 2. simplex invariants and critic clipping during training
# -------------------------------------------------------------------------

def test_criterion_2_simplex_and_clip_invariants():
    with criterion(2, "simplex rows and critic weight bound over a smoke run"):
        corpus = sample_planted_corpus(
            n_topics=5, n_vocab=50, n_docs=300, doc_len=30, seed=20
        ).corpus
        cfg = TrainConfig(n_topics=5, hidden=16, batch_size=32, iters=200, seed=3)
        assert cfg.clip == 0.01
        checked = {"steps": 0}

        def monitor(event, info):
            if event != "critic_step":
                return
            checked["steps"] += 1
            for key in ("theta_r", "theta_f", "d_r", "d_f"):
                rows = info[key]
                np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-6)
            assert info["max_abs_critic_weight"] <= cfg.clip  # exact bound

        train(corpus, cfg, "bat", callback=monitor)
        assert checked["steps"] == 200 * cfg.n_critic


# -------------------------------------------------------------------------
# 3. Dirichlet sampler statistics
# -------------------------------------------------------------------------

def test_criterion_3_sampler_statistics():
    with criterion(3, "Dirichlet moments and vertex concentration"):
        n = 100_000
        for i, alpha in enumerate(([1.0, 1.0, 1.0], [2.0, 1.0], [0.1] * 5)):
            alpha = np.asarray(alpha)
            draws = sample_dirichlet(DirichletPrior(alpha), SeededRng(30 + i), size=n)
            mean = alpha / alpha.sum()
            var = mean * (1.0 - mean) / (alpha.sum() + 1.0)
            se = np.sqrt(var / n)
            np.testing.assert_array_less(np.abs(draws.mean(axis=0) - mean), 3.0 * se)

        sparse = sample_dirichlet(DirichletPrior.symmetric(5, 0.1), SeededRng(40), 10_000)
        dense = sample_dirichlet(DirichletPrior.symmetric(5, 10.0), SeededRng(41), 10_000)
        assert sparse.max(axis=1).mean() > dense.max(axis=1).mean()


# -------------------------------------------------------------------------
# 4. oracle equivalences
# -------------------------------------------------------------------------

def test_criterion_4_oracle_equivalence():
    with criterion(4, "Hungarian, coherence, and Gaussian-density oracles"):
        # Hungarian accuracy == K!-brute-force on 200 random instances
        rng = np.random.default_rng(50)
        for _ in range(200):
            k_lab = int(rng.integers(2, 7))
            k_clu = int(rng.integers(2, 7))
            n = int(rng.integers(8, 50))
            labels = rng.integers(0, k_lab, size=n)
            clusters = rng.integers(0, k_clu, size=n)
            assert clustering_accuracy(labels, clusters) == pytest.approx(
                brute_force_accuracy(labels, clusters), abs=1e-12
            )

        # NPMI / UCI on the hand-built 20-window corpus
        import math
        eps = 1e-12
        counts = hand_corpus()
        npmi_expect = (
            math.log((0.4 + eps) / 0.36) / -math.log(0.4 + eps)
            + math.log(eps / 0.18) / -math.log(eps)
            + math.log((0.2 + eps) / 0.18) / -math.log(0.2 + eps)
        ) / 3.0
        uci_expect = (
            math.log((0.4 + eps) / 0.36) + math.log(eps / 0.18)
            + math.log((0.2 + eps) / 0.18)
        ) / 3.0
        assert npmi_coherence(["a", "b", "c"], counts, eps) == pytest.approx(
            npmi_expect, abs=1e-9
        )
        assert uci_coherence(["a", "b", "c"], counts, eps) == pytest.approx(
            uci_expect, abs=1e-9
        )

        # Cholesky-route Gaussian log density == naive inverse/determinant route
        rng = np.random.default_rng(51)
        for d in (1, 2, 3, 4):
            for _ in range(25):
                a = rng.normal(size=(d, d))
                cov = a @ a.T + d * np.eye(d)
                mu = rng.normal(size=d)
                e = rng.normal(size=d)
                diff = e - mu
                naive = float(
                    -0.5 * diff @ np.linalg.inv(cov) @ diff
                    - 0.5 * np.log((2.0 * np.pi) ** d * np.linalg.det(cov))
                )
                assert mvn_log_density(e, mu, cholesky(cov)) == pytest.approx(
                    naive, abs=1e-9
                )


# -------------------------------------------------------------------------
# 5. planted-topic recovery, end to end
# -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def planted_small():
    return sample_planted_corpus(
        n_topics=3, n_vocab=60, n_docs=600, doc_len=40, mixing_alpha=0.1, seed=42
    )


def best_permutation_hits(planted_phi, extracted_phi, top_planted=3, top_extracted=10):
    """Best one-to-one topic match by brute force over all permutations.

    Returns (per-topic top-word containment counts, permutation) for the
    permutation maximizing total containment of each planted topic's
    heaviest words in the matched extracted topic's top list.
    """
    k = planted_phi.shape[0]
    best = None
    for perm in itertools.permutations(range(k)):
        hits = []
        for i in range(k):
            top3 = set(np.argsort(-planted_phi[i])[:top_planted])
            top10 = set(np.argsort(-extracted_phi[perm[i]])[:top_extracted])
            hits.append(len(top3 & top10))
        if best is None or sum(hits) > sum(best[0]):
            best = (hits, perm)
    return best


def test_criterion_5_planted_topic_recovery(planted_small):
    with criterion(5, "planted-topic recovery for both variants"):
        corpus = planted_small.corpus
        docs = tfidf_matrix(corpus)
        emb = class_embeddings(planted_small.topic_word, embed_dim=8, seed=1)
        for variant, lr in (("bat", 1e-4), ("gaussian-bat", 1e-3)):
            cfg = TrainConfig(n_topics=3, hidden=32, iters=3000, lr=lr, seed=0)
            result = train(corpus, cfg, variant,
                           embeddings=emb if variant == "gaussian-bat" else None)

            acc = clustering_accuracy(corpus.labels, infer_clusters(result.encoder, docs))
            assert acc >= 0.80, f"{variant}: accuracy {acc:.3f} < 0.80"

            if variant == "gaussian-bat":
                phi = gaussian_topic_word(result.generator)
            else:
                phi = generator_forward(result.generator, np.eye(3), "eval")
            hits, perm = best_permutation_hits(planted_small.topic_word, phi)
            assert all(h == 3 for h in hits), (
                f"{variant}: top-3 containment per topic {hits}"
            )
            if variant == "bat":
                # matched topic-word rows track the planted distributions
                rho = np.mean([
                    spearmanr(planted_small.topic_word[i], phi[perm[i]]).statistic
                    for i in range(3)
                ])
                assert rho >= 0.8, f"mean Spearman rho {rho:.3f} < 0.8"
            print(f"  [5] {variant}: accuracy={acc:.3f} top3-containment={hits}")


# -------------------------------------------------------------------------
# 6. desk-scale five-class trend check
# -------------------------------------------------------------------------

def test_criterion_6_trend_check():
    with criterion(6, "five-class trend: coherence above random, Gaussian >= dense"):
        planted = sample_planted_corpus(
            n_topics=5, n_vocab=2000, n_docs=2000, doc_len=250,
            mixing_alpha=0.1, seed=77,
        )
        corpus = planted.corpus
        assert corpus.vocab.size == 2000 and corpus.num_docs == 2000
        docs = tfidf_matrix(corpus)
        emb = class_embeddings(
            planted.topic_word, embed_dim=16, seed=77, spread=0.3, centroid_scale=4.0
        )

        token_docs = [
            [corpus.vocab.tokens[w] for w, n in sorted(d.counts.items()) for _ in range(n)]
            for d in corpus.docs
        ]
        counts = build_cooccurrence(token_docs, window=10)

        rng = SeededRng(123, 7)
        random_scores = []
        for _ in range(50):
            words = [corpus.vocab.tokens[i]
                     for i in rng.choice(corpus.vocab.size, 10, replace=False)]
            random_scores.append(npmi_coherence(words, counts))
        random_mean = float(np.mean(random_scores))

        accs = {"bat": [], "gaussian-bat": []}
        for variant in ("bat", "gaussian-bat"):
            for seed in (0, 1, 2):
                cfg = TrainConfig(n_topics=5, hidden=64, iters=2000, lr=1e-3, seed=seed)
                result = train(corpus, cfg, variant,
                               embeddings=emb if variant == "gaussian-bat" else None)
                acc = clustering_accuracy(
                    corpus.labels, infer_clusters(result.encoder, docs)
                )
                accs[variant].append(acc)
                topics = extract_topics(result.generator, corpus.vocab, 10)
                npmi = float(np.mean([npmi_coherence(t, counts) for t in topics]))
                # (a) trained topics beat random word lists by a clear margin
                assert npmi >= random_mean + 0.05, (
                    f"{variant} seed {seed}: NPMI {npmi:.4f} vs random {random_mean:.4f}"
                )
                print(f"  [6] {variant} seed={seed}: acc={acc:.3f} npmi={npmi:.4f} "
                      f"(random {random_mean:.4f})")

        # (b) the embedding-informed variant wins on average over 3 seeds
        mean_bat = float(np.mean(accs["bat"]))
        mean_gauss = float(np.mean(accs["gaussian-bat"]))
        print(f"  [6] mean accuracy: dense={mean_bat:.4f} gaussian={mean_gauss:.4f}")
        assert mean_gauss >= mean_bat


# -------------------------------------------------------------------------
# 7. bytewise determinism of the training command
# -------------------------------------------------------------------------

def test_criterion_7_determinism(tmp_path):
    with criterion(7, "identical config and seed give byte-identical artifacts"):
        corpus = sample_planted_corpus(
            n_topics=3, n_vocab=40, n_docs=150, doc_len=25, seed=60
        ).corpus
        save_uci_bow(corpus, tmp_path / "docword.txt", tmp_path / "vocab.txt")
        assert cli_main([
            "ingest", "--docword", str(tmp_path / "docword.txt"),
            "--vocab", str(tmp_path / "vocab.txt"), "--out", str(tmp_path / "c.zip"),
        ]) == 0
        for name in ("one", "two"):
            assert cli_main([
                "train", "--corpus", str(tmp_path / "c.zip"), "--topics", "3",
                "--hidden", "8", "--batch", "16", "--iters", "10", "--seed", "7",
                "--checkpoint", str(tmp_path / f"{name}.ckpt"),
            ]) == 0
        assert (tmp_path / "one.ckpt").read_bytes() == (tmp_path / "two.ckpt").read_bytes()
        assert (tmp_path / "one.history.jsonl").read_bytes() == \
            (tmp_path / "two.history.jsonl").read_bytes()


# -------------------------------------------------------------------------
# 8. one-hot collapse of the Gaussian mixture generator
# -------------------------------------------------------------------------

def test_criterion_8_one_hot_collapse():
    with criterion(8, "one-hot topic vectors reproduce topic-word rows bit-exactly"):
        from batopic.model import GaussianTopicBank, gaussian_generator_forward

        rng = SeededRng(70)
        bank = GaussianTopicBank.init(np.asarray(rng.normal((25, 6))), 4, rng)
        phi = gaussian_topic_word(bank)
        for k in range(4):
            one_hot = np.zeros((1, 4))
            one_hot[0, k] = 1.0
            out = gaussian_generator_forward(bank, one_hot)
            assert np.array_equal(out[0], phi[k])  # bit-exact

        single = GaussianTopicBank.init(np.asarray(rng.normal((25, 6))), 1, rng)
        phi1 = gaussian_topic_word(single)
        thetas = sample_dirichlet(DirichletPrior.symmetric(1), SeededRng(71), size=8)
        out = gaussian_generator_forward(single, thetas)
        for row in out:
            assert np.array_equal(row, phi1[0])
