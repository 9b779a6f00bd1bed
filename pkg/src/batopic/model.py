"""Encoder/generator/discriminator triple and the adversarial training loop.

The encoder maps TF-IDF document vectors (V-simplex) to topic mixtures
(K-simplex); the generator maps sampled topic mixtures back to word
distributions; the critic scores concatenated [topic; word] pairs and is
trained as a weight-clipped Wasserstein critic. The Gaussian variant replaces
the generator's dense stack with per-topic multivariate Gaussians over a
frozen word-embedding matrix, so word relatedness shapes the topic-word
distributions.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import nn
from .corpus import tfidf_matrix
from .linalg import LOG_2PI
from .sampling import (
    STREAM_DIRICHLET,
    STREAM_INIT,
    STREAM_SHUFFLE,
    DirichletPrior,
    SeededRng,
    sample_dirichlet,
)

VARIANT_BAT = "bat"
VARIANT_GAUSSIAN = "gaussian-bat"

# floor added to the softplus of the raw Cholesky diagonal; keeps every
# topic covariance safely positive definite under unconstrained updates
CHOL_DIAG_FLOOR = 1e-4


class NumericalError(RuntimeError):
    """A parameter or loss became NaN/Inf during training."""

    def __init__(self, tensor_name, iteration):
        super().__init__(f"non-finite values in {tensor_name} at iteration {iteration}")
        self.tensor_name = tensor_name
        self.iteration = iteration


@dataclass
class TrainConfig:
    """Hyperparameters of one training run.

    Defaults follow the stated training recipe: 5 critic updates per
    generator update, batches of 64, clip bound 0.01, Adam at lr 1e-4 with
    betas (0.5, 0.999). ``alpha`` is the symmetric Dirichlet concentration;
    None means 1/K, which concentrates mass at the simplex vertices.
    """

    n_topics: int
    hidden: int = 64
    n_critic: int = 5
    batch_size: int = 64
    clip: float = 0.01
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    leak: float = 0.2
    alpha: float = None
    iters: int = 15000
    seed: int = 0
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    eps_adam: float = 1e-8

    def __post_init__(self):
        if self.n_topics < 1:
            raise ValueError("n_topics must be >= 1")
        if self.n_critic < 1:
            raise ValueError("n_critic must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.clip <= 0:
            raise ValueError("clip bound must be positive")

    def dirichlet_alpha(self):
        return 1.0 / self.n_topics if self.alpha is None else float(self.alpha)

    def to_dict(self):
        return {
            "n_topics": self.n_topics, "hidden": self.hidden,
            "n_critic": self.n_critic, "batch_size": self.batch_size,
            "clip": self.clip, "lr": self.lr,
            "beta1": self.beta1, "beta2": self.beta2,
            "leak": self.leak, "alpha": self.alpha,
            "iters": self.iters, "seed": self.seed,
            "bn_momentum": self.bn_momentum, "bn_eps": self.bn_eps,
            "eps_adam": self.eps_adam,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class _StackNet:
    """Shared plumbing for the three networks: flat params + tape backward."""

    def __init__(self, stack):
        self.stack = stack

    def forward(self, x, mode):
        return self.stack.forward(x, mode)

    def backward(self, tape, dout):
        grads, dx = self.stack.backward(tape, dout)
        return self.stack.flatten_grads(grads), dx

    def get_flat_params(self):
        return self.stack.get_flat_params()

    def set_flat_params(self, vec):
        self.stack.set_flat_params(vec)

    def num_params(self):
        return self.stack.num_params()


class Encoder(_StackNet):
    """V-simplex -> K-simplex: dense, batchnorm, leaky ReLU, dense, softmax."""

    def __init__(self, stack, n_vocab, n_topics):
        super().__init__(stack)
        self.n_vocab = n_vocab
        self.n_topics = n_topics

    @classmethod
    def init(cls, n_vocab, hidden, n_topics, cfg, rng):
        stack = nn.Stack([
            nn.DenseLayer.init(n_vocab, hidden, rng),
            nn.BatchNormLayer(hidden, cfg.bn_momentum, cfg.bn_eps),
            nn.LeakyReLULayer(cfg.leak),
            nn.DenseLayer.init(hidden, n_topics, rng),
            nn.SoftmaxLayer(),
        ])
        return cls(stack, n_vocab, n_topics)


class Generator(_StackNet):
    """K-simplex -> V-simplex, mirror image of the encoder."""

    def __init__(self, stack, n_topics, n_vocab):
        super().__init__(stack)
        self.n_topics = n_topics
        self.n_vocab = n_vocab

    @classmethod
    def init(cls, n_topics, hidden, n_vocab, cfg, rng):
        stack = nn.Stack([
            nn.DenseLayer.init(n_topics, hidden, rng),
            nn.BatchNormLayer(hidden, cfg.bn_momentum, cfg.bn_eps),
            nn.LeakyReLULayer(cfg.leak),
            nn.DenseLayer.init(hidden, n_vocab, rng),
            nn.SoftmaxLayer(),
        ])
        return cls(stack, n_topics, n_vocab)


class Discriminator(_StackNet):
    """Scores [topic; word] pairs; linear output, no squashing (Wasserstein)."""

    def __init__(self, stack, n_inputs):
        super().__init__(stack)
        self.n_inputs = n_inputs

    @classmethod
    def init(cls, n_inputs, hidden, cfg, rng):
        stack = nn.Stack([
            nn.DenseLayer.init(n_inputs, hidden, rng),
            nn.LeakyReLULayer(cfg.leak),
            nn.DenseLayer.init(hidden, 1, rng),
        ])
        return cls(stack, n_inputs)


class GaussianTopicBank:
    """K trainable Gaussians (mu_k, Sigma_k) over a frozen embedding matrix.

    Sigma_k is parameterized by an unconstrained lower-triangular factor whose
    diagonal passes through softplus plus a small floor, so the covariance
    stays positive definite no matter what the optimizer does. The topic-word
    matrix is the per-topic embedding density normalized over the vocabulary,
    recomputed from the current parameters on every forward pass.
    """

    def __init__(self, mu, chol_raw, embeddings):
        self.mu = np.asarray(mu, dtype=np.float64)
        self.chol_raw = np.asarray(chol_raw, dtype=np.float64)
        self.embeddings = np.asarray(embeddings, dtype=np.float64)
        self.n_topics, self.embed_dim = self.mu.shape
        self.n_vocab = self.embeddings.shape[0]
        if self.embeddings.shape[1] != self.embed_dim:
            raise ValueError("embedding dim does not match topic means")
        if self.chol_raw.shape != (self.n_topics, self.embed_dim, self.embed_dim):
            raise ValueError("chol_raw must be (K, D_e, D_e)")
        self._tril = np.tril_indices(self.embed_dim)

    @classmethod
    def init(cls, embeddings, n_topics, rng):
        embeddings = np.asarray(embeddings, dtype=np.float64)
        n_vocab, embed_dim = embeddings.shape
        if n_topics > n_vocab:
            raise ValueError("more topics than vocabulary entries")
        # means start at K distinct word embeddings; factor starts at identity
        idx = rng.choice(n_vocab, size=n_topics, replace=False)
        mu = embeddings[np.asarray(idx)].copy()
        raw_diag = np.log(np.expm1(1.0 - CHOL_DIAG_FLOOR))
        chol_raw = np.zeros((n_topics, embed_dim, embed_dim))
        for k in range(n_topics):
            np.fill_diagonal(chol_raw[k], raw_diag)
        return cls(mu, chol_raw, embeddings)

    def factor(self, k):
        """Effective lower Cholesky factor L_k with softplus-floored diagonal."""
        raw = self.chol_raw[k]
        chol = np.tril(raw, -1)
        np.fill_diagonal(chol, np.logaddexp(0.0, np.diag(raw)) + CHOL_DIAG_FLOOR)
        return chol

    def _phi_with_tape(self):
        emb = self.embeddings
        k_topics, d_e = self.n_topics, self.embed_dim
        phi = np.empty((k_topics, self.n_vocab))
        chols, zs = [], []
        for k in range(k_topics):
            chol = self.factor(k)
            z = solve_triangular(chol, (emb - self.mu[k]).T, lower=True)
            logdens = -0.5 * np.sum(z * z, axis=0) \
                - np.sum(np.log(np.diag(chol))) - 0.5 * d_e * LOG_2PI
            shifted = logdens - logdens.max()
            expd = np.exp(shifted)
            phi[k] = expd / expd.sum()
            chols.append(chol)
            zs.append(z)
        if not np.all(np.isfinite(phi)):
            raise FloatingPointError("non-finite topic-word distribution")
        return phi, (chols, zs)

    def topic_word(self):
        """Current K x V topic-word matrix; rows on the vocabulary simplex."""
        phi, _ = self._phi_with_tape()
        return phi

    def forward(self, theta, mode="train"):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.ndim != 2 or theta.shape[1] != self.n_topics:
            raise ValueError(f"theta shape {theta.shape} does not match K={self.n_topics}")
        phi, (chols, zs) = self._phi_with_tape()
        d_f = theta @ phi
        return d_f, (theta, phi, chols, zs)

    def backward(self, tape, dout):
        """Gradients of a scalar loss w.r.t. (mu, chol_raw) and theta.

        For each topic the word distribution is a softmax of Gaussian log
        densities l_v = -0.5 ||z_v||^2 - sum log L_ii - const with
        z_v = L^{-1}(e_v - mu), giving
            dl/dmu = L^{-T} z_v
            dl/dL  = L^{-T} z_v z_v^T - diag(1 / L_ii)   (lower triangle only)
        and the softplus derivative rescales the raw-diagonal entries.
        """
        theta, phi, chols, zs = tape
        dtheta = dout @ phi.T
        dphi = theta.T @ dout
        dmu = np.zeros_like(self.mu)
        draw = np.zeros_like(self.chol_raw)
        for k in range(self.n_topics):
            p = phi[k]
            dll = p * (dphi[k] - float(dphi[k] @ p))
            chol, z = chols[k], zs[k]
            dmu[k] = solve_triangular(chol, z @ dll, trans="T", lower=True)
            m = (z * dll) @ z.T
            dl = solve_triangular(chol, m, trans="T", lower=True)
            np.fill_diagonal(dl, np.diag(dl) - dll.sum() / np.diag(chol))
            dl = np.tril(dl)
            sig = _sigmoid(np.diag(self.chol_raw[k]))
            np.fill_diagonal(dl, np.diag(dl) * sig)
            draw[k] = dl
        return {"mu": dmu, "chol_raw": draw}, dtheta

    # flat parameter interface, mirroring the dense networks; only the lower
    # triangle of each raw factor is a real parameter

    def num_params(self):
        tri = self.embed_dim * (self.embed_dim + 1) // 2
        return self.mu.size + self.n_topics * tri

    def get_flat_params(self):
        rows, cols = self._tril
        tris = [self.chol_raw[k][rows, cols] for k in range(self.n_topics)]
        return np.concatenate([self.mu.ravel()] + tris)

    def set_flat_params(self, vec):
        if vec.size != self.num_params():
            raise ValueError(f"flat vector length {vec.size} != expected {self.num_params()}")
        self.mu = vec[:self.mu.size].reshape(self.mu.shape).copy()
        rows, cols = self._tril
        tri = rows.size
        offset = self.mu.size
        for k in range(self.n_topics):
            self.chol_raw[k][rows, cols] = vec[offset:offset + tri]
            offset += tri

    def flatten_grads(self, grads):
        rows, cols = self._tril
        tris = [grads["chol_raw"][k][rows, cols] for k in range(self.n_topics)]
        return np.concatenate([grads["mu"].ravel()] + tris)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# ---------------------------------------------------------------------------
# functional surfaces over the model objects
# ---------------------------------------------------------------------------

def encoder_forward(enc, d_r, mode="eval"):
    theta, _ = enc.forward(np.asarray(d_r, dtype=np.float64), mode)
    return theta


def generator_forward(gen, theta_f, mode="eval"):
    d_f, _ = gen.forward(np.asarray(theta_f, dtype=np.float64), mode)
    return d_f


def gaussian_topic_word(bank):
    """K x V matrix of topic-word probabilities from the current Gaussians."""
    return bank.topic_word()


def gaussian_generator_forward(bank, theta_f):
    d_f, _ = bank.forward(np.asarray(theta_f, dtype=np.float64))
    return d_f


def discriminator_forward(disc, pair, mode="eval"):
    pair = np.asarray(pair, dtype=np.float64)
    if pair.ndim != 2 or pair.shape[1] != disc.n_inputs:
        raise ValueError(f"pair width {pair.shape} does not match K+V={disc.n_inputs}")
    scores, _ = disc.forward(pair, mode)
    return scores[:, 0]


def critic_loss(d_fake, d_real):
    """mean(critic on fake pairs) - mean(critic on real pairs)."""
    d_fake = np.asarray(d_fake, dtype=np.float64).ravel()
    d_real = np.asarray(d_real, dtype=np.float64).ravel()
    if d_fake.size == 0 or d_real.size == 0:
        raise ValueError("critic loss needs non-empty batches")
    if d_fake.size != d_real.size:
        raise ValueError("fake and real batches must have equal size")
    return float(d_fake.mean() - d_real.mean())


def make_pairs(theta, d):
    """Concatenate [theta; d] rows into critic inputs of width K+V."""
    return np.concatenate([theta, d], axis=1)


def critic_loss_and_grads(enc, gen, disc, d_r, theta_f, mode="eval"):
    """Critic loss and its exact gradients for every trainable parameter.

    Used by the gradient-fidelity checks: returns (loss, enc grads, gen grads,
    disc grads) as flat vectors, with gradients flowing through the pair
    concatenation into both the encoder and the generator (or Gaussian bank).
    """
    m = d_r.shape[0]
    k = enc.n_topics
    theta_r, enc_tape = enc.forward(d_r, mode)
    d_f, gen_tape = gen.forward(theta_f, mode)
    s_f, tape_f = disc.forward(make_pairs(theta_f, d_f), mode)
    s_r, tape_r = disc.forward(make_pairs(theta_r, d_r), mode)
    loss = critic_loss(s_f[:, 0], s_r[:, 0])

    g_disc_f, dpair_f = disc.backward(tape_f, np.full((m, 1), 1.0 / m))
    g_disc_r, dpair_r = disc.backward(tape_r, np.full((m, 1), -1.0 / m))
    g_disc = g_disc_f + g_disc_r

    if isinstance(gen, GaussianTopicBank):
        gdict, _ = gen.backward(gen_tape, dpair_f[:, k:])
        g_gen = gen.flatten_grads(gdict)
    else:
        g_gen, _ = gen.backward(gen_tape, dpair_f[:, k:])
    g_enc, _ = enc.backward(enc_tape, dpair_r[:, :k])
    return loss, g_enc, g_gen, g_disc


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainResult:
    encoder: Encoder
    generator: object          # Generator or GaussianTopicBank
    discriminator: Discriminator
    history: list = field(default_factory=list)


class _EpochSampler:
    """Uniform document batches with reshuffling each epoch (drop remainder)."""

    def __init__(self, n_docs, batch_size, rng):
        if n_docs < batch_size:
            raise ValueError(f"corpus has {n_docs} usable docs < batch size {batch_size}")
        self.n_docs = n_docs
        self.batch_size = batch_size
        self.rng = rng
        self._order = np.arange(n_docs)
        self._pos = n_docs  # force shuffle on first batch

    def next_batch(self):
        if self._pos + self.batch_size > self.n_docs:
            self.rng.shuffle(self._order)
            self._pos = 0
        batch = self._order[self._pos:self._pos + self.batch_size]
        self._pos += self.batch_size
        return batch


def _check_finite(name, arr, iteration):
    if not np.all(np.isfinite(arr)):
        raise NumericalError(name, iteration)


def train(corpus, cfg, variant=VARIANT_BAT, embeddings=None, callback=None):
    """Adversarial training of the encoder/generator/critic triple.

    Per outer iteration: ``cfg.n_critic`` critic updates (fresh document and
    Dirichlet batches, Adam step on the critic loss, then hard clip of every
    critic weight to [-clip, clip]), followed by one generator update
    minimizing -mean D(fake pair) and one encoder update minimizing
    +mean D(real pair), both reusing the final critic batch. History gets one
    record per iteration. ``callback(event, info)``, when given, observes
    "critic_step" and "iteration" events; it must not mutate the payload.

    The gaussian-bat variant needs a (V, D_e) embeddings matrix aligned with
    the corpus vocabulary.
    """
    if variant not in (VARIANT_BAT, VARIANT_GAUSSIAN):
        raise ValueError(f"unknown variant {variant!r}")
    if corpus.vocab.size < 2:
        raise ValueError("training needs a vocabulary of at least 2 tokens")
    x_all = tfidf_matrix(corpus)
    n_docs, n_vocab = x_all.shape
    k = cfg.n_topics

    rng_init = SeededRng(cfg.seed, STREAM_INIT)
    rng_dir = SeededRng(cfg.seed, STREAM_DIRICHLET)
    rng_shuffle = SeededRng(cfg.seed, STREAM_SHUFFLE)

    enc = Encoder.init(n_vocab, cfg.hidden, k, cfg, rng_init)
    if variant == VARIANT_GAUSSIAN:
        if embeddings is None:
            raise ValueError("gaussian-bat requires an embeddings matrix")
        embeddings = np.asarray(embeddings, dtype=np.float64)
        if embeddings.shape[0] != n_vocab:
            raise ValueError(
                f"embeddings cover {embeddings.shape[0]} words, vocabulary has {n_vocab}"
            )
        gen = GaussianTopicBank.init(embeddings, k, rng_init)
    else:
        gen = Generator.init(k, cfg.hidden, n_vocab, cfg, rng_init)
    disc = Discriminator.init(n_vocab + k, cfg.hidden, cfg, rng_init)

    prior = DirichletPrior.symmetric(k, cfg.dirichlet_alpha())
    opt_d = nn.AdamState.for_size(disc.num_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam)
    opt_g = nn.AdamState.for_size(gen.num_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam)
    opt_e = nn.AdamState.for_size(enc.num_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps_adam)
    sampler = _EpochSampler(n_docs, cfg.batch_size, rng_shuffle)

    m = cfg.batch_size
    history = []
    for it in range(1, cfg.iters + 1):
        d_r = theta_f = None
        loss = 0.0
        for step in range(1, cfg.n_critic + 1):
            d_r = x_all[sampler.next_batch()]
            theta_f = sample_dirichlet(prior, rng_dir, size=m)
            d_f, _ = gen.forward(theta_f, "train")
            theta_r, _ = enc.forward(d_r, "train")
            s_f, tape_f = disc.forward(make_pairs(theta_f, d_f), "train")
            s_r, tape_r = disc.forward(make_pairs(theta_r, d_r), "train")
            loss = critic_loss(s_f[:, 0], s_r[:, 0])
            _check_finite("critic loss", np.array(loss), it)

            g_f, _ = disc.backward(tape_f, np.full((m, 1), 1.0 / m))
            g_r, _ = disc.backward(tape_r, np.full((m, 1), -1.0 / m))
            w = nn.adam_step(opt_d, disc.get_flat_params(), g_f + g_r)
            w = nn.clip_weights(w, cfg.clip)
            disc.set_flat_params(w)
            _check_finite("discriminator parameters", w, it)
            if callback is not None:
                callback("critic_step", {
                    "iteration": it, "critic_step": step, "critic_loss": loss,
                    "theta_r": theta_r, "theta_f": theta_f, "d_r": d_r, "d_f": d_f,
                    "max_abs_critic_weight": float(np.max(np.abs(w))),
                })

        # generator update on the last critic batch: minimize -mean D(p_f)
        d_f, gen_tape = gen.forward(theta_f, "train")
        s_f, tape_f = disc.forward(make_pairs(theta_f, d_f), "train")
        gen_obj = -float(s_f.mean())
        _, dpair = disc.backward(tape_f, np.full((m, 1), -1.0 / m))
        if isinstance(gen, GaussianTopicBank):
            gdict, _ = gen.backward(gen_tape, dpair[:, k:])
            g_gen = gen.flatten_grads(gdict)
        else:
            g_gen, _ = gen.backward(gen_tape, dpair[:, k:])
        w_g = nn.adam_step(opt_g, gen.get_flat_params(), g_gen)
        gen.set_flat_params(w_g)
        _check_finite("generator parameters", w_g, it)

        # encoder update on the last critic batch: minimize +mean D(p_r)
        theta_r, enc_tape = enc.forward(d_r, "train")
        s_r, tape_r = disc.forward(make_pairs(theta_r, d_r), "train")
        enc_obj = float(s_r.mean())
        _, dpair = disc.backward(tape_r, np.full((m, 1), 1.0 / m))
        g_enc, _ = enc.backward(enc_tape, dpair[:, :k])
        w_e = nn.adam_step(opt_e, enc.get_flat_params(), g_enc)
        enc.set_flat_params(w_e)
        _check_finite("encoder parameters", w_e, it)

        record = {
            "iteration": it,
            "critic_loss": loss,
            "wasserstein_gap": -loss,
            "generator_objective": gen_obj,
            "encoder_objective": enc_obj,
        }
        history.append(record)
        if callback is not None:
            callback("iteration", {
                **record, "theta_r": theta_r, "theta_f": theta_f, "d_r": d_r, "d_f": d_f,
            })
    return TrainResult(enc, gen, disc, history)
