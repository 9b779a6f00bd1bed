"""Central finite-difference gradient checking shared by the test modules."""

import numpy as np

from batopic.model import (
    Discriminator,
    Encoder,
    GaussianTopicBank,
    Generator,
    TrainConfig,
    critic_loss_and_grads,
)
from batopic.sampling import DirichletPrior, SeededRng, sample_dirichlet


def fd_gradient(f, x, h=1e-5):
    """Central-difference gradient of scalar f() w.r.t. array x (mutated in place)."""
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f()
        flat[i] = orig - h
        fm = f()
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * h)
    return grad


def rel_error(analytic, numeric):
    """Worst elementwise deviation normalized by the tensor's gradient scale.

    Normalizing per tensor keeps the check meaningful for entries whose true
    gradient is ~0, where elementwise ratios would just amplify h^2 noise.
    """
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    # the floor treats tensors whose true gradient is structurally zero
    # (e.g. a dense bias feeding batchnorm in train mode) as matching when
    # both sides are pure h^2 noise
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def simplex_batch(rng, m, dim):
    x = np.asarray(rng.uniform(0.01, 1.0, (m, dim)))
    return x / x.sum(axis=1, keepdims=True)


def make_triple(n_vocab=12, hidden=6, n_topics=3, seed=0, variant="bat", embed_dim=4):
    """Freshly initialized encoder/generator/discriminator triple."""
    cfg = TrainConfig(n_topics=n_topics, hidden=hidden, seed=seed)
    rng = SeededRng(seed)
    enc = Encoder.init(n_vocab, hidden, n_topics, cfg, rng)
    if variant == "gaussian-bat":
        emb = np.asarray(rng.normal((n_vocab, embed_dim)))
        gen = GaussianTopicBank.init(emb, n_topics, rng)
    else:
        gen = Generator.init(n_topics, hidden, n_vocab, cfg, rng)
    disc = Discriminator.init(n_vocab + n_topics, hidden, cfg, rng)
    return enc, gen, disc, cfg


def check_full_gradients(variant, n_vocab=12, n_topics=3, hidden=6, embed_dim=4,
                         batch=4, seed=0, tol=1e-4, h=1e-5):
    """End-to-end finite-difference check of the critic loss for one variant.

    Verifies every parameter of the encoder, generator (dense or Gaussian),
    and discriminator, with eval-mode batchnorm so the loss is a pure
    function of the parameters. Returns the worst relative error seen.
    """
    enc, gen, disc, cfg = make_triple(n_vocab, hidden, n_topics, seed, variant, embed_dim)
    d_r = simplex_batch(SeededRng(seed + 1), batch, n_vocab)
    theta_f = sample_dirichlet(DirichletPrior.symmetric(n_topics), SeededRng(seed + 2), batch)
    # realistic running statistics before switching to eval mode
    enc.forward(simplex_batch(SeededRng(seed + 3), 16, n_vocab), "train")
    if not isinstance(gen, GaussianTopicBank):
        gen.forward(simplex_batch(SeededRng(seed + 4), 16, n_topics), "train")

    def loss():
        return critic_loss_and_grads(enc, gen, disc, d_r, theta_f, mode="eval")[0]

    _, g_enc, g_gen, g_disc = critic_loss_and_grads(enc, gen, disc, d_r, theta_f, mode="eval")
    worst = 0.0
    for net, flat in ((enc, g_enc), (disc, g_disc)):
        offset = 0
        for name, arr in net.stack.param_arrays():
            err = rel_error(flat[offset:offset + arr.size].reshape(arr.shape),
                            fd_gradient(loss, arr, h))
            worst = max(worst, err)
            assert err < tol, f"{variant}:{name} rel err {err}"
            offset += arr.size
    if isinstance(gen, GaussianTopicBank):
        rows, cols = np.tril_indices(embed_dim)
        mu_grad = g_gen[:gen.mu.size].reshape(gen.mu.shape)
        err = rel_error(mu_grad, fd_gradient(loss, gen.mu, h))
        worst = max(worst, err)
        assert err < tol, f"gaussian mu rel err {err}"
        numeric = fd_gradient(loss, gen.chol_raw, h)
        offset = gen.mu.size
        for k in range(n_topics):
            analytic = np.zeros((embed_dim, embed_dim))
            analytic[rows, cols] = g_gen[offset:offset + rows.size]
            err = rel_error(analytic, np.tril(numeric[k]))
            worst = max(worst, err)
            assert err < tol, f"gaussian chol_raw[{k}] rel err {err}"
            offset += rows.size
    else:
        offset = 0
        for name, arr in gen.stack.param_arrays():
            err = rel_error(g_gen[offset:offset + arr.size].reshape(arr.shape),
                            fd_gradient(loss, arr, h))
            worst = max(worst, err)
            assert err < tol, f"{variant}:gen.{name} rel err {err}"
            offset += arr.size
    return worst
