"""Seeded random sampling: gamma variates, Dirichlet topic vectors, stream splitting.

All randomness in the pipeline flows through :class:`SeededRng`. A single root
seed is split deterministically into independent named streams (weight init,
Dirichlet draws, batch shuffling, ...) so that runs are reproducible while the
sources stay isolated from each other.
"""

import numpy as np

# Stable labels for the sub-streams a training run needs. Adding a label is
# backwards compatible; renumbering existing ones is not.
STREAM_INIT = 0
STREAM_DIRICHLET = 1
STREAM_SHUFFLE = 2
STREAM_OOV = 3


class SeededRng:
    """Deterministic random stream backed by PCG64.

    The same (seed, stream) pair always produces the same sequence. Streams
    derived from one root seed are statistically independent.
    """

    def __init__(self, seed, stream=0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, self.stream]))
        )

    def split(self, stream):
        """Return an independent stream derived from the same root seed."""
        return SeededRng(self.seed, stream)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def random(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def shuffle(self, x):
        self._gen.shuffle(x)

    def choice(self, a, size=None, replace=True):
        return self._gen.choice(a, size=size, replace=replace)

    def multinomial(self, n, pvals):
        return self._gen.multinomial(n, pvals)


class DirichletPrior:
    """Concentration vector of a Dirichlet over the K-simplex.

    The default used by training is symmetric alpha_k = 1/K, which puts mass
    near the simplex vertices and yields the sparse topic mixtures wanted for
    topic modeling.
    """

    def __init__(self, alpha):
        alpha = np.asarray(alpha, dtype=np.float64)
        if alpha.ndim != 1 or alpha.size < 1:
            raise ValueError("alpha must be a non-empty 1-D vector")
        if not np.all(alpha > 0):
            raise ValueError("all Dirichlet concentrations must be positive")
        self.alpha = alpha

    @classmethod
    def symmetric(cls, k, alpha=None):
        if alpha is None:
            alpha = 1.0 / k
        return cls(np.full(k, float(alpha)))

    @property
    def k(self):
        return self.alpha.size


def sample_gamma(shape, rng, size=None):
    """Draw from Gamma(shape, 1) by Marsaglia-Tsang squeeze rejection.

    For shape >= 1 uses the (d, c) transform of a standard normal with the
    squeeze acceptance test; for shape < 1 draws Gamma(shape + 1) and applies
    the boost u**(1/shape). Returns a scalar when ``size`` is None, otherwise
    an array of the given size.
    """
    if shape <= 0:
        raise ValueError("gamma shape must be positive")
    scalar = size is None
    n = 1 if scalar else int(np.prod(size))

    boost = None
    if shape < 1.0:
        boost = rng.random(n) ** (1.0 / shape)
        d = (shape + 1.0) - 1.0 / 3.0
    else:
        d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)

    out = np.empty(n, dtype=np.float64)
    pending = np.arange(n)
    while pending.size:
        x = rng.normal(pending.size)
        v = (1.0 + c * x) ** 3
        u = rng.random(pending.size)
        ok = v > 0
        # log-space squeeze; with v > 0 required first, log(v) is defined
        with np.errstate(invalid="ignore", divide="ignore"):
            ok &= np.log(u) < 0.5 * x ** 2 + d - d * v + d * np.log(np.where(v > 0, v, 1.0))
        out[pending[ok]] = d * v[ok]
        pending = pending[~ok]

    if boost is not None:
        out *= boost
    if scalar:
        return float(out[0])
    return out.reshape(size)


def sample_dirichlet(prior, rng, size=None):
    """Draw topic vectors from a Dirichlet prior as normalized gamma variates.

    Returns a length-K vector when ``size`` is None, else a (size, K) matrix
    whose rows each sum to 1.
    """
    k = prior.k
    scalar = size is None
    m = 1 if scalar else int(size)
    draws = np.empty((m, k), dtype=np.float64)
    for j, a in enumerate(prior.alpha):
        draws[:, j] = sample_gamma(a, rng, size=m)
    draws /= draws.sum(axis=1, keepdims=True)
    if scalar:
        return draws[0]
    return draws
