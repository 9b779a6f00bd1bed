"""Versioned on-disk artifacts: model checkpoints, corpora, and history files.

All containers are zip archives with pinned entry timestamps, so identical
contents produce byte-identical files — reruns with the same seed and config
are diffable at the file level. Arrays are stored in .npy form at full
precision; loading a checkpoint reproduces forward outputs bit-identically.
"""

import hashlib
import io
import json
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .corpus import BowDocument, Corpus, Vocabulary
from .model import (
    VARIANT_BAT,
    VARIANT_GAUSSIAN,
    Discriminator,
    Encoder,
    GaussianTopicBank,
    Generator,
    TrainConfig,
)

CHECKPOINT_VERSION = 1
CORPUS_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)  # fixed zip timestamp for reproducible bytes


class CheckpointError(ValueError):
    """Raised for malformed or incompatible artifacts."""


def _write_container(path, meta, arrays):
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        payload = json.dumps(meta, sort_keys=True, ensure_ascii=False)
        zf.writestr(zipfile.ZipInfo("meta.json", date_time=_EPOCH), payload)
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]))
            zf.writestr(zipfile.ZipInfo(name + ".npy", date_time=_EPOCH), buf.getvalue())


def _read_container(path, kind, version):
    try:
        zf = zipfile.ZipFile(path, "r")
    except (OSError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"{path}: not a readable artifact ({exc})") from None
    with zf:
        meta = json.loads(zf.read("meta.json").decode("utf-8"))
        if meta.get("kind") != kind:
            raise CheckpointError(f"{path}: expected a {kind} artifact, found {meta.get('kind')!r}")
        if meta.get("format_version", 0) > version:
            raise CheckpointError(
                f"{path}: format version {meta['format_version']} is newer than supported {version}"
            )
        arrays = {}
        for name in zf.namelist():
            if name.endswith(".npy"):
                arrays[name[:-4]] = np.lib.format.read_array(io.BytesIO(zf.read(name)))
    return meta, arrays


def embedding_hash(matrix):
    """sha256 over the raw float64 bytes of an embedding matrix."""
    m = np.ascontiguousarray(matrix, dtype=np.float64)
    digest = hashlib.sha256()
    digest.update(str(m.shape).encode())
    digest.update(m.tobytes())
    return digest.hexdigest()


def load_embeddings_text(path, vocab, oov_rng=None, oov_scale=0.05):
    """Word embeddings for a vocabulary from a text file (token v1 ... vD).

    Out-of-vocabulary tokens get seeded uniform(-oov_scale, oov_scale)
    vectors when ``oov_rng`` is given, zeros otherwise. Returns (V, D_e).
    """
    table = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            vec = np.array([float(x) for x in parts[1:]])
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise CheckpointError(f"{path}: inconsistent embedding dimensions")
            table[parts[0]] = vec
    if dim is None:
        raise CheckpointError(f"{path}: no embeddings found")
    out = np.zeros((vocab.size, dim))
    for i, tok in enumerate(vocab.tokens):
        vec = table.get(tok)
        if vec is not None:
            out[i] = vec
        elif oov_rng is not None:
            out[i] = oov_rng.uniform(-oov_scale, oov_scale, dim)
    return out


# ---------------------------------------------------------------------------
# model checkpoints
# ---------------------------------------------------------------------------

@dataclass
class LoadedModel:
    variant: str
    config: TrainConfig
    vocab: Vocabulary
    encoder: Encoder
    generator: object
    discriminator: Discriminator
    seed: int
    embedding_sha256: str = None


def _stack_arrays(prefix, net):
    out = {}
    for name, arr in net.stack.param_arrays():
        out[f"{prefix}.{name}"] = arr
    for i, layer in enumerate(net.stack.layers):
        if isinstance(layer, nn.BatchNormLayer):
            out[f"{prefix}.{i}.running_mean"] = layer.running_mean
            out[f"{prefix}.{i}.running_var"] = layer.running_var
    return out


def _load_stack(prefix, net, arrays):
    for name, arr in net.stack.param_arrays():
        stored = arrays[f"{prefix}.{name}"]
        idx, attr = name.split(".")
        setattr(net.stack.layers[int(idx)], attr, stored.astype(np.float64))
    for i, layer in enumerate(net.stack.layers):
        if isinstance(layer, nn.BatchNormLayer):
            layer.running_mean = arrays[f"{prefix}.{i}.running_mean"].astype(np.float64)
            layer.running_var = arrays[f"{prefix}.{i}.running_var"].astype(np.float64)


def save_checkpoint(path, variant, cfg, vocab, encoder, generator, discriminator, seed):
    arrays = {}
    arrays.update(_stack_arrays("enc", encoder))
    arrays.update(_stack_arrays("disc", discriminator))
    emb_hash = None
    if variant == VARIANT_GAUSSIAN:
        arrays["bank.mu"] = generator.mu
        arrays["bank.chol_raw"] = generator.chol_raw
        arrays["bank.embeddings"] = generator.embeddings
        emb_hash = embedding_hash(generator.embeddings)
    else:
        arrays.update(_stack_arrays("gen", generator))
    meta = {
        "kind": "checkpoint",
        "format_version": CHECKPOINT_VERSION,
        "variant": variant,
        "config": cfg.to_dict(),
        "seed": int(seed),
        "embedding_sha256": emb_hash,
        "vocab": {
            "tokens": vocab.tokens,
            "doc_freq": [int(x) for x in vocab.doc_freq],
            "num_docs": int(vocab.num_docs),
        },
    }
    _write_container(path, meta, arrays)


def load_checkpoint(path):
    meta, arrays = _read_container(path, "checkpoint", CHECKPOINT_VERSION)
    cfg = TrainConfig.from_dict(meta["config"])
    vocab = Vocabulary(
        meta["vocab"]["tokens"],
        np.array(meta["vocab"]["doc_freq"], dtype=np.int64),
        meta["vocab"]["num_docs"],
    )
    variant = meta["variant"]
    n_vocab, k = vocab.size, cfg.n_topics
    rng = _ZeroRng()
    encoder = Encoder.init(n_vocab, cfg.hidden, k, cfg, rng)
    _load_stack("enc", encoder, arrays)
    discriminator = Discriminator.init(n_vocab + k, cfg.hidden, cfg, rng)
    _load_stack("disc", discriminator, arrays)
    if variant == VARIANT_GAUSSIAN:
        generator = GaussianTopicBank(
            arrays["bank.mu"], arrays["bank.chol_raw"], arrays["bank.embeddings"]
        )
    elif variant == VARIANT_BAT:
        generator = Generator.init(k, cfg.hidden, n_vocab, cfg, rng)
        _load_stack("gen", generator, arrays)
    else:
        raise CheckpointError(f"{path}: unknown variant {variant!r}")
    return LoadedModel(
        variant, cfg, vocab, encoder, generator, discriminator,
        meta["seed"], meta.get("embedding_sha256"),
    )


class _ZeroRng:
    """Placeholder init source for networks about to be overwritten by a load."""

    def uniform(self, low, high, size=None):
        return np.zeros(size)

    def choice(self, a, size=None, replace=True):
        return np.arange(size if size is not None else 1)


# ---------------------------------------------------------------------------
# corpus artifacts
# ---------------------------------------------------------------------------

def save_corpus(path, corpus):
    """Persist a corpus (vocabulary + sparse counts + labels) with a content hash."""
    triples = []
    for doc_id, doc in enumerate(corpus.docs):
        for wid in sorted(doc.counts):
            triples.append((doc_id, wid, doc.counts[wid]))
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    digest = hashlib.sha256()
    digest.update("\x00".join(corpus.vocab.tokens).encode("utf-8"))
    digest.update(triples.tobytes())
    if corpus.labels is not None:
        digest.update(np.asarray(corpus.labels, dtype=np.int64).tobytes())
    meta = {
        "kind": "corpus",
        "format_version": CORPUS_VERSION,
        "num_docs": corpus.num_docs,
        "tokens": corpus.vocab.tokens,
        "doc_freq": [int(x) for x in corpus.vocab.doc_freq],
        "labels": None if corpus.labels is None else [int(x) for x in corpus.labels],
        "content_sha256": digest.hexdigest(),
    }
    _write_container(path, meta, {"triples": triples})
    return meta["content_sha256"]


def load_corpus(path):
    meta, arrays = _read_container(path, "corpus", CORPUS_VERSION)
    vocab = Vocabulary(
        meta["tokens"], np.array(meta["doc_freq"], dtype=np.int64), meta["num_docs"]
    )
    docs = [dict() for _ in range(meta["num_docs"])]
    for doc_id, wid, count in arrays["triples"]:
        docs[doc_id][int(wid)] = int(count)
    labels = meta["labels"]
    return Corpus(vocab, [BowDocument(c) for c in docs], labels)


# ---------------------------------------------------------------------------
# history files
# ---------------------------------------------------------------------------

def write_history(path, cfg, records, variant):
    """Line-delimited history: a header record, then one record per iteration."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {"type": "header", "variant": variant, "config": cfg.to_dict()}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_history(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CheckpointError(f"{path}: empty history file")
    header = json.loads(lines[0])
    return header, [json.loads(ln) for ln in lines[1:]]
