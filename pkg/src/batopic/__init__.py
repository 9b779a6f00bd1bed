"""Bidirectional adversarial topic modeling.

A three-network game — encoder (documents to topic mixtures), generator
(topic mixtures to word distributions), and a weight-clipped Wasserstein
critic over concatenated [topic; word] pairs — trained so the two projections
become consistent. The ``gaussian-bat`` variant models each topic as a
trainable multivariate Gaussian over frozen word embeddings.
"""

from .corpus import (
    BowDocument,
    Corpus,
    CorpusError,
    Vocabulary,
    build_corpus,
    build_vocabulary,
    load_labels,
    load_text_directory,
    load_uci_bow,
    save_uci_bow,
    tfidf_matrix,
    tfidf_representation,
)
from .model import (
    VARIANT_BAT,
    VARIANT_GAUSSIAN,
    Discriminator,
    Encoder,
    GaussianTopicBank,
    Generator,
    NumericalError,
    TrainConfig,
    TrainResult,
    critic_loss,
    train,
)
from .infer_eval import (
    CooccurrenceCounts,
    TopicWordList,
    build_cooccurrence,
    clustering_accuracy,
    coherence_report,
    extract_topics,
    infer_clusters,
    npmi_coherence,
    uci_coherence,
)
from .sampling import DirichletPrior, SeededRng, sample_dirichlet, sample_gamma
from .checkpoint import (
    CheckpointError,
    load_checkpoint,
    load_corpus,
    load_embeddings_text,
    read_history,
    save_checkpoint,
    save_corpus,
    write_history,
)

__version__ = "0.1.0"
