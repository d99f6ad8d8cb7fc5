from .cluster import (
    ClusterConfig,
    ElbowReport,
    KMeansResult,
    cluster_kmeans,
    elbow_scan,
    score_silhouette,
)
from .config import EmbeddingConfig
from .projection import Projection, build_projection
from .sage import train_graphsage
from .skipgram import TrainResult, sgns_batch_loss, sgns_batch_step, train_skipgram
from .tables import (
    EmbeddingTable,
    read_points,
    read_table,
    write_points,
    write_table,
)
from .tsne import joint_probabilities, reduce_tsne, tsne_embed
from .walks import WalkCorpus, generate_walks

__all__ = [
    "ClusterConfig",
    "ElbowReport",
    "EmbeddingConfig",
    "EmbeddingTable",
    "KMeansResult",
    "Projection",
    "TrainResult",
    "WalkCorpus",
    "build_projection",
    "cluster_kmeans",
    "elbow_scan",
    "generate_walks",
    "joint_probabilities",
    "read_points",
    "read_table",
    "reduce_tsne",
    "score_silhouette",
    "sgns_batch_loss",
    "sgns_batch_step",
    "tsne_embed",
    "train_graphsage",
    "train_skipgram",
    "write_points",
    "write_table",
]
