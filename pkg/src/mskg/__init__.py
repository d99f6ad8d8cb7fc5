"""Manufacturing service knowledge graph toolkit.

Construction from canonical records or raw capability text, graph
embeddings, clustering, multi-label capability tagging, a small graph
query language, natural-language question answering, and an HTTP
service wrapping it all.
"""

from .graph import (
    CATEGORIES,
    CATEGORY_ROOTS,
    Edge,
    Graph,
    Node,
    NodeLabel,
    RelationType,
    build_graph,
)

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CATEGORY_ROOTS",
    "Edge",
    "Graph",
    "Node",
    "NodeLabel",
    "RelationType",
    "build_graph",
    "__version__",
]
