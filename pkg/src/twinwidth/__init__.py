"""Twin-width contraction sequences: trigraphs, exact search, and constructors
for bounded treewidth, bounded branchwidth, planar and universal bipartite graphs."""

from .trigraph import (
    ContractionError,
    ContractionSequence,
    InvariantError,
    ReplayError,
    SequenceBuilder,
    Trigraph,
    contract,
    max_red_degree,
    neighbourhood_classes,
    replay,
)

__version__ = "0.1.0"

__all__ = [
    "ContractionError",
    "ContractionSequence",
    "InvariantError",
    "ReplayError",
    "SequenceBuilder",
    "Trigraph",
    "contract",
    "max_red_degree",
    "neighbourhood_classes",
    "replay",
]
