"""Clustering by maximising graph decoding information."""

__version__ = "0.1.0"

from .graph_core import Graph, GraphError, Partition, block_volume_and_cut, load_graph, save_graph, weighted_degree
from .structural_entropy import (
    EntropyReport,
    brute_force_optimal_partition,
    decoding_info,
    di_ratio,
    f_entropy,
    h1,
    h2_partition,
    merge_delta,
)
from .gdimaop import ClusterLabels, PriorKnowledge, cmdi, gdimaop, map_to_labels, pk_gdimaop

__all__ = [
    "ClusterLabels", "EntropyReport", "Graph", "GraphError", "Partition", "PriorKnowledge",
    "block_volume_and_cut", "brute_force_optimal_partition", "cmdi", "decoding_info", "di_ratio",
    "f_entropy", "gdimaop", "h1", "h2_partition", "load_graph", "map_to_labels", "merge_delta",
    "pk_gdimaop", "save_graph", "weighted_degree",
]
