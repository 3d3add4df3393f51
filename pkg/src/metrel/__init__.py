"""Metric reliability across software versions.

Dependency graphs of successive versions are compared through the metrics
they induce: how well each metric's values and markers survive from one
version to the next, and how much of that survival is explained by the
small scope of a change rather than by architecture.
"""

from .graph import NodeAttrs, VersionedGraph, load_graph, save_graph
from .evolution import VersionPair, diff

__all__ = ["NodeAttrs", "VersionedGraph", "VersionPair", "diff", "load_graph", "save_graph"]
__version__ = "0.1.0"
