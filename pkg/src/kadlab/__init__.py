"""Probabilistic model of Kademlia routing: XOR tries, random k-buckets, greedy lookups."""

__version__ = "0.1.0"

from .idspace import (  # noqa: E402
    NodeId,
    Ordering,
    bucket_index,
    common_prefix_len,
    compare_by_distance,
    polar_opposite,
    xor_distance,
)
from .trie import IdTrie, SubtreeRef, build_trie  # noqa: E402
from .network import (  # noqa: E402
    Network,
    RoutingTrace,
    build_network,
    closest_node,
    route,
    simulate_routing_process,
)

__all__ = [
    "__version__",
    "NodeId",
    "Ordering",
    "bucket_index",
    "common_prefix_len",
    "compare_by_distance",
    "polar_opposite",
    "xor_distance",
    "IdTrie",
    "SubtreeRef",
    "build_trie",
    "Network",
    "RoutingTrace",
    "build_network",
    "closest_node",
    "route",
    "simulate_routing_process",
]
