"""Exact homomorphism-basis computation for graph motif parameters.

Subgraph and induced-subgraph counts expand into rational combinations of
homomorphism counts; those evaluate on large hosts through tree-width
bounded dynamic programming, at graph level or per vertex.
"""

from .graphs import (
    AnchoredGraph,
    Graph,
    LimitError,
    Partition,
    anchored_automorphism_count,
    automorphism_count,
    canonical_form,
    canonical_form_anchored,
    canonical_key,
    categorical_product,
    connected_components,
    disjoint_union,
    enumerate_connected_graphs,
    enumerate_graphs,
    enumerate_partitions,
    format_graph6,
    is_connected,
    is_isomorphic,
    named_pattern,
    parse_graph6,
    quotient,
)
from .decomp import (
    NiceTreeDecomposition,
    TreeDecomposition,
    to_nice,
    treewidth_exact,
)
from .spasm import (
    GRAPH_LEVEL,
    HOM_BASIS,
    NODE_LEVEL,
    BasisTerm,
    LinearCombination,
    anchored_spasm_of,
    as_dict,
    combination_from_json,
    combination_to_json,
    filter_min_treewidth,
    indsub_expansion,
    indsub_property_param,
    inj_expansion,
    simplify,
    spasm_of,
    support,
)
from .homcount import (
    CountFailure,
    CountVector,
    HostGraph,
    WidthGuardError,
    batch_evaluate,
    batch_term_counts,
    check_width_guard,
    dedupe_terms,
    evaluate,
    evaluate_node,
    hom_count,
    hom_count_node,
    plan_width,
)
from .features import (
    Dataset,
    DatasetError,
    EncodingSpec,
    FeatureColumn,
    FeatureMatrix,
    auto_anchor,
    basis_cache_get,
    basis_cache_put,
    cache_through,
    compute_features,
    encode,
    export,
    load_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AnchoredGraph",
    "BasisTerm",
    "CountFailure",
    "CountVector",
    "Dataset",
    "DatasetError",
    "EncodingSpec",
    "FeatureColumn",
    "FeatureMatrix",
    "GRAPH_LEVEL",
    "Graph",
    "HOM_BASIS",
    "HostGraph",
    "LimitError",
    "LinearCombination",
    "NODE_LEVEL",
    "NiceTreeDecomposition",
    "Partition",
    "TreeDecomposition",
    "WidthGuardError",
    "anchored_automorphism_count",
    "anchored_spasm_of",
    "as_dict",
    "auto_anchor",
    "automorphism_count",
    "basis_cache_get",
    "basis_cache_put",
    "batch_evaluate",
    "batch_term_counts",
    "cache_through",
    "canonical_form",
    "canonical_form_anchored",
    "canonical_key",
    "categorical_product",
    "check_width_guard",
    "combination_from_json",
    "combination_to_json",
    "compute_features",
    "connected_components",
    "dedupe_terms",
    "disjoint_union",
    "encode",
    "enumerate_connected_graphs",
    "enumerate_graphs",
    "enumerate_partitions",
    "evaluate",
    "evaluate_node",
    "export",
    "filter_min_treewidth",
    "format_graph6",
    "hom_count",
    "hom_count_node",
    "indsub_expansion",
    "indsub_property_param",
    "inj_expansion",
    "is_connected",
    "is_isomorphic",
    "load_dataset",
    "named_pattern",
    "parse_graph6",
    "plan_width",
    "quotient",
    "simplify",
    "spasm_of",
    "support",
    "to_nice",
    "treewidth_exact",
    "__version__",
]
