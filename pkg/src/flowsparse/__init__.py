"""flowsparse: vertex flow sparsifiers for edge-capacitated terminal networks."""

from .network import (
    DemandVector,
    NetworkError,
    TerminalNetwork,
    VertexPartition,
    components_after_terminal_removal,
    merge_vertices,
    normalize,
    phi_merge,
    subdivide_terminal_edges,
)
from .flow import (
    ConcurrentFlowResult,
    Cut,
    DualSolution,
    FlowError,
    FlowSolution,
    concurrent_flow,
    dual_2hop,
    lambda_2hop,
    lambda_terminal_free,
    lambda_value,
    max_flow,
    mincut_partition,
    sparsest_cut,
    sparsest_terminal_cut,
)
from .results import SparsifierResult
from .sketch import DemandSketch, build_sketch
from .merging import profile_bucket_sparsifier, ratio_type_sparsifier, refine_partitions
from .splice import FlowDecomposition, FlowPath, compose, decompose_flow, splice, unsplice_route
from .sampling import (
    chernoff_bound,
    grouped_sample_sparsifier,
    plan_oversampling,
    sample_sparsifier,
    sampling_plan,
    two_hop_maxflows,
)
from .structured import (
    SpTree,
    TreeDecomposition,
    balanced_terminal_separator,
    mimick_small,
    sp_recognize,
    sp_sparsifier,
    translate_cut_sparsifier,
    treewidth_sparsifier,
)
from .verify import certify, certify_cuts, demand_grid

__version__ = "0.1.0"
