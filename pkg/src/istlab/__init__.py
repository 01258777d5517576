"""istlab: independent spanning trees in random graphs.

Constructions for G(n,p) and random regular multigraph models, an exact
verifier (including a brute-force optimum oracle for tiny instances), and a
Monte-Carlo harness that measures success rates of the randomized builders.
"""

__version__ = "0.1.0"

from .errors import (
    DegreeTooSmall,
    DomainError,
    Failure,
    NotConnected,
    SamplingFailed,
    TooLarge,
)
from .graph_core import (
    Graph,
    RootedTree,
    bfs_tree,
    complete_graph,
    cycle_graph,
    diameter,
    internally_disjoint_paths,
    neighborhood,
    path_graph,
    path_to_root,
    vertex_connectivity,
)
from .harness import SweepConfig, TrialResult, run_sweep, run_trial
from .ist_gnp import (
    attach_phase3,
    bipartite_max_matching,
    build_ists_gnp,
    build_ists_gnp_detailed,
    core_sets_bfs,
    expansion_diagnostic,
    exposure_violations,
)
from .ist_regular import (
    BadVertexRecord,
    ColorDecomposition,
    RegularParams,
    apply_reroute,
    build_ists_regular_even,
    build_ists_regular_odd,
    build_strong_ists,
    decompose_colors,
    diameter_deletion_check,
    find_bad,
    op_transform,
    plan_reroute,
    sample_induced_matching,
)
from .random_models import (
    GnpParams,
    MatchingFamily,
    OverlayInput,
    random_overlay,
    sample_gnp,
    sample_matching_family,
    sample_perfect_matching,
    sample_random_regular,
    sprinkle_split,
    trial_stream,
)
from .verifier import (
    IstReport,
    StrongReport,
    brute_force_max_ists,
    max_ist_count,
    verify_ist_family,
    verify_ist_family_quadratic,
    verify_spanning_tree,
    verify_strong,
)

__all__ = [
    "DegreeTooSmall",
    "DomainError",
    "Failure",
    "NotConnected",
    "SamplingFailed",
    "TooLarge",
    "Graph",
    "RootedTree",
    "bfs_tree",
    "complete_graph",
    "cycle_graph",
    "diameter",
    "internally_disjoint_paths",
    "neighborhood",
    "path_graph",
    "path_to_root",
    "vertex_connectivity",
    "SweepConfig",
    "TrialResult",
    "run_sweep",
    "run_trial",
    "attach_phase3",
    "bipartite_max_matching",
    "build_ists_gnp",
    "build_ists_gnp_detailed",
    "core_sets_bfs",
    "expansion_diagnostic",
    "exposure_violations",
    "BadVertexRecord",
    "ColorDecomposition",
    "RegularParams",
    "apply_reroute",
    "build_ists_regular_even",
    "build_ists_regular_odd",
    "build_strong_ists",
    "decompose_colors",
    "diameter_deletion_check",
    "find_bad",
    "op_transform",
    "plan_reroute",
    "sample_induced_matching",
    "GnpParams",
    "MatchingFamily",
    "OverlayInput",
    "random_overlay",
    "sample_gnp",
    "sample_matching_family",
    "sample_perfect_matching",
    "sample_random_regular",
    "sprinkle_split",
    "trial_stream",
    "IstReport",
    "StrongReport",
    "brute_force_max_ists",
    "max_ist_count",
    "verify_ist_family",
    "verify_ist_family_quadratic",
    "verify_spanning_tree",
    "verify_strong",
]
