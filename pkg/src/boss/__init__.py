"""Causal structure learning by best order score search with Grow-Shrink Trees."""
from .graph import (
    Dag,
    GraphError,
    Pdag,
    consistent_extension,
    cpdag_equal,
    d_separated,
    find_compelled,
    is_acyclic,
    parents,
    to_cpdag,
)
from .gst import GrowShrinkTree, grow, grow_shrink, gst_new, gst_query, shrink
from .score import (
    BicScore,
    CovarianceModel,
    DegenerateParentSetError,
    GaussianOracleScore,
    OracleScore,
    covariance_from_data,
    oracle_score,
    score_dag,
)
from .search import (
    BossResult,
    GstForest,
    Permutation,
    SearchConfig,
    SearchError,
    bes,
    best_move,
    boss,
    derive_seed,
    forest_score,
    project,
    run_boss,
)

__version__ = "0.1.0"
