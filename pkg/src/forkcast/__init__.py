"""forkcast: detect emerging partisan voting blocs in DAO governance.

Pipeline: on-chain vote events -> voter matrix over {1, 0, -1} -> friction
metrics -> windowed active sets -> pairwise dissimilarity -> 2D stress
embeddings -> silhouette-selected k-means clusters -> shuffle-baseline
validation of fork-cohort alignment.
"""

from .cluster import ClusteringResult, kmeans, select_k, silhouette
from .dissim import (
    ActiveSet,
    DissimilarityMatrix,
    WindowSpec,
    active_set,
    dissimilarity_matrix,
    participation,
    sliding_window,
)
from .embed import Embedding, MdsConfig, mds_embed, stress, warm_start
from .friction import (
    DisagreementRecord,
    FrictionReport,
    build_friction_report,
    flag_dao,
    rolling_disagreement,
    static_disagreement,
)
from .ingest import (
    Address,
    DaoRegistryEntry,
    ForkGroundTruth,
    VoteEvent,
    decode_vote_event,
    fetch_logs,
    load_fixture,
    load_ground_truth,
    normalize_address,
)
from .matrix import VoterMatrix, build_voter_matrix, column_votes
from .pipeline import PipelineResult, ProposalAnalysis, analyze_matrix
from .planted import planted_two_bloc_events
from .report import ChartSpec, render_chart, render_mds_scatter
from .validate import (
    ParticipationStats,
    RangeSummary,
    ValidationReport,
    fork_cluster_share,
    participation_stats,
    run_validation,
    shuffle_votes,
    summarize_range,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet", "Address", "ChartSpec", "ClusteringResult",
    "DaoRegistryEntry", "DisagreementRecord", "DissimilarityMatrix",
    "Embedding", "ForkGroundTruth", "FrictionReport", "MdsConfig",
    "ParticipationStats", "PipelineResult", "ProposalAnalysis",
    "RangeSummary", "ValidationReport", "VoteEvent", "VoterMatrix",
    "WindowSpec", "active_set", "analyze_matrix", "build_friction_report",
    "build_voter_matrix", "column_votes", "decode_vote_event",
    "dissimilarity_matrix", "fetch_logs", "flag_dao", "fork_cluster_share",
    "kmeans", "load_fixture", "load_ground_truth", "mds_embed",
    "normalize_address", "participation", "participation_stats",
    "planted_two_bloc_events", "render_chart", "render_mds_scatter",
    "rolling_disagreement", "run_validation", "select_k", "shuffle_votes",
    "silhouette", "sliding_window", "static_disagreement", "stress",
    "summarize_range", "warm_start",
]
