"""Lazy inhomogeneous Erdos-Renyi network time series: simulation and inference."""

__version__ = "0.1.0"

from .aggregate import (
    AggregateView,
    ZeroDegreeError,
    aggregate_adjacency,
    aggregate_laplacian,
    aggregate_view,
    population_aggregates,
)
from .changepoint import (
    ChangepointSpec,
    CusumProfile,
    build_perturbed_mean,
    cusum_statistic,
    estimate_changepoint,
    population_cusum,
)
from .community import (
    ClusteringResult,
    CommunitySpec,
    approx_kmeans,
    estimate_communities,
    membership_matrix,
    misclustering_error,
    spectral_embed,
)
from .graph_model import (
    DegreeStats,
    GraphonSpec,
    MeanMatrix,
    SbmSpec,
    build_sbm_mean,
    degree_stats,
    sample_graphon_mean,
)
from .lazy_process import (
    EdgeMoments,
    LazyProcessParams,
    NetworkSequence,
    RenewalTrace,
    edge_moments,
    edge_sum_distribution,
    renewal_simulate,
    simulate,
    simulate_piecewise,
)
from .spectral import EigenResult, NonConvergence, operator_norm, top_k_eigenpairs
