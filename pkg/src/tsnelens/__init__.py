"""Instrumented t-SNE assessment toolkit.

Core pieces: an instrumented t-SNE (exact or Barnes-Hut) that keeps per-point
bandwidths and remaining cost, a five-metric projection quality suite,
Procrustes/K-Medoids representative selection over hyper-parameter grids,
polyline- and PCA-based interpretation queries, and an HTTP/JSON service plus
CLI exposing all of it.
"""

from .dataset import Dataset, ingest_csv
from .errors import (ComputationError, NotFoundError, SearchError,
                     TsneLensError, ValidationError)
from .interpret import (AxisSelection, DimensionCorrelation, Polyline,
                        PolylineProjection, adaptive_axes, default_rho,
                        dimension_correlation, project_to_polyline, spearman)
from .quality import (NPCurve, QualityScores, Selection, ShepardHeatmap,
                      compute_quality_scores, density_cost_histograms,
                      embedding_distances, neighborhood_preservation,
                      selection_quality, shepard_heatmap, shepard_pairs)
from .search import (GridSpec, ProjectionRecord, RepresentativeSet,
                     default_grid, kmedoids, procrustes_distance,
                     procrustes_matrix, rank_representatives, run_grid_search,
                     select_representatives)
from .sessions import (Annotation, MigrationError, SessionStore, load_session,
                       save_session)
from .tsne import (Embedding, Instrumentation, InstrumentedTSNE, TsneParams,
                   calibrate_bandwidths, joint_probabilities, kl_cost,
                   kl_gradient, pairwise_distances, point_costs, run_tsne)

__all__ = [
    "Dataset", "ingest_csv",
    "TsneLensError", "ValidationError", "ComputationError", "NotFoundError",
    "SearchError", "MigrationError",
    "TsneParams", "Embedding", "Instrumentation", "InstrumentedTSNE",
    "pairwise_distances", "calibrate_bandwidths", "joint_probabilities",
    "point_costs", "kl_cost", "kl_gradient", "run_tsne",
    "QualityScores", "Selection", "ShepardHeatmap", "NPCurve",
    "compute_quality_scores", "selection_quality", "shepard_heatmap",
    "shepard_pairs", "neighborhood_preservation", "density_cost_histograms",
    "embedding_distances",
    "GridSpec", "ProjectionRecord", "RepresentativeSet", "default_grid",
    "run_grid_search", "procrustes_distance", "procrustes_matrix", "kmedoids",
    "select_representatives", "rank_representatives",
    "Polyline", "PolylineProjection", "DimensionCorrelation", "AxisSelection",
    "project_to_polyline", "spearman", "dimension_correlation",
    "adaptive_axes", "default_rho",
    "SessionStore", "Annotation", "save_session", "load_session",
]

__version__ = "0.1.0"
