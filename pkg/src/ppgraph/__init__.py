"""ppgraph: point-pair graph toolkit for line segment detection.

Scenes of line segments are represented as a graph (junction list plus
boolean adjacency matrix). The package covers annotation canonicalization,
junction extraction from heatmaps, line-aligned pair scoring, graph/segment
conversion, tolerance-based pixel precision/recall, and a synthetic scene
generator for end-to-end verification.
"""

from .canonicalize import (
    AnnotationError,
    CanonConfig,
    Chain,
    Connectivity,
    RawAnnotation,
    annotation_from_json,
    annotation_to_json,
    canonicalize,
    extend_to_longest,
    graph_as_annotation,
    load_annotation,
    refine_intersections,
    refit_segment,
    remove_isolated,
    remove_subsumed,
    retrieve_missing,
    save_annotation,
)
from .fields import (
    FieldFormatError,
    PlanarField,
    load_field,
    load_matrix,
    save_field,
    save_matrix,
)
from .graph import (
    GraphInvariantError,
    Junction,
    LineGraph,
    Segment,
    SegmentSet,
    build_graph,
    degree,
    graph_from_json,
    graph_to_json,
    graph_to_segments,
    load_graph,
    save_graph,
    segments_to_graph,
)
from .junctions import ExtractorConfig, cluster_nms, extract, local_maxima
from .losses import LossResult, LossWeights, bce_sum, total_loss
from .metrics import (
    DEFAULT_TOLERANCE_FRAC,
    SWEEP_THRESHOLDS,
    EvalReport,
    PRCurve,
    combine_reports,
    evaluate,
    match_pixels,
    pr_curve,
    rasterize,
)
from .scoring import (
    FeatureStrip,
    PairScoringError,
    ScoreMatrix,
    ScorerConfig,
    heuristic_score,
    lsam_sample,
    make_heuristic_scorer,
    score_all_pairs,
    symmetrize,
    threshold_to_graph,
)
from .synthetic import (
    GapBand,
    GenerationError,
    SceneConfig,
    SyntheticScene,
    generate,
    render_overlay,
    save_overlay,
    save_scene,
    truth_segments,
)

__version__ = "0.1.0"
