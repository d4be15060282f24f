"""Zero-shot 3D mesh part segmentation.

Render a mesh from a ring of viewpoints, ask a language-driven 2D
segmentation backend about each view, and fuse the returned masks into
per-face labels with scores and explanations.
"""

from .backends import (
    BackendError,
    CandidateMask,
    FixtureBackend,
    HttpBackend,
    OracleBackend,
    ProtocolError,
    SegQuery,
    make_backend,
)
from .evaluation import EvalReport, GroundTruth, face_iou, load_ground_truth, miou_report
from .fusion import (
    FaceScores,
    FusionConfig,
    FusionError,
    MaskFaceSet,
    SegmentationResult,
    accumulate,
    central_face,
    filter_topk,
    fuse,
    gaussian_reweight,
    global_filter,
    mask_faces,
    multi_query_label,
    save_colored_ply,
    visibility_smooth,
)
from .geodesic import (
    GeodesicField,
    GeodesicSolver,
    dijkstra_geodesic,
    fit_gaussian,
    gaussian_density,
    heat_geodesic,
)
from .mesh import (
    FaceGraph,
    Mesh,
    MeshError,
    build_face_graph,
    load_mesh,
    normalize,
    q_ring,
)
from .pipeline import PipelineConfig, PipelineRun, resolve_config, run_segmentation
from .render import (
    BACKGROUND,
    Camera,
    ViewRender,
    make_view_ring,
    rasterize,
    render_views,
    visible_faces,
)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND",
    "BackendError",
    "Camera",
    "CandidateMask",
    "EvalReport",
    "FaceGraph",
    "FaceScores",
    "FixtureBackend",
    "FusionConfig",
    "FusionError",
    "GeodesicField",
    "GeodesicSolver",
    "GroundTruth",
    "HttpBackend",
    "MaskFaceSet",
    "Mesh",
    "MeshError",
    "OracleBackend",
    "PipelineConfig",
    "PipelineRun",
    "ProtocolError",
    "SegQuery",
    "SegmentationResult",
    "ViewRender",
    "accumulate",
    "build_face_graph",
    "central_face",
    "dijkstra_geodesic",
    "face_iou",
    "filter_topk",
    "fit_gaussian",
    "fuse",
    "gaussian_density",
    "gaussian_reweight",
    "global_filter",
    "heat_geodesic",
    "load_ground_truth",
    "load_mesh",
    "make_backend",
    "make_view_ring",
    "mask_faces",
    "miou_report",
    "multi_query_label",
    "normalize",
    "q_ring",
    "rasterize",
    "render_views",
    "resolve_config",
    "run_segmentation",
    "save_colored_ply",
    "visibility_smooth",
    "visible_faces",
]
