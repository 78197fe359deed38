"""Hierarchical pixel clustering and image segmentation.

Builds dichotomous merge hierarchies over images, converts arbitrary
hierarchies into quasioptimal ones (convex error-versus-cluster-count
sequences) through a combined merge/restructure operation, and improves
fixed-size partitions with an alternating split/merge loop.
"""

from .stats import (
    ClusterStats,
    EMPTY_STATS,
    cluster_error,
    merge_increment,
    merge_stats,
    sigma_from_error,
    stats_of_pixels,
    subtract_stats,
)
from .hierarchy import (
    REL_EPSILON,
    DumpedHierarchy,
    ErrorCurve,
    Hierarchy,
    HierarchyNode,
    Partition,
    build_from_merges,
    parse_dump_text,
)
from .ward import ward_cluster
from .segmentation import (
    AdjacencyGraph,
    build_rag,
    greedy_segment,
    segment_restructured,
)
from .restructure import combined_merge, restructure
from .asi import asi_improve, best_merge, best_split
from .oracle import (
    CapacityError,
    optimal_connected_partition,
    optimal_curve,
    optimal_partition,
)
from .pnm import (
    ImageRaster,
    PnmError,
    PnmMaxvalError,
    TruncatedPnmError,
    UnsupportedPnmFormat,
    image_stats,
    load_image,
    parse_pnm,
    encode_pnm,
    save_image,
)
from .io import (
    export_curve,
    partition_raster,
    read_curve,
    read_hierarchy_dump,
    render_partition,
    write_hierarchy_dump,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterStats", "EMPTY_STATS", "stats_of_pixels", "merge_stats",
    "subtract_stats", "cluster_error", "merge_increment", "sigma_from_error",
    "REL_EPSILON", "Hierarchy", "HierarchyNode", "Partition", "ErrorCurve",
    "build_from_merges", "DumpedHierarchy", "parse_dump_text",
    "ward_cluster",
    "AdjacencyGraph", "build_rag", "greedy_segment", "segment_restructured",
    "combined_merge", "restructure",
    "best_split", "best_merge", "asi_improve",
    "CapacityError", "optimal_partition", "optimal_connected_partition",
    "optimal_curve",
    "ImageRaster", "PnmError", "UnsupportedPnmFormat", "PnmMaxvalError",
    "TruncatedPnmError", "load_image", "parse_pnm", "encode_pnm",
    "save_image", "image_stats",
    "render_partition", "partition_raster", "export_curve", "read_curve",
    "write_hierarchy_dump", "read_hierarchy_dump",
    "__version__",
]
