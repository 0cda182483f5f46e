"""Low-rank quaternion matrix completion via truncated nuclear norms."""

from .quat import (
    AdjointStructureError,
    DimensionMismatchError,
    QMatrix,
    Quaternion,
    conj_transpose,
    embed,
    extract,
    mat_mul,
    quat_mul,
    quat_trace,
    real_trace_inner,
)
from .qsvd import (
    DecompositionError,
    OrthonormalityError,
    QsvdFactors,
    TruncatedFactors,
    nuclear_norm,
    qsvd,
    qsvt,
    qtnn_value,
    trace_functional,
    truncated_factors,
)
from .completion import (
    Mask,
    SolverConfig,
    SolverReport,
    WeightSpec,
    build_weights,
    dwqtnn_complete,
    qnn_svt_baseline,
    qtnn_complete,
    random_low_rank,
    random_mask,
    step_bound_check,
    theorem5_bound,
    wqtnn_complete,
)
from .imaging import (
    BlockPattern,
    DiamondPattern,
    RandomPattern,
    TrianglePattern,
    decode,
    encode,
    make_mask,
    psnr,
    ssim,
)

__all__ = [
    "AdjointStructureError", "BlockPattern", "DecompositionError",
    "DiamondPattern", "DimensionMismatchError", "Mask",
    "OrthonormalityError", "QMatrix", "QsvdFactors", "Quaternion",
    "RandomPattern", "SolverConfig", "SolverReport", "TrianglePattern",
    "TruncatedFactors", "WeightSpec", "build_weights", "conj_transpose",
    "decode", "dwqtnn_complete", "embed", "encode", "extract", "make_mask",
    "mat_mul", "nuclear_norm", "psnr", "qnn_svt_baseline", "qsvd", "qsvt",
    "qtnn_complete", "qtnn_value", "quat_mul", "quat_trace",
    "random_low_rank", "random_mask", "real_trace_inner", "ssim",
    "step_bound_check", "theorem5_bound", "trace_functional",
    "truncated_factors", "wqtnn_complete",
]

__version__ = "0.1.0"
