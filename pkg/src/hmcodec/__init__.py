"""Keypoint heatmap coordinate codec.

Encodes ground-truth joint coordinates into Gaussian heatmap targets
(biased/quantised or unbiased sub-pixel variants) and decodes predicted
heatmaps back into sub-pixel original-image coordinates via argmax, the
standard 0.25-px shift, or log-domain Taylor refinement with distribution
modulation. Includes a seeded synthetic benchmark harness, PCK-style
metrics, and bit-exact file formats.
"""

from .bench import (
    DEFAULT_PCK_THRESHOLDS,
    ErrorStats,
    NOISE_KINDS,
    NoiseModel,
    PckResult,
    TrialSpec,
    compare_report,
    evaluate,
    generate_trial,
    pck,
    stats_to_json,
)
from .core import (
    EncodingConfig,
    GaussianParams,
    GroundTruthJoint,
    Heatmap,
    MODES,
    NORMALIZATIONS,
    QUANTISERS,
    encode,
    quantise_coordinate,
    reduce_coordinate,
    synthesize_heatmap,
)
from .decode import (
    FALLBACK_AMBIGUOUS_SECOND_MAX,
    FALLBACK_BORDER,
    FALLBACK_CODES,
    FALLBACK_KINDS,
    FALLBACK_NON_NEGATIVE_DEFINITE,
    FALLBACK_NONE,
    FALLBACK_STEP_CAPPED,
    METHODS,
    DecodeConfig,
    DecodeResult,
    LogPatch,
    ModulationKernel,
    argmax_decode,
    build_log_patch,
    dark_decode,
    decode,
    decode_batch,
    modulate,
    modulation_kernel,
    newton_refine,
    recover_resolution,
    second_max,
    standard_shift_decode,
)
from .errors import (
    AmbiguousSecondMax,
    BorderMax,
    FormatError,
    InvalidConfig,
    InvalidInput,
)
from .io import (
    HeatmapFileHeader,
    KeypointDocument,
    read_heatmaps,
    read_keypoints,
    write_heatmaps,
    write_keypoints,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousSecondMax",
    "BorderMax",
    "DEFAULT_PCK_THRESHOLDS",
    "DecodeConfig",
    "DecodeResult",
    "EncodingConfig",
    "ErrorStats",
    "FALLBACK_AMBIGUOUS_SECOND_MAX",
    "FALLBACK_BORDER",
    "FALLBACK_CODES",
    "FALLBACK_KINDS",
    "FALLBACK_NON_NEGATIVE_DEFINITE",
    "FALLBACK_NONE",
    "FALLBACK_STEP_CAPPED",
    "FormatError",
    "GaussianParams",
    "GroundTruthJoint",
    "Heatmap",
    "HeatmapFileHeader",
    "InvalidConfig",
    "InvalidInput",
    "KeypointDocument",
    "LogPatch",
    "METHODS",
    "MODES",
    "ModulationKernel",
    "NOISE_KINDS",
    "NORMALIZATIONS",
    "NoiseModel",
    "PckResult",
    "QUANTISERS",
    "TrialSpec",
    "argmax_decode",
    "build_log_patch",
    "compare_report",
    "dark_decode",
    "decode",
    "decode_batch",
    "encode",
    "evaluate",
    "generate_trial",
    "modulate",
    "modulation_kernel",
    "newton_refine",
    "pck",
    "quantise_coordinate",
    "read_heatmaps",
    "read_keypoints",
    "recover_resolution",
    "reduce_coordinate",
    "second_max",
    "standard_shift_decode",
    "stats_to_json",
    "synthesize_heatmap",
    "write_heatmaps",
    "write_keypoints",
]
