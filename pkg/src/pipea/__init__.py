"""Weakly supervised entity alignment via cross-graph similarity propagation."""

__version__ = "0.1.0"

from .aligner import PipeAligner
from .config import PipelineConfig, parse_config_file, resolve_config
from .decode import (
    AlignmentResult,
    EvalReport,
    evaluate,
    greedy_decode,
    hungarian_assign,
    sinkhorn,
    sinkhorn_greedy,
)
from .encoder import SimilarityMatrix, builtin_encoder, import_similarity
from .errors import (
    ConfigError,
    DatasetFormatError,
    DegenerateInputError,
    DomainError,
    IntegrityError,
    ParameterError,
    PipeaError,
)
from .kg import (
    DatasetBundle,
    KnowledgeGraph,
    SeedAlignments,
    generate_synthetic_pair,
    load_openea_dataset,
    normalized_adjacency,
    write_openea_dataset,
)
from .operator import (
    PipOperator,
    PropagationResult,
    build_operator,
    factorize_embed,
    global_similarity,
    propagate_push,
    propagate_series,
)
from .refine import RefinementState, fuse, mnc_approx, pin_seed_rows, refine

__all__ = [
    "AlignmentResult",
    "ConfigError",
    "DatasetBundle",
    "DatasetFormatError",
    "DegenerateInputError",
    "DomainError",
    "EvalReport",
    "IntegrityError",
    "KnowledgeGraph",
    "ParameterError",
    "PipeAligner",
    "PipOperator",
    "PipeaError",
    "PipelineConfig",
    "PropagationResult",
    "RefinementState",
    "SeedAlignments",
    "SimilarityMatrix",
    "builtin_encoder",
    "build_operator",
    "evaluate",
    "factorize_embed",
    "fuse",
    "generate_synthetic_pair",
    "global_similarity",
    "greedy_decode",
    "hungarian_assign",
    "import_similarity",
    "load_openea_dataset",
    "mnc_approx",
    "normalized_adjacency",
    "parse_config_file",
    "pin_seed_rows",
    "propagate_push",
    "propagate_series",
    "refine",
    "resolve_config",
    "sinkhorn",
    "sinkhorn_greedy",
    "write_openea_dataset",
]
