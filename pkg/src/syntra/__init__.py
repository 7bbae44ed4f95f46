"""Transductive program synthesis: active learning over the finite
hypothesis class defined by candidate programs' outputs on visible test
inputs, with greedy maximin query selection."""

from .core import (
    CandidateSet,
    Hypothesis,
    OutputValue,
    Program,
    TaskSpec,
    Transcript,
    TranscriptStep,
    Value,
    VersionSpace,
    canonical_parse,
    canonical_serialize,
)
from .engine import SyntraResult, resolve_version_space, run_direct_transduction, run_syntra
from .errors import (
    ConfigError,
    EmptyProgramPool,
    NoInformativeInput,
    ReplayMismatch,
    RunnerUnavailable,
    SchemaError,
    SizeGuardError,
    SyntraError,
    TransportError,
)
from .executor import (
    ExecLimits,
    GuestRunner,
    build_hypothesis_class,
    diversity_count,
    filter_consistent,
    run_program,
)
from .oracle import (
    AdversarialOracle,
    GroundTruthOracle,
    InteractiveOracle,
    LlmOracle,
    NoisyOracle,
    Oracle,
    OraclePrediction,
    OracleQuery,
    ReplayOracle,
    fuzzy_match,
    render_prompt,
)
from .selector import (
    SelectorResult,
    candidate_outputs,
    exhaustive_maximin,
    maximin_select,
    optimal_query_tree_depth,
    random_select,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "Hypothesis",
    "OutputValue",
    "Program",
    "TaskSpec",
    "Transcript",
    "TranscriptStep",
    "Value",
    "VersionSpace",
    "canonical_parse",
    "canonical_serialize",
    "SyntraResult",
    "resolve_version_space",
    "run_direct_transduction",
    "run_syntra",
    "ConfigError",
    "EmptyProgramPool",
    "NoInformativeInput",
    "ReplayMismatch",
    "RunnerUnavailable",
    "SchemaError",
    "SizeGuardError",
    "SyntraError",
    "TransportError",
    "ExecLimits",
    "GuestRunner",
    "build_hypothesis_class",
    "diversity_count",
    "filter_consistent",
    "run_program",
    "AdversarialOracle",
    "GroundTruthOracle",
    "InteractiveOracle",
    "LlmOracle",
    "NoisyOracle",
    "Oracle",
    "OraclePrediction",
    "OracleQuery",
    "ReplayOracle",
    "fuzzy_match",
    "render_prompt",
    "SelectorResult",
    "candidate_outputs",
    "exhaustive_maximin",
    "maximin_select",
    "optimal_query_tree_depth",
    "random_select",
    "__version__",
]
