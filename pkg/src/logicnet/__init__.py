"""Testbench for depth-bounded logical expressiveness of small neural nets.

Exact predicates over finite universes, width-bounded threshold
representability, compilation of quantized nets into predicate circuits,
pseudoinverse/null-space diagnostics, a deterministic token-generation
pipeline, and least-squares approximation of deep predicates by shallow
bases.
"""

from .errors import (
    BudgetExceededError,
    CompilationError,
    ConfigError,
    DomainError,
)
from .linops import (
    LinearOperator,
    NullSpaceBasis,
    find_alias_pair,
    null_space_basis,
    pseudoinverse,
    rank,
)
from .metaphor import ApproxReport, alias_classes, approximate, hallucination_score
from .netcompile import (
    Layer,
    PredicateCircuit,
    QuantizedNet,
    VerificationResult,
    bit_predicate,
    compile_net,
    load_weights,
    net_predicate,
    random_net,
    save_weights,
    verify_compilation,
)
from .pipeline import (
    NullSpaceReport,
    PipelineConfig,
    StepTrace,
    detokenize,
    load_pipeline_config,
    make_config,
    null_space_report,
    run,
    save_pipeline_config,
    step,
    tokenize,
)
from .predicates import (
    Predicate,
    PredicateFamily,
    Universe,
    all_false,
    all_true,
    at_least_k_of_family,
    at_least_k_true,
    atom,
    atoms_family,
    combine,
    load_predicates,
    relevant_variables,
    save_predicates,
)
from .separability import (
    CapacityReport,
    SeparabilityWitness,
    exhaust_capacity,
    find_indistinguishable_pair,
    is_linearly_separable,
    representable_by_single_layer,
    witness_margin,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxReport",
    "BudgetExceededError",
    "CapacityReport",
    "CompilationError",
    "ConfigError",
    "DomainError",
    "Layer",
    "LinearOperator",
    "NullSpaceBasis",
    "NullSpaceReport",
    "PipelineConfig",
    "Predicate",
    "PredicateCircuit",
    "PredicateFamily",
    "QuantizedNet",
    "SeparabilityWitness",
    "StepTrace",
    "Universe",
    "VerificationResult",
    "alias_classes",
    "all_false",
    "all_true",
    "approximate",
    "at_least_k_of_family",
    "at_least_k_true",
    "atom",
    "atoms_family",
    "bit_predicate",
    "combine",
    "compile_net",
    "detokenize",
    "exhaust_capacity",
    "find_alias_pair",
    "find_indistinguishable_pair",
    "hallucination_score",
    "is_linearly_separable",
    "load_pipeline_config",
    "load_predicates",
    "load_weights",
    "make_config",
    "net_predicate",
    "null_space_basis",
    "null_space_report",
    "pseudoinverse",
    "random_net",
    "rank",
    "relevant_variables",
    "representable_by_single_layer",
    "run",
    "save_pipeline_config",
    "save_predicates",
    "save_weights",
    "step",
    "tokenize",
    "verify_compilation",
    "witness_margin",
]
