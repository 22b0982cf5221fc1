"""Counterfactual code perturbation toolkit (Python bindings)."""

from ._core import (
    CONCEPTS,
    DomainError,
    MissingEntryPoint,
    NotApplicable,
    ParseError,
    ProcureError,
    SandboxUnavailable,
    SchemaError,
    TransportError,
    UnsupportedConstruct,
    annotate_diff,
    ccs,
    enumerate_sites,
    fast_filter,
    pass_at_k,
    perturb,
    perturb_corpus,
    render_prompt,
    stats,
    structural_digest,
    validate,
)

__all__ = [
    "CONCEPTS",
    "DomainError",
    "MissingEntryPoint",
    "NotApplicable",
    "ParseError",
    "ProcureError",
    "SandboxUnavailable",
    "SchemaError",
    "TransportError",
    "UnsupportedConstruct",
    "annotate_diff",
    "ccs",
    "enumerate_sites",
    "fast_filter",
    "pass_at_k",
    "perturb",
    "perturb_corpus",
    "render_prompt",
    "stats",
    "structural_digest",
    "validate",
]
