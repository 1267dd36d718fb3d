from ._core import (
    CompileError,
    FixtureError,
    InvalidNetwork,
    LearnError,
    PolicyError,
    canonical,
    extract,
    format_ratio,
    learn,
    policy_plan,
    run,
    synthetic_source,
    validate,
)

__all__ = [
    "CompileError",
    "FixtureError",
    "InvalidNetwork",
    "LearnError",
    "PolicyError",
    "canonical",
    "extract",
    "format_ratio",
    "learn",
    "policy_plan",
    "run",
    "synthetic_source",
    "validate",
]
