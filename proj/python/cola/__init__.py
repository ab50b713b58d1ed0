"""Python surface of the decentralized linear learning core.

Everything heavy lives in the compiled ``_core`` extension; this package just
re-exports it and adds a couple of convenience wrappers.
"""

import json as _json

from ._core import (
    ProblemSpec,
    SparseColMatrix,
    centralized_gap,
    compute_reference,
    decentralized_gap,
    make_lasso,
    make_ridge,
    metropolis_beta,
    run_config,
    validate_config,
)

__all__ = [
    "ProblemSpec",
    "SparseColMatrix",
    "centralized_gap",
    "compute_reference",
    "decentralized_gap",
    "make_lasso",
    "make_ridge",
    "metropolis_beta",
    "run_config",
    "run",
    "validate_config",
]


def run(config):
    """Run a config given as a dict or a JSON string; returns the trace dict."""
    if isinstance(config, dict):
        config = _json.dumps(config)
    return run_config(config)
