"""Convexified small-signal-stability-constrained OPF."""

import json

from ._cscopf import (
    CaseError,
    ConfigError,
    cscopf,
    load_case,
    rank_one_decompose,
    relaxed_opf,
    spectral_abscissa,
)
from ._cscopf import run as _run

__all__ = [
    "CaseError",
    "ConfigError",
    "cscopf",
    "load_case",
    "rank_one_decompose",
    "relaxed_opf",
    "run",
    "spectral_abscissa",
]


def run(**config):
    """Run a CLI command, e.g. run(command="opf", case="cases/wscc9.json", out="out").

    Returns (exit_code, log_text).
    """
    return _run(json.dumps(config))
