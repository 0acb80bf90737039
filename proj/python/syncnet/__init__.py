"""Synchronized-action detection and the Combined Synchronization Index."""

import json as _json

from ._syncnet import (
    ConfigError,
    ConvergenceError,
    CorpusRejected,
    InvalidRecord,
    IoError,
    ParseError,
    SyncnetError,
    UndefinedNetwork,
    brute_force_detect,
    canonicalize_artifact,
    classify_user,
    compare,
    compute_csi,
    detect,
    graph_metrics,
    pair_score,
    parse_events,
    prune,
)
from ._syncnet import run_report as _run_report
from ._syncnet import simulate as _simulate

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "CorpusRejected",
    "InvalidRecord",
    "IoError",
    "ParseError",
    "SyncnetError",
    "UndefinedNetwork",
    "brute_force_detect",
    "canonicalize_artifact",
    "classify_user",
    "compare",
    "compute_csi",
    "detect",
    "graph_metrics",
    "pair_score",
    "parse_events",
    "prune",
    "run_report",
    "simulate",
]


def run_report(events, bots=None, out_dir=None, **options):
    """Run the full pipeline and return the report as a dict.

    Keyword options: window, pair_formula, normalization, min_partners, lang,
    bot_threshold, seed, workers.
    """
    text = _run_report(str(events), None if bots is None else str(bots),
                       None if out_dir is None else str(out_dir), **options)
    return _json.loads(text)


def simulate(config, out_dir):
    """Generate a synthetic dataset. `config` is a dict or a JSON string."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _simulate(config, str(out_dir))
