"""Prompt-pair adaptor fine-tuning on frozen embeddings.

Thin wrappers over the C++ engine. Configuration everywhere uses the same
flat dotted keys as the command-line tool, e.g. ``{"run.scenario":
"class_incremental", "adaptor.init": "identity"}``.
"""

import json

from ._adaptune import (
    AdaptorSet,
    AdaptuneError,
    Dataset,
    auc,
    bce_loss,
    build_schedule,
    cosine,
    load_dataset,
    make_adaptors,
    mean_auc,
    predict,
    score_batch,
)
from . import _adaptune

__all__ = [
    "AdaptorSet",
    "AdaptuneError",
    "Dataset",
    "auc",
    "bce_loss",
    "build_schedule",
    "cosine",
    "generate",
    "load_dataset",
    "make_adaptors",
    "mean_auc",
    "predict",
    "run",
    "score_batch",
    "synth",
    "run_command",
    "sweep",
]


def _dump(config):
    return json.dumps(dict(config or {}))


def generate(config=None):
    """In-memory synthetic dataset from ``synth.*`` keys."""
    return _adaptune.generate_dataset(_dump(config))


def run(data, config=None):
    """Train and evaluate every seed; returns the report as a dict."""
    return json.loads(_adaptune.run_json(data, _dump(config)))


def synth(config=None):
    """Write a synthetic dataset to ``paths.data``; returns the manifest path."""
    return _adaptune.cmd_synth(_dump(config))


def run_command(config=None):
    """Same as ``adaptune run``; returns the artifact directory."""
    return _adaptune.cmd_run(_dump(config))


def sweep(config=None):
    """Same as ``adaptune sweep``; returns (directory, run, skipped, failed)."""
    return _adaptune.cmd_sweep(_dump(config))
