"""Perturb-ability scoring and PS-guided defenses for flow-based NIDS."""

from ._psguard import (
    CommandOutput,
    PsguardError,
    RunConfig,
    SCHEMA_VERSION,
    __version__,
    asr,
    classify,
    cmd_defend,
    cmd_experiment,
    cmd_score,
    cmd_synth,
    ps2,
    ps3,
    ps_total,
    score_fixture,
    synthesize,
)

__all__ = [
    "CommandOutput",
    "PsguardError",
    "RunConfig",
    "SCHEMA_VERSION",
    "__version__",
    "asr",
    "classify",
    "cmd_defend",
    "cmd_experiment",
    "cmd_score",
    "cmd_synth",
    "ps2",
    "ps3",
    "ps_total",
    "score_fixture",
    "synthesize",
]
