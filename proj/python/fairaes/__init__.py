"""Fairness-aware essay scoring: triplet mining, contrastive adapters, fairness metrics."""

from ._fairaes import (
    FairaesError,
    Pipeline,
    __version__,
    gap_reduction,
    generate_synth,
    mine_triplets,
    pearson,
    qwk,
    residual_report,
    run_experiment,
    sentence_stats,
    tokenize,
    triplet_loss,
    triplet_loss_grad,
)

STAGES = (
    "synth",
    "ingest",
    "split",
    "mine",
    "train-baseline",
    "train-contrastive",
    "fit-head",
    "evaluate",
    "ablate",
    "analyze",
)


def run_chain(pipeline, alpha=1.0):
    """Runs synth through analyze with the default model names."""
    for stage in ("synth", "split", "mine", "train-baseline"):
        pipeline.run(stage)
    pipeline.run("train-contrastive", alpha=alpha)
    for stage in ("fit-head", "evaluate", "analyze"):
        pipeline.run(stage)


__all__ = [
    "FairaesError",
    "Pipeline",
    "STAGES",
    "__version__",
    "gap_reduction",
    "generate_synth",
    "mine_triplets",
    "pearson",
    "qwk",
    "residual_report",
    "run_chain",
    "run_experiment",
    "sentence_stats",
    "tokenize",
    "triplet_loss",
    "triplet_loss_grad",
]
