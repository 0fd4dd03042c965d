from ._core import (
    Bicop,
    Classifier,
    VineclsError,
    __version__,
    auc,
    bayes_posterior,
    benchmark,
    conditional_spearman,
    per_class_brier,
    per_class_nll,
    risk_groups,
    set_threads,
    simulate,
)

__all__ = [
    "Bicop",
    "Classifier",
    "VineclsError",
    "auc",
    "bayes_posterior",
    "benchmark",
    "conditional_spearman",
    "per_class_brier",
    "per_class_nll",
    "risk_groups",
    "set_threads",
    "simulate",
]
