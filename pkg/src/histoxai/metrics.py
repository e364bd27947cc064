"""Binary-classification scoring from the confusion matrix.

The six quantities reported for every model: accuracy, sensitivity,
specificity, precision, F1, and Matthews correlation (MCC). MCC is the
Pearson correlation between the binary prediction and label vectors,
computed from counts:

    mcc = (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn))

with the standard limit convention that any zero factor under the root
gives mcc = 0. Other metrics with a zero denominator are reported as
undefined (rendered "n/a") rather than silently zeroed — a one-class
test set should look suspicious, not perfect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricReport:
    """Scores in [0,1] (mcc in [-1,1]); None marks an undefined rate."""

    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    precision: float | None
    f1: float | None
    mcc: float


def confusion(preds, labels, positive_class=1) -> ConfusionMatrix:
    """Count tp/tn/fp/fn with the given class treated as positive."""
    p = np.asarray(preds)
    l = np.asarray(labels)
    if p.shape != l.shape or p.ndim != 1:
        raise ValueError(f"preds/labels must be equal-length vectors, "
                         f"got {p.shape} vs {l.shape}")
    if len(p) < 1:
        raise ValueError("need at least one prediction")
    pp = p == positive_class
    lp = l == positive_class
    return ConfusionMatrix(
        tp=int(np.sum(pp & lp)),
        tn=int(np.sum(~pp & ~lp)),
        fp=int(np.sum(pp & ~lp)),
        fn=int(np.sum(~pp & lp)),
    )


def score(cm: ConfusionMatrix) -> MetricReport:
    """All six metrics from one confusion matrix."""
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    tp, tn, fp, fn = cm.tp, cm.tn, cm.fp, cm.fn
    accuracy = (tp + tn) / cm.total
    sensitivity = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    precision = _ratio(tp, tp + fp)
    if precision is None or sensitivity is None or precision + sensitivity == 0:
        f1 = None
    else:
        # same value as the harmonic mean of precision and sensitivity,
        # but computed straight from the counts so it stays bit-exact
        f1 = 2 * tp / (2 * tp + fp + fn)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        mcc = 0.0
    else:
        mcc = (tp * tn - fp * fn) / math.sqrt(denom)
    return MetricReport(accuracy=accuracy, sensitivity=sensitivity,
                        specificity=specificity, precision=precision,
                        f1=f1, mcc=mcc)


_COLUMNS = ("Classification Accuracy", "Sensitivity", "Specificity",
            "Precision", "F1 Score", "MCC", "Training Time (s)")


def format_value(v, decimals: int = 4) -> str:
    return "n/a" if v is None else f"{v:.{decimals}f}"


def metrics_table(rows, decimals: int = 4) -> str:
    """Aligned plain-text table, one row per model.

    ``rows`` is a list of (model_name, MetricReport, training_seconds)
    where training_seconds may be None (rendered "n/a"; evaluation
    reports omit wall time by default so reruns diff clean).
    """
    header = ["Model", *_COLUMNS]
    body = []
    for name, rep, train_s in rows:
        body.append([
            str(name),
            format_value(rep.accuracy, decimals),
            format_value(rep.sensitivity, decimals),
            format_value(rep.specificity, decimals),
            format_value(rep.precision, decimals),
            format_value(rep.f1, decimals),
            format_value(rep.mcc, decimals),
            format_value(train_s, 2) if train_s is not None else "n/a",
        ])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) if body
              else len(header[i]) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*r) for r in body]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den
