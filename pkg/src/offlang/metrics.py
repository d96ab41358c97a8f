"""Confusion matrices, classification metrics and result-table rendering.

All zero-denominator cases are defined as 0 so degenerate predictions never
propagate NaN into reports. Both positive-class F1 and macro-F1 are carried:
published result tables rarely say which convention they use, so reports
show both and best-row selection defaults to positive-class F1.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise MetricsError("negative confusion count")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1_positive: float
    f1_macro: float


def confusion(predictions, labels) -> ConfusionMatrix:
    predictions = list(predictions)
    labels = list(labels)
    if len(predictions) != len(labels):
        raise MetricsError(
            "length mismatch: %d predictions vs %d labels" % (len(predictions), len(labels))
        )
    if not predictions:
        raise MetricsError("nothing to evaluate")
    tp = fp = fn = tn = 0
    for p, y in zip(predictions, labels):
        if p not in (0, 1) or y not in (0, 1):
            raise MetricsError("labels must be binary 0/1")
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise MetricsError("empty confusion matrix")
    precision, recall, f1_pos = _prf(cm.tp, cm.fp, cm.fn)
    # negative class: swap the roles
    _, _, f1_neg = _prf(cm.tn, cm.fn, cm.fp)
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1_positive=f1_pos,
        f1_macro=0.5 * (f1_pos + f1_neg),
    )


def select_best(results: list, key: str = "f1_positive"):
    """Spec of the row with the highest F1 (ties: higher accuracy, then first)."""
    if not results:
        raise MetricsError("no results to select from")
    best_spec, best_report = results[0]
    for spec, report in results[1:]:
        a, b = getattr(report, key), getattr(best_report, key)
        if a > b or (a == b and report.accuracy > best_report.accuracy):
            best_spec, best_report = spec, report
    return best_spec


REPORT_COLUMNS = (
    "Model",
    "Fine-Tuning Dataset",
    "Acc (%)",
    "Pr (%)",
    "Rec (%)",
    "F1 (%)",
    "Macro F1 (%)",
    "Best",
)


def _rows(results, key: str):
    best = select_best(results, key) if results else None
    rows = []
    for spec, m in results:
        rows.append(
            (
                spec.model,
                "+".join(spec.fine_tuning),
                "%.2f" % (100 * m.accuracy),
                "%.2f" % (100 * m.precision),
                "%.2f" % (100 * m.recall),
                "%.2f" % (100 * m.f1_positive),
                "%.2f" % (100 * m.f1_macro),
                "*" if spec is best else "",
            )
        )
    return rows


def render_report(results: list, format: str = "markdown", key: str = "f1_positive") -> str:
    """Result table shaped like the published per-language tables.

    One row per experiment, percentages to two decimals, the best-F1 row
    flagged. ``format`` is markdown or csv (RFC-4180 with header).
    """
    rows = _rows(results, key)
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(rows)
        return buf.getvalue()
    if format == "markdown":
        out = ["| " + " | ".join(REPORT_COLUMNS) + " |",
               "|" + "|".join("---" for _ in REPORT_COLUMNS) + "|"]
        for r in rows:
            out.append("| " + " | ".join(r) + " |")
        return "\n".join(out) + "\n"
    raise MetricsError("unknown report format %r" % format)
