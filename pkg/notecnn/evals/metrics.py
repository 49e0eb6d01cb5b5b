from typing import Iterable, List, Optional, Sequence, Tuple

from decimal import ROUND_HALF_UP, Decimal

from notecnn.exceptions import ArgumentError
from notecnn.schemas import ConfusionMatrix, MetricReport

TABLE_COLUMNS = ("Task", "Model", "Prec", "Rec", "F1", "Acc")


def confusion(predicted: Sequence[bool], truth: Sequence[bool]) -> ConfusionMatrix:
    """Confusion counts with readmission (True) as the positive class."""
    if len(predicted) != len(truth):
        raise ArgumentError(f"{len(predicted)} predictions for {len(truth)} labels")
    if not truth:
        raise ArgumentError("cannot build a confusion matrix from no samples")
    tp = fp = fn = tn = 0
    for p, t in zip(predicted, truth):
        p, t = bool(p), bool(t)
        if p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _ratio(numerator: float, denominator: float) -> Tuple[float, bool]:
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def f1_score(precision: float, recall: float) -> Tuple[float, bool]:
    """Harmonic mean of precision and recall, with a degenerate flag when both are zero.

    >>> round(f1_score(0.759, 0.754)[0], 3)
    0.756
    """
    return _ratio(2.0 * precision * recall, precision + recall)


def report(cm: ConfusionMatrix, task: Optional[str] = None, model: Optional[str] = None) -> MetricReport:
    if cm.total == 0:
        raise ArgumentError("cannot report metrics on zero samples")
    degenerate: List[str] = []
    precision, bad = _ratio(cm.tp, cm.tp + cm.fp)
    if bad:
        degenerate.append("precision")
    recall, bad = _ratio(cm.tp, cm.tp + cm.fn)
    if bad:
        degenerate.append("recall")
    f1, bad = f1_score(precision, recall)
    if bad:
        degenerate.append("f1")
    return MetricReport(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(cm.tp + cm.tn) / cm.total,
        counts=cm,
        task=task,
        model=model,
        degenerate=degenerate,
    )


def evaluate(predicted: Sequence[bool], truth: Sequence[bool], task: Optional[str] = None, model: Optional[str] = None) -> MetricReport:
    return report(confusion(predicted, truth), task=task, model=model)


def round_half_away(value: float, digits: int = 3) -> str:
    """Display rounding, half away from zero.

    >>> round_half_away(0.7565)
    '0.757'
    >>> round_half_away(-0.0005)
    '-0.001'
    """
    quantum = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def format_table(reports: Iterable[MetricReport]) -> str:
    """Aligned text table in the Task / Model / Prec / Rec / F1 / Acc layout."""
    rows = [list(TABLE_COLUMNS)]
    for r in reports:
        rows.append([r.task or "-", r.model or "-", *(round_half_away(v) for v in (r.precision, r.recall, r.f1, r.accuracy))])
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = []
    for n, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) if i < 2 else cell.rjust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
