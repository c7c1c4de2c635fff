"""Confusion-matrix metrics with INFORMATIVE as the positive class."""
import json
from typing import Dict, Sequence, Tuple

from pydantic import BaseModel, Field

from app.corpus import Label
from app.errors import DataError


class EvalReport(BaseModel):
    tp: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    accuracy: float = Field(..., ge=0, le=1)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [
            ("", "gold INFORMATIVE", "gold UNINFORMATIVE"),
            ("pred INFORMATIVE", str(self.tp), str(self.fp)),
            ("pred UNINFORMATIVE", str(self.fn), str(self.tn)),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)).rstrip() for r in rows
        ]
        lines.append("")
        for name in ("precision", "recall", "f1", "accuracy"):
            lines.append(f"{name:<10} {getattr(self, name):.5f}")
        return "\n".join(lines)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def _check(preds: Sequence[Label], golds: Sequence[Label]) -> None:
    if len(preds) != len(golds):
        raise DataError(f"Prediction count ({len(preds)}) differs from gold count ({len(golds)})")
    if len(golds) == 0:
        raise DataError("Cannot evaluate an empty prediction list")


def confusion(
    preds: Sequence[Label], golds: Sequence[Label], positive: Label = Label.INFORMATIVE
) -> Tuple[int, int, int, int]:
    """(tp, fp, fn, tn) for the given positive class."""
    _check(preds, golds)
    tp = fp = fn = tn = 0
    for pred, gold in zip(preds, golds):
        p, g = Label(pred) is positive, Label(gold) is positive
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def _f1(tp: int, fp: int, fn: int) -> float:
    precision, recall = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def evaluate(preds: Sequence[Label], golds: Sequence[Label]) -> EvalReport:
    """
    Binary scores for INFORMATIVE; any zero denominator yields 0.

    Raises:
        DataError: length mismatch or empty input.
    """
    tp, fp, fn, tn = confusion(preds, golds)
    return EvalReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        f1=_f1(tp, fp, fn),
        accuracy=_ratio(tp + tn, tp + fp + fn + tn),
    )


def f1_breakdown(preds: Sequence[Label], golds: Sequence[Label]) -> Dict[str, float]:
    """Binary, macro and support-weighted F1."""
    per_class = {}
    support = {}
    for label in Label:
        tp, fp, fn, _ = confusion(preds, golds, positive=label)
        per_class[label] = _f1(tp, fp, fn)
        support[label] = tp + fn
    total = sum(support.values())
    return {
        "binary": per_class[Label.INFORMATIVE],
        "macro": sum(per_class.values()) / len(per_class),
        "weighted": sum(per_class[label] * support[label] for label in Label) / total,
    }
