"""Classifier evaluation by model checking."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import UsageError
from ..quadtree import QTS, qts_from_observation
from ..tssl import check, depth_of
from ..tssl.syntax import Formula


@dataclass
class Metrics:
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    n_rules: int | None = None
    formula_depth: int | None = None
    misclassified: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "n_rules": self.n_rules,
            "formula_depth": self.formula_depth,
        }


def evaluate_classifier(phi: Formula, test: list[tuple], quant_levels: int = 16,
                        n_rules: int | None = None) -> Metrics:
    """Model-check every (observation-or-QTS, label) pair; predicted "+"
    iff the formula holds."""
    if not test:
        raise UsageError("test set must be non-empty")
    tp = fp = tn = fn = 0
    missed = []
    for i, (item, label) in enumerate(test):
        qts = item if isinstance(item, QTS) else qts_from_observation(item, quant_levels)
        predicted = "+" if check(qts, phi) else "-"
        if predicted == "+" and label == "+":
            tp += 1
        elif predicted == "+" and label == "-":
            fp += 1
        elif predicted == "-" and label == "-":
            tn += 1
        else:
            fn += 1
        if predicted != label:
            missed.append(i)
    total = len(test)
    return Metrics((tp + tn) / total, tp, fp, tn, fn,
                   n_rules=n_rules, formula_depth=depth_of(phi), misclassified=missed)
