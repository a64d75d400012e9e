"""Scoring a learned neighbourhood against the true PAG at the target.

An edge at the target counts as correct when the true PAG has it and both
endpoint marks agree exactly; a predicted circle is correct only where the
true PAG also has a circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .driver import LocalResult
from .graph import Mark, MixedGraph


@dataclass(frozen=True)
class EdgeJudgment:
    """Marks are ``(mark at target, mark at v)``; ``None`` when the edge is absent."""

    target: str
    v: str
    predicted: Optional[tuple[Mark, Mark]]
    truth: Optional[tuple[Mark, Mark]]

    @property
    def verdict(self) -> bool:
        return self.predicted is not None and self.predicted == self.truth


@dataclass
class Metrics:
    precision: float
    recall: float
    f1: float
    distance: float
    n_tests: int = 0
    n_predicted: int = 0
    n_truth: int = 0
    n_correct: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "distance": self.distance,
            "n_tests": self.n_tests,
            "n_predicted": self.n_predicted,
            "n_truth": self.n_truth,
            "n_correct": self.n_correct,
            "warnings": list(self.warnings),
        }


def f1_score(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def distance(precision: float, recall: float) -> float:
    return math.sqrt((1.0 - recall) ** 2 + (1.0 - precision) ** 2)


def metrics_from_counts(n_correct: int, n_predicted: int, n_truth: int, n_tests: int = 0) -> Metrics:
    warnings = []
    if n_predicted == 0:
        precision = 0.0
        warnings.append("empty prediction: precision set to 0")
    else:
        precision = n_correct / n_predicted
    if n_truth == 0:
        recall = 0.0
        warnings.append("target has no edges in the truth: recall set to 0")
    else:
        recall = n_correct / n_truth
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        distance=distance(precision, recall),
        n_tests=n_tests,
        n_predicted=n_predicted,
        n_truth=n_truth,
        n_correct=n_correct,
        warnings=warnings,
    )


def _at(g: MixedGraph, t: str) -> dict[str, tuple[Mark, Mark]]:
    if t not in g:
        return {}
    return {v: (g.mark(v, t), g.mark(t, v)) for v in g.neighbors(t)}


def judge_edges(pred: MixedGraph, truth: MixedGraph, t: str) -> list[EdgeJudgment]:
    p, q = _at(pred, t), _at(truth, t)
    out = []
    for v in list(p) + [v for v in q if v not in p]:
        out.append(EdgeJudgment(t, v, p.get(v), q.get(v)))
    return out


def score_local(pred: Union[LocalResult, MixedGraph], truth: MixedGraph, t: str, n_tests: Optional[int] = None) -> Metrics:
    graph = pred.p if isinstance(pred, LocalResult) else pred
    if n_tests is None:
        n_tests = pred.n_tests if isinstance(pred, LocalResult) else 0
    judged = judge_edges(graph, truth, t)
    n_pred = sum(j.predicted is not None for j in judged)
    n_truth = sum(j.truth is not None for j in judged)
    n_ok = sum(j.verdict for j in judged)
    return metrics_from_counts(n_ok, n_pred, n_truth, n_tests)
