"""MAG Markov blanket discovery by total conditioning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ci import CiBackend


@dataclass(frozen=True)
class MmbResult:
    target: str
    mmb: frozenset

    @property
    def mmb_plus(self) -> frozenset:
        return self.mmb | {self.target}


def tc_mmb(b: CiBackend, observed: Sequence[str], x: str) -> MmbResult:
    """``y`` joins the blanket of ``x`` when the two stay dependent given every
    other observed variable.  Issues exactly ``len(observed) - 1`` queries."""
    observed = list(observed)
    if x not in observed:
        raise ValueError(f"{x} is not an observed variable")
    if len(observed) < 2:
        raise ValueError("need at least two observed variables")
    found = set()
    for y in observed:
        if y == x:
            continue
        rest = [v for v in observed if v != x and v != y]
        if not b.query(x, y, rest).independent:
            found.add(y)
    return MmbResult(x, frozenset(found))
