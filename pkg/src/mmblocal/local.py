"""Local structure over a blanket: PC-stable skeleton, collider orientation, and
selection of the information that is reliable for the pivot.

Only two kinds of conclusions from a local structure are kept: the edges at
the pivot with their marks, and the arrowheads of colliders that involve the
pivot.  Everything else in the local graph may be an artefact of
marginalising out the rest of the variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from .ci import CiBackend
from .graph import ARROW, CIRCLE, Edge, Mark, MixedGraph, Pag, pair
from .orient import orient_unshielded_colliders_traced

Sepsets = dict


@dataclass
class LocalStructure:
    graph: Pag
    sepsets: Sepsets = field(default_factory=dict)
    vstructures: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def scope(self) -> tuple[str, ...]:
        return self.graph.nodes

    def check(self) -> None:
        """Non-adjacent pairs have a sepset, adjacent pairs have none."""
        for a, b in combinations(self.graph.nodes, 2):
            has = pair(a, b) in self.sepsets
            if self.graph.adjacent(a, b) == has:
                raise AssertionError(f"sepset bookkeeping broken for {a}, {b}")


def learn_skeleton(b: CiBackend, scope: Iterable[str]) -> LocalStructure:
    """PC-stable adjacency search restricted to ``scope``.

    Conditioning sets come from the adjacencies frozen at the start of each
    level; deletions inside a level do not shrink them.  Pairs and subsets are
    visited in backend-index order, so the result does not depend on how
    ``scope`` is ordered.
    """
    nodes = b.sort(set(scope))
    if not nodes:
        raise ValueError("empty scope")
    adj = {v: set(nodes) - {v} for v in nodes}
    sepsets: Sepsets = {}
    level = 0
    while True:
        frozen = {v: b.sort(adj[v]) for v in nodes}
        if not any(len(frozen[a]) - 1 >= level for a in nodes if frozen[a]):
            break
        for a in nodes:
            for c in frozen[a]:
                if c not in adj[a]:
                    continue
                cands = [v for v in frozen[a] if v != c]
                if len(cands) < level:
                    continue
                for s in combinations(cands, level):
                    if b.query(a, c, s).independent:
                        adj[a].discard(c)
                        adj[c].discard(a)
                        sepsets[pair(a, c)] = frozenset(s)
                        break
        level += 1
    g = Pag(nodes)
    for i, a in enumerate(nodes):
        for c in nodes[i + 1:]:
            if c in adj[a]:
                g.add_edge(a, c, CIRCLE, CIRCLE)
    return LocalStructure(g, sepsets)


def orient_v_structures(ls: LocalStructure) -> LocalStructure:
    g, found = orient_unshielded_colliders_traced(ls.graph, ls.sepsets)
    return LocalStructure(Pag.of(g), dict(ls.sepsets), found)


def restrict(ls: LocalStructure, keep: Iterable[str]) -> LocalStructure:
    """Skeleton and sepsets of ``ls`` on a subset of its nodes, marks reset to circles."""
    keep = set(keep)
    sub = ls.graph.subgraph(keep)
    g = Pag(sub.nodes, [(a, b, CIRCLE, CIRCLE) for a, b, _, _ in sub.edges()])
    seps = {k: s for k, s in ls.sepsets.items() if k <= keep}
    return LocalStructure(g, seps)


@dataclass
class PivotInfo:
    """What a local structure is trusted to say about its pivot.

    ``edges`` are the pivot's edges with their local marks.  ``heads`` are
    edges ``(b, a)`` from colliders ``pivot *-> a <-* b`` with ``b`` not
    adjacent to the pivot; only the arrowhead at ``a`` is asserted.
    """

    pivot: str
    edges: list[Edge] = field(default_factory=list)
    heads: list[tuple[str, str]] = field(default_factory=list)
    vstructures: list[tuple[str, str, str]] = field(default_factory=list)

    def as_graph(self) -> MixedGraph:
        g = MixedGraph([self.pivot])
        for a, b, ma, mb in self.edges:
            g.ensure_node(a)
            g.ensure_node(b)
            g.add_edge(a, b, ma, mb)
        for b, a in self.heads:
            g.ensure_node(a)
            g.ensure_node(b)
            if not g.adjacent(a, b):
                g.add_edge(b, a, CIRCLE, ARROW)
        return g

    def marks(self) -> list[tuple[str, str, Optional[Mark], Optional[Mark]]]:
        out: list[tuple[str, str, Optional[Mark], Optional[Mark]]] = list(self.edges)
        out += [(b, a, CIRCLE, ARROW) for b, a in self.heads]
        return out


def select_pivot_info(ls: LocalStructure, pivot: str) -> PivotInfo:
    g = ls.graph
    g._check(pivot)
    edges = []
    for v in g.neighbors(pivot):
        edges.append((pivot, v, g.mark(v, pivot), g.mark(pivot, v)))
    chosen = [t for t in ls.vstructures if pivot in t]
    heads = []
    for a, c, b in chosen:
        if c == pivot:
            continue
        far = b if a == pivot else a
        if (far, c) not in heads:
            heads.append((far, c))
    return PivotInfo(pivot, edges, heads, chosen)


def pc_skeleton(b: CiBackend, nodes: Optional[Iterable[str]] = None) -> LocalStructure:
    """Global PC-stable skeleton, used as the query-count baseline."""
    return learn_skeleton(b, b.nodes if nodes is None else nodes)
