"""Mixed graphs (DAG / MAG / PAG) and the purely graphical algorithms on them.

Edges carry one mark per endpoint.  Throughout the package ``g.mark(u, v)``
is the mark sitting at the ``v`` end of the edge ``u - v``, so ``u *-> v``
reads as ``g.mark(u, v) is Mark.ARROW``.
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence


class Mark(str, Enum):
    TAIL = "tail"
    ARROW = "arrow"
    CIRCLE = "circle"


TAIL, ARROW, CIRCLE = Mark.TAIL, Mark.ARROW, Mark.CIRCLE

Edge = tuple[str, str, Mark, Mark]


class GraphError(ValueError):
    """Raised for malformed graphs or violated graph preconditions."""


def pair(a: str, b: str) -> frozenset:
    return frozenset((a, b))


class MixedGraph:
    """Graph whose edges carry a mark at each end.

    Nodes keep their insertion order; that order is the deterministic
    tie-break used by every algorithm in the package.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[Edge] = ()):
        self._nodes: list[str] = []
        self._index: dict[str, int] = {}
        self._marks: dict[str, dict[str, Mark]] = {}
        for v in nodes:
            self.add_node(v)
        for a, b, ma, mb in edges:
            self.add_edge(a, b, ma, mb)

    # -- construction -------------------------------------------------
    def add_node(self, v: str) -> None:
        if v in self._index:
            raise GraphError(f"duplicate node {v!r}")
        self._index[v] = len(self._nodes)
        self._nodes.append(v)
        self._marks[v] = {}

    def ensure_node(self, v: str) -> None:
        if v not in self._index:
            self.add_node(v)

    def add_edge(self, a: str, b: str, mark_at_a: Mark, mark_at_b: Mark) -> None:
        if a == b:
            raise GraphError(f"self-loop on {a!r}")
        self._check(a)
        self._check(b)
        if b in self._marks[a]:
            raise GraphError(f"second edge between {a!r} and {b!r}")
        self._marks[a][b] = Mark(mark_at_b)
        self._marks[b][a] = Mark(mark_at_a)

    def remove_edge(self, a: str, b: str) -> None:
        del self._marks[a][b]
        del self._marks[b][a]

    def set_mark(self, u: str, v: str, m: Mark) -> None:
        """Set the mark at the ``v`` end of edge ``u - v``."""
        if v not in self._marks[u]:
            raise GraphError(f"no edge between {u!r} and {v!r}")
        self._marks[u][v] = Mark(m)

    # -- queries --------------------------------------------------------
    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    def index(self, v: str) -> int:
        self._check(v)
        return self._index[v]

    def __contains__(self, v: object) -> bool:
        return v in self._index

    def __len__(self) -> int:
        return len(self._nodes)

    def _check(self, v: str) -> None:
        if v not in self._index:
            raise GraphError(f"unknown node {v!r}")

    def mark(self, u: str, v: str) -> Mark:
        return self._marks[u][v]

    def adjacent(self, a: str, b: str) -> bool:
        return b in self._marks.get(a, ())

    def neighbors(self, v: str) -> list[str]:
        self._check(v)
        return sorted(self._marks[v], key=self._index.__getitem__)

    def degree(self, v: str) -> int:
        return len(self._marks[v])

    def edges(self) -> Iterator[Edge]:
        """Each edge once as ``(a, b, mark_at_a, mark_at_b)`` with ``a`` first in node order."""
        for a in self._nodes:
            ia = self._index[a]
            for b in self.neighbors(a):
                if self._index[b] > ia:
                    yield a, b, self._marks[b][a], self._marks[a][b]

    def n_edges(self) -> int:
        return sum(len(m) for m in self._marks.values()) // 2

    def is_directed(self, u: str, v: str) -> bool:
        """True for ``u -> v``."""
        m = self._marks[u].get(v)
        return m is ARROW and self._marks[v][u] is TAIL

    def parents(self, v: str) -> list[str]:
        return [u for u in self.neighbors(v) if self.is_directed(u, v)]

    def children(self, v: str) -> list[str]:
        return [u for u in self.neighbors(v) if self.is_directed(v, u)]

    def spouses(self, v: str) -> list[str]:
        return [u for u in self.neighbors(v) if self._marks[u][v] is ARROW and self._marks[v][u] is ARROW]

    def sort(self, vs: Iterable[str]) -> list[str]:
        return sorted(vs, key=self._index.__getitem__)

    # -- copies ---------------------------------------------------------
    def copy(self) -> "MixedGraph":
        g = type(self).__new__(type(self))
        g._nodes = list(self._nodes)
        g._index = dict(self._index)
        g._marks = {v: dict(m) for v, m in self._marks.items()}
        return g

    def subgraph(self, keep: Iterable[str]) -> "MixedGraph":
        keep = set(keep)
        for v in keep:
            self._check(v)
        g = MixedGraph([v for v in self._nodes if v in keep])
        for a, b, ma, mb in self.edges():
            if a in keep and b in keep:
                g.add_edge(a, b, ma, mb)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return set(self._nodes) == set(other._nodes) and self._marks == other._marks

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self)} nodes, {self.n_edges()} edges)"


def _directed_acyclic(g: MixedGraph) -> bool:
    indeg = {v: len(g.parents(v)) for v in g.nodes}
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == len(g)


def topological_order(g: MixedGraph) -> list[str]:
    indeg = {v: len(g.parents(v)) for v in g.nodes}
    queue = deque(v for v in g.nodes if indeg[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for c in g.children(v):
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if len(order) != len(g):
        raise GraphError("directed cycle")
    return order


class Dag(MixedGraph):
    """MixedGraph restricted to tail->arrow edges without directed cycles."""

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[Edge] = ()):
        super().__init__(nodes, edges)
        self.validate()

    @classmethod
    def from_arcs(cls, nodes: Iterable[str], arcs: Iterable[tuple[str, str]]) -> "Dag":
        return cls(nodes, [(u, v, TAIL, ARROW) for u, v in arcs])

    @classmethod
    def of(cls, g: MixedGraph) -> "Dag":
        return cls(g.nodes, g.edges())

    def validate(self) -> None:
        for a, b, ma, mb in self.edges():
            if {ma, mb} != {TAIL, ARROW}:
                raise GraphError(f"edge {a}-{b} is not directed")
        if not _directed_acyclic(self):
            raise GraphError("directed cycle")


class Mag(MixedGraph):
    """Maximal ancestral graph without selection bias (directed and bidirected edges only)."""

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[Edge] = (), check_maximal: bool = True):
        super().__init__(nodes, edges)
        self.validate(check_maximal)

    @classmethod
    def of(cls, g: MixedGraph, check_maximal: bool = True) -> "Mag":
        return cls(g.nodes, g.edges(), check_maximal=check_maximal)

    def validate(self, check_maximal: bool = True) -> None:
        for a, b, ma, mb in self.edges():
            if ma is CIRCLE or mb is CIRCLE:
                raise GraphError(f"edge {a}-{b} carries a circle mark")
            if ma is TAIL and mb is TAIL:
                raise GraphError(f"undirected edge {a}-{b}: selection bias is not supported")
        if not _directed_acyclic(self):
            raise GraphError("directed cycle")
        for a, b, ma, mb in self.edges():
            if ma is ARROW and mb is ARROW:
                if a in ancestors(self, b) or b in ancestors(self, a):
                    raise GraphError(f"almost directed cycle through {a}<->{b}")
        if check_maximal:
            for a, b in combinations(self.nodes, 2):
                if not self.adjacent(a, b) and _mag_inducing_path(self, a, b):
                    raise GraphError(f"not maximal: inducing path between {a} and {b}")


class Pag(MixedGraph):
    """Partial ancestral graph; circle marks are allowed."""

    @classmethod
    def of(cls, g: MixedGraph) -> "Pag":
        return cls(g.nodes, g.edges())


def ancestors(g: MixedGraph, x: str) -> set[str]:
    """Nodes with a directed path into ``x``, including ``x``."""
    g._check(x)
    return ancestors_of_set(g, [x])


def ancestors_of_set(g: MixedGraph, xs: Iterable[str]) -> set[str]:
    out = set(xs)
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in g.parents(v):
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def descendants(g: MixedGraph, x: str) -> set[str]:
    out = {x}
    stack = [x]
    while stack:
        v = stack.pop()
        for c in g.children(v):
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def _check_query(g: MixedGraph, x: str, y: str, z: Iterable[str]) -> frozenset:
    z = frozenset(z)
    for v in (x, y, *z):
        g._check(v)
    if x == y:
        raise GraphError("x and y must differ")
    if x in z or y in z:
        raise GraphError("x and y must not be in the conditioning set")
    return z


def _check_no_circles(g: MixedGraph) -> None:
    for a, b, ma, mb in g.edges():
        if ma is CIRCLE or mb is CIRCLE:
            raise GraphError("m-separation needs a DAG or MAG (circle mark found)")


def m_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """Whether ``z`` m-separates ``x`` and ``y`` in a DAG or MAG.

    Reachability over (node, entered-through-an-arrowhead) states.  A
    collider passes when it is an ancestor of ``z``; a non-collider passes
    when it is outside ``z``.
    """
    z = _check_query(g, x, y, z)
    _check_no_circles(g)
    an_z = ancestors_of_set(g, z)
    marks = g._marks
    start = [(w, marks[x][w] is ARROW) for w in marks[x]]
    seen = set(start)
    stack = list(start)
    while stack:
        v, into_arrow = stack.pop()
        if v == y:
            return False
        in_z = v in z
        in_an = v in an_z
        for w, m_at_w in marks[v].items():
            collider = into_arrow and marks[w][v] is ARROW
            if collider:
                if not in_an:
                    continue
            elif in_z:
                continue
            state = (w, m_at_w is ARROW)
            if state not in seen:
                seen.add(state)
                stack.append(state)
    return True


BRUTEFORCE_LIMIT = 12


def simple_paths(g: MixedGraph, x: str, y: str) -> Iterator[list[str]]:
    path = [x]
    on_path = {x}

    def extend(v):
        for w in g.neighbors(v):
            if w in on_path:
                continue
            if w == y:
                yield path + [y]
                continue
            path.append(w)
            on_path.add(w)
            yield from extend(w)
            path.pop()
            on_path.discard(w)

    yield from extend(x)


def m_separated_bruteforce(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """Definition-level m-separation by enumerating every simple path (test oracle)."""
    if len(g) > BRUTEFORCE_LIMIT:
        raise GraphError(f"graph too large for path enumeration ({len(g)} > {BRUTEFORCE_LIMIT})")
    z = _check_query(g, x, y, z)
    _check_no_circles(g)
    has_desc_in_z = {v: bool(descendants(g, v) & z) for v in g.nodes}
    for path in simple_paths(g, x, y):
        active = True
        for i in range(1, len(path) - 1):
            prev, v, nxt = path[i - 1], path[i], path[i + 1]
            collider = g.mark(prev, v) is ARROW and g.mark(nxt, v) is ARROW
            if collider and not has_desc_in_z[v]:
                active = False
                break
            if not collider and v in z:
                active = False
                break
        if active:
            return False
    return True


def find_inducing_path(dag: MixedGraph, x: str, y: str, latents: Iterable[str] = ()) -> Optional[list[str]]:
    """A path between ``x`` and ``y`` whose inner nodes are latent or colliders,
    with every collider an ancestor of ``x`` or ``y``; ``None`` if there is none."""
    latents = frozenset(latents)
    for v in (x, y, *latents):
        dag._check(v)
    if x == y:
        raise GraphError("x and y must differ")
    if x in latents or y in latents:
        raise GraphError("endpoints must be observed")
    an_xy = ancestors_of_set(dag, (x, y))
    path = [x]
    on_path = {x}

    def extend(v):
        for w in dag.neighbors(v):
            if w in on_path:
                continue
            if len(path) >= 2:
                prev = path[-2]
                collider = dag.mark(prev, v) is ARROW and dag.mark(w, v) is ARROW
                if collider and v not in an_xy:
                    continue
                if not collider and v not in latents:
                    continue
            if w == y:
                return path + [y]
            path.append(w)
            on_path.add(w)
            found = extend(w)
            if found:
                return found
            path.pop()
            on_path.discard(w)
        return None

    return extend(x)


def _mag_inducing_path(mag: MixedGraph, x: str, y: str) -> bool:
    return find_inducing_path(mag, x, y, ()) is not None


def latent_project(dag: MixedGraph, latents: Iterable[str] = ()) -> Mag:
    """The MAG over the observed nodes of ``dag`` once ``latents`` are marginalized."""
    latents = frozenset(latents)
    for v in latents:
        dag._check(v)
    observed = [v for v in dag.nodes if v not in latents]
    anc = {v: ancestors(dag, v) for v in observed}
    edges = []
    for a, b in combinations(observed, 2):
        if dag.adjacent(a, b) or find_inducing_path(dag, a, b, latents) is not None:
            if a in anc[b]:
                edges.append((a, b, TAIL, ARROW))
            elif b in anc[a]:
                edges.append((a, b, ARROW, TAIL))
            else:
                edges.append((a, b, ARROW, ARROW))
    # maximality holds by construction; skip the exponential re-check
    return Mag(observed, edges, check_maximal=False)


def district(g: MixedGraph, x: str) -> set[str]:
    out = {x}
    stack = [x]
    while stack:
        v = stack.pop()
        for s in g.spouses(v):
            if s not in out:
                out.add(s)
                stack.append(s)
    return out


def graph_mmb(mag: MixedGraph, t: str) -> set[str]:
    """MAG Markov blanket of ``t`` read off the graph."""
    mag._check(t)
    children = mag.children(t)
    blanket = set(mag.parents(t)) | set(children)
    for c in children:
        blanket |= set(mag.parents(c))
    districts = set(district(mag, t))
    for c in children:
        districts |= district(mag, c)
    blanket |= districts
    for d in districts:
        blanket |= set(mag.parents(d))
    blanket.discard(t)
    return blanket


def mag_sepset(mag: MixedGraph, a: str, b: str) -> frozenset:
    """A separating set for a non-adjacent pair of a MAG."""
    z = frozenset(ancestors_of_set(mag, (a, b)) - {a, b})
    if m_separated(mag, a, b, z):
        return z
    others = [v for v in mag.nodes if v not in (a, b)]
    for k in range(len(others) + 1):
        for s in combinations(others, k):
            if m_separated(mag, a, b, s):
                return frozenset(s)
    raise GraphError(f"{a} and {b} are not separable")


def pag_from_mag(mag: MixedGraph) -> Pag:
    """The PAG of the Markov equivalence class of ``mag``."""
    from .orient import orient_unshielded_colliders, rule_closure

    skeleton = Pag(mag.nodes, [(a, b, CIRCLE, CIRCLE) for a, b, _, _ in mag.edges()])
    sepsets = {
        pair(a, b): mag_sepset(mag, a, b)
        for a, b in combinations(mag.nodes, 2)
        if not mag.adjacent(a, b)
    }
    oriented = orient_unshielded_colliders(skeleton, sepsets)
    pag, _ = rule_closure(oriented, sepsets)
    return pag


# -- text format ------------------------------------------------------------

def parse_graph(text: str) -> MixedGraph:
    """Read ``A -> B`` / ``A <-> B`` lines, ``node X`` lines and ``#`` comments."""
    g = MixedGraph()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 2 and parts[0] == "node":
            g.ensure_node(parts[1])
            continue
        if len(parts) != 3 or parts[1] not in ("->", "<->", "<-"):
            raise GraphError(f"line {lineno}: cannot parse {raw.strip()!r}")
        a, op, b = parts
        g.ensure_node(a)
        g.ensure_node(b)
        if op == "->":
            g.add_edge(a, b, TAIL, ARROW)
        elif op == "<-":
            g.add_edge(a, b, ARROW, TAIL)
        else:
            g.add_edge(a, b, ARROW, ARROW)
    return g


def read_graph(path: str | Path) -> MixedGraph:
    return parse_graph(Path(path).read_text())


_SYMBOL = {TAIL: "-", ARROW: ">", CIRCLE: "o"}


def format_edge(a: str, b: str, ma: Mark, mb: Mark) -> str:
    left = {TAIL: "-", ARROW: "<", CIRCLE: "o"}[ma]
    return f"{a} {left}-{_SYMBOL[mb]} {b}"


def format_graph(g: MixedGraph) -> str:
    lines = [f"node {v}" for v in g.nodes]
    for a, b, ma, mb in g.edges():
        if (ma, mb) == (TAIL, ARROW):
            lines.append(f"{a} -> {b}")
        elif (ma, mb) == (ARROW, TAIL):
            lines.append(f"{b} -> {a}")
        elif (ma, mb) == (ARROW, ARROW):
            lines.append(f"{a} <-> {b}")
        else:
            raise GraphError("only DAG/MAG edges can be written in the text format")
    return "\n".join(lines) + "\n"


def as_mag(g: MixedGraph, latents: Sequence[str] = ()) -> Mag:
    """Interpret a parsed network: a DAG is projected over ``latents``, a graph
    with bidirected edges is taken as a MAG already."""
    if any(ma is ARROW and mb is ARROW for _, _, ma, mb in g.edges()):
        if latents:
            raise GraphError("latents can only be given for a DAG")
        return Mag.of(g)
    return latent_project(Dag.of(g), latents)
