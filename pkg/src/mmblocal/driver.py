"""Sequential local discovery: process one blanket at a time, starting at the
target, until the marks around the target are settled or provably stuck.

Each pivot ``x`` gets its blanket by total conditioning, a local structure
(reused from an earlier pivot when possible), and contributes only its
trusted information to the accumulated fragment ``p``; the orientation rules
then run on ``p``.  Stop rules:

* R1  every mark on the target's edges is a tail or an arrowhead;
* R2  nothing is left to process;
* R3  every route out of the target through an edge that still has a circle
  ends in an arrowhead, and no later information can reach the target's
  circles (see :func:`stop_r3`).
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .ci import CiBackend
from .graph import ARROW, CIRCLE, TAIL, Mark, Pag, pair
from .local import (
    LocalStructure,
    PivotInfo,
    learn_skeleton,
    orient_v_structures,
    restrict,
    select_pivot_info,
)
from .mmb import MmbResult, tc_mmb
from .orient import RuleTrace, marks_determined_at, orient_unshielded_colliders_traced, rule_closure

log = logging.getLogger(__name__)


@dataclass
class DriverState:
    target: str
    backend: CiBackend
    observed: list[str]
    waitlist: deque = field(default_factory=deque)
    donelist: list[str] = field(default_factory=list)
    p: Pag = field(default_factory=Pag)
    stored_locals: dict[str, LocalStructure] = field(default_factory=dict)
    mmbs: dict[str, MmbResult] = field(default_factory=dict)
    # separations learned by local skeleton searches, and the full-conditioning
    # ones implied by blanket discovery; the former take precedence
    local_sepsets: dict = field(default_factory=dict)
    tc_sepsets: dict = field(default_factory=dict)
    events: list[str] = field(default_factory=list)
    rule_trace: RuleTrace = field(default_factory=RuleTrace)

    def sepsets(self) -> dict:
        out = dict(self.tc_sepsets)
        out.update(self.local_sepsets)
        return out

    def note(self, msg: str) -> None:
        self.events.append(msg)
        log.debug(msg)


@dataclass
class LocalResult:
    target: str
    p: Pag
    parents: list[str]
    children: list[str]
    ambiguous: list[str]
    spouses_or_confounded: list[str]
    stop_rule: str
    n_tests: int
    trace: list[str]
    mmbs: dict[str, list[str]] = field(default_factory=dict)
    events: list[str] = field(default_factory=list)
    branches: list[str] = field(default_factory=list)
    waitlist: list[str] = field(default_factory=list)
    rule_steps: int = 0

    def edges(self) -> list[tuple[str, str, Mark, Mark]]:
        """Edges at the target as ``(target, v, mark_at_target, mark_at_v)``."""
        t = self.target
        return [(t, v, self.p.mark(v, t), self.p.mark(t, v)) for v in self.p.neighbors(t)]

    @property
    def adjacent(self) -> list[str]:
        return self.p.neighbors(self.target)


def stop_r1(state: DriverState) -> bool:
    if state.target not in state.donelist:
        return False
    return marks_determined_at(state.p, state.target)


def stop_r2(state: DriverState) -> bool:
    return len(state.waitlist) == 0


def circle_paths_blocked(state: DriverState) -> bool:
    """Walk out of the target along edges that still carry a circle.  A branch
    ends when it enters a node through an arrowhead; it fails when it enters an
    unprocessed node any other way.  Processed nodes are walked through."""
    p, t = state.p, state.target
    if t not in state.donelist:
        return False
    done = set(state.donelist)
    starts = [v for v in p.neighbors(t) if CIRCLE in (p.mark(v, t), p.mark(t, v))]
    seen = {t}
    stack = []
    for v in starts:
        stack.append((t, v))
    while stack:
        u, w = stack.pop()
        if p.mark(u, w) is ARROW:
            continue
        if w not in done:
            return False
        if w in seen:
            continue
        seen.add(w)
        for x in p.neighbors(w):
            if x != u and x not in seen:
                stack.append((w, x))
    return True


def stop_r3(state: DriverState) -> bool:
    """Circle paths out of the target are blocked by arrowheads, and the
    remaining circles are provably final.

    Every orientation rule that changes a mark at the target uses a second
    neighbour of the target, and an arrowhead never changes.  So a target
    whose only edge is ``t o-> c`` keeps that edge as it is whatever is
    learned later.  With two or more neighbours, arrowheads alone do not
    settle the target: R4 and R9 can reach it along paths that pass through
    arrowheads into unprocessed nodes.
    """
    if not circle_paths_blocked(state):
        return False
    p, t = state.p, state.target
    if marks_determined_at(p, t):
        return True
    nbrs = p.neighbors(t)
    if len(nbrs) != 1:
        return False
    return p.mark(t, nbrs[0]) is ARROW


def stop_r3_arrowhead(state: DriverState) -> bool:
    """The broader reading: blocked circle paths alone.  Faster, but it can
    stop before a circle at the target is resolved; kept for comparison."""
    return circle_paths_blocked(state)


R3_MODES = {"sound": stop_r3, "arrowhead": stop_r3_arrowhead}


def merge_info(state: DriverState, info: PivotInfo) -> None:
    """Add the pivot's trusted marks to ``p``.  A mark already fixed in ``p``
    is kept when the new information disagrees; the clash is logged."""
    p = state.p
    done = set(state.donelist)
    for a, b, ma, mb in info.marks():
        if not p.adjacent(a, b):
            # a processed node's adjacencies were fixed by its own blanket
            settled = [v for v in (a, b) if v in done and v != info.pivot]
            if settled:
                state.note(f"ignored {a}-{b} from pivot {info.pivot}: {settled[0]} already processed")
                continue
            for v in (a, b):
                p.ensure_node(v)
            p.add_edge(a, b, ma, mb)
            continue
        for u, v, m in ((b, a, ma), (a, b, mb)):
            cur = p.mark(u, v)
            if m is CIRCLE or m is cur:
                continue
            if cur is CIRCLE:
                p.set_mark(u, v, m)
            else:
                state.note(f"conflict at {v} on {u}-{v}: kept {cur.value}, pivot {info.pivot} proposed {m.value}")


def _branch_a(state: DriverState, m: MmbResult) -> Optional[tuple[str, LocalStructure]]:
    for y in state.donelist:
        ly = state.stored_locals.get(y)
        if ly is not None and m.mmb_plus <= state.mmbs[y].mmb_plus:
            sub = restrict(ly, m.mmb_plus)
            return y, orient_v_structures(sub)
    return None


def _branch_b(state: DriverState, m: MmbResult) -> Optional[LocalStructure]:
    keep = m.mmb_plus
    sub = state.p.subgraph(keep)
    # members of the blanket that never got into p are isolated here
    for v in state.backend.sort(keep):
        sub.ensure_node(v)
    seps = state.sepsets()
    needed = {}
    nodes = sub.nodes
    for i, a in enumerate(nodes):
        for c in nodes[i + 1:]:
            if sub.adjacent(a, c):
                continue
            s = seps.get(pair(a, c))
            if s is None:
                return None
            needed[pair(a, c)] = s
    oriented, found = orient_unshielded_colliders_traced(sub, needed)
    return LocalStructure(Pag.of(oriented), needed, found)


def run_mmb_by_mmb(
    b: CiBackend,
    observed: Optional[Sequence[str]],
    t: str,
    strict: Optional[bool] = None,
    max_pivots: Optional[int] = None,
    r3: str = "sound",
) -> LocalResult:
    """Learn the edges and marks around ``t``.

    ``strict`` makes orientation clashes raise; it defaults to on for exact
    (oracle) backends, where a clash can only mean a bug.  ``r3`` picks the
    third stop rule, ``"sound"`` or ``"arrowhead"`` (see :func:`stop_r3`).
    """
    if r3 not in R3_MODES:
        raise ValueError(f"unknown r3 mode {r3!r}; expected one of {sorted(R3_MODES)}")
    rules = (("R1", stop_r1), ("R2", stop_r2), ("R3", R3_MODES[r3]))
    observed = list(b.nodes if observed is None else observed)
    if t not in observed:
        raise ValueError(f"target {t} is not observed")
    strict = b.exact if strict is None else strict
    start = b.n_tests
    state = DriverState(t, b, observed, waitlist=deque([t]), p=Pag([t]))
    branches = []
    stop = None
    limit = len(observed) if max_pivots is None else max_pivots
    while state.waitlist and len(state.donelist) < limit:
        x = state.waitlist.popleft()
        m = tc_mmb(b, observed, x)
        state.mmbs[x] = m
        for y in observed:
            if y != x and y not in m.mmb:
                state.tc_sepsets.setdefault(pair(x, y), frozenset(observed) - {x, y})

        ls = None
        hit = _branch_a(state, m)
        if hit is not None:
            y, ls = hit
            branches.append("a")
            state.note(f"{x}: reused the local structure of {y}")
        elif m.mmb <= set(state.donelist):
            ls = _branch_b(state, m)
            if ls is None:
                state.note(f"{x}: fragment lacks a needed sepset, learning afresh")
            else:
                branches.append("b")
        if ls is None:
            ls = orient_v_structures(learn_skeleton(b, m.mmb_plus))
            branches.append("c")
            state.stored_locals[x] = ls
        state.local_sepsets.update(ls.sepsets)

        merge_info(state, select_pivot_info(ls, x))
        seps = state.sepsets()
        # colliders among triples of p whose ends are known to be separated;
        # without them a circle on such a triple would read as a non-collider
        oriented, _ = orient_unshielded_colliders_traced(state.p, seps)
        closed, trace = rule_closure(oriented, seps, strict=strict)
        state.p = Pag.of(closed)
        state.rule_trace.steps += trace.steps
        for c in trace.conflicts:
            state.note(f"closure after {x}: {c}")

        state.donelist.append(x)
        queued = set(state.waitlist) | set(state.donelist)
        for v in b.sort(state.p.neighbors(x)):
            if v not in queued:
                state.waitlist.append(v)

        for name, rule in rules:
            if rule(state):
                stop = name
                break
        if stop:
            break
    if stop is None:
        stop = "R2" if not state.waitlist else "limit"
    return _result(state, stop, b.n_tests - start, branches)


def _result(state: DriverState, stop: str, n: int, branches: list[str]) -> LocalResult:
    p, t = state.p, state.target
    parents, children, ambiguous, spouses = [], [], [], []
    for v in p.neighbors(t):
        at_t, at_v = p.mark(v, t), p.mark(t, v)
        if at_t is ARROW and at_v is TAIL:
            parents.append(v)
        elif at_t is TAIL and at_v is ARROW:
            children.append(v)
        elif at_t is ARROW and at_v is ARROW:
            spouses.append(v)
        else:
            ambiguous.append(v)
    return LocalResult(
        target=t,
        p=p,
        parents=parents,
        children=children,
        ambiguous=ambiguous,
        spouses_or_confounded=spouses,
        stop_rule=stop,
        n_tests=n,
        trace=list(state.donelist),
        mmbs={k: state.backend.sort(v.mmb) for k, v in state.mmbs.items()},
        events=state.events,
        branches=branches,
        waitlist=list(state.waitlist),
        rule_steps=len(state.rule_trace),
    )
