"""Orientation of PAG edge marks: unshielded colliders and the closure under
the arrowhead rules R1-R4 and tail rules R8-R10 (no selection bias, so the
undirected-edge rules R5-R7 never apply and are left out).

``sepsets`` maps ``frozenset({a, b})`` to a separating set of ``a`` and ``b``.
When it is given, a pair counts as non-adjacent only if a separating set was
recorded for it.  On a partial fragment a missing edge is otherwise just
missing information, and reading it as non-adjacency lets R1 fire on
shielded triples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .graph import ARROW, CIRCLE, TAIL, GraphError, Mark, MixedGraph, pair

Sepsets = Mapping[frozenset, frozenset]


class OrientationConflict(GraphError):
    """A rule asked for an arrowhead where a tail is fixed, or vice versa."""


@dataclass(frozen=True)
class RuleStep:
    rule: str
    edge: tuple[str, str]
    old: tuple[Mark, Mark]
    new: tuple[Mark, Mark]


@dataclass
class RuleTrace:
    steps: list[RuleStep] = field(default_factory=list)
    conflicts: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def rules_fired(self) -> list[str]:
        return [s.rule for s in self.steps]


def count_circles(g: MixedGraph) -> int:
    return sum((ma is CIRCLE) + (mb is CIRCLE) for _, _, ma, mb in g.edges())


def marks_determined_at(p: MixedGraph, t: str) -> bool:
    """True when no edge at ``t`` carries a circle at either end."""
    return all(p.mark(v, t) is not CIRCLE and p.mark(t, v) is not CIRCLE for v in p.neighbors(t))


def orient_unshielded_colliders(
    g: MixedGraph, sepsets: Sepsets
) -> MixedGraph:
    """Arrowheads at ``c`` for every unshielded ``a - c - b`` with ``c`` outside
    the separating set of ``a`` and ``b``.  Pairs without a recorded sepset are
    skipped."""
    out, _ = orient_unshielded_colliders_traced(g, sepsets)
    return out


def orient_unshielded_colliders_traced(g: MixedGraph, sepsets: Sepsets):
    out = g.copy()
    found = []
    for c in g.nodes:
        nbrs = g.neighbors(c)
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                if g.adjacent(a, b):
                    continue
                s = sepsets.get(pair(a, b))
                if s is None or c in s:
                    continue
                found.append((a, c, b))
                for u in (a, b):
                    if out.mark(u, c) is CIRCLE:
                        out.set_mark(u, c, ARROW)
    return out, found


class _Closure:
    def __init__(self, p: MixedGraph, sepsets: Optional[Sepsets], strict: bool):
        self.g = p.copy()
        self.sepsets = sepsets
        self.strict = strict
        self.trace = RuleTrace()

    # adjacency helpers
    def nonadjacent(self, a: str, b: str) -> bool:
        if self.g.adjacent(a, b):
            return False
        if self.sepsets is None:
            return True
        return pair(a, b) in self.sepsets

    def orient(self, rule: str, u: str, v: str, at_u: Optional[Mark], at_v: Optional[Mark]) -> bool:
        """Apply new marks to edge ``u - v``; ``None`` leaves that end alone."""
        g = self.g
        old = (g.mark(v, u), g.mark(u, v))
        new = list(old)
        for k, want in ((0, at_u), (1, at_v)):
            if want is None or old[k] is want:
                continue
            if old[k] is not CIRCLE:
                msg = f"{rule} on {u}-{v}: wants {want.value} where {old[k].value} is set"
                if self.strict:
                    raise OrientationConflict(f"inconsistent orientation: {msg}")
                self.trace.conflicts.append(msg)
                continue
            new[k] = want
        if tuple(new) == old:
            return False
        g.set_mark(v, u, new[0])
        g.set_mark(u, v, new[1])
        self.trace.steps.append(RuleStep(rule, (u, v), old, (new[0], new[1])))
        return True

    # R1: a *-> b o-* c, a and c not adjacent  =>  b -> c
    def r1(self) -> bool:
        g = self.g
        changed = False
        for b in g.nodes:
            nbrs = g.neighbors(b)
            for a in nbrs:
                if g.mark(a, b) is not ARROW:
                    continue
                for c in nbrs:
                    if c == a or g.mark(c, b) is not CIRCLE:
                        continue
                    if self.nonadjacent(a, c):
                        changed |= self.orient("R1", b, c, TAIL, ARROW)
        return changed

    # R2: a -> b *-> c or a *-> b -> c, and a *-o c  =>  a *-> c
    def r2(self) -> bool:
        g = self.g
        changed = False
        for a in g.nodes:
            for c in g.neighbors(a):
                if g.mark(a, c) is not CIRCLE:
                    continue
                for b in g.neighbors(a):
                    if b == c or not g.adjacent(b, c):
                        continue
                    chain1 = g.is_directed(a, b) and g.mark(b, c) is ARROW
                    chain2 = g.mark(a, b) is ARROW and g.is_directed(b, c)
                    if chain1 or chain2:
                        changed |= self.orient("R2", a, c, None, ARROW)
                        break
        return changed

    # R3: a *-> b <-* c, a *-o t o-* c, a and c not adjacent, t *-o b  =>  t *-> b
    def r3(self) -> bool:
        g = self.g
        changed = False
        for b in g.nodes:
            for t in g.neighbors(b):
                if g.mark(t, b) is not CIRCLE:
                    continue
                cands = [
                    v for v in g.neighbors(b)
                    if v != t and g.mark(v, b) is ARROW and g.adjacent(v, t) and g.mark(v, t) is CIRCLE
                ]
                done = False
                for i, a in enumerate(cands):
                    for c in cands[i + 1:]:
                        if self.nonadjacent(a, c):
                            changed |= self.orient("R3", t, b, None, ARROW)
                            done = True
                            break
                    if done:
                        break
        return changed

    # R4: discriminating path <d, ..., a, b, c> for b with b o-* c
    def r4(self) -> bool:
        if self.sepsets is None:
            return False
        g = self.g
        changed = False
        for c in g.nodes:
            for b in g.neighbors(c):
                if g.mark(c, b) is not CIRCLE:
                    continue
                for a in g.neighbors(b):
                    if a == c or not g.is_directed(a, c) or g.mark(b, a) is not ARROW:
                        continue
                    d = self._discriminating_start(a, b, c)
                    if d is None:
                        continue
                    s = self.sepsets.get(pair(d, c))
                    if s is None:
                        continue
                    if b in s:
                        changed |= self.orient("R4", b, c, TAIL, ARROW)
                    else:
                        changed |= self.orient("R4", a, b, ARROW, ARROW)
                        changed |= self.orient("R4", b, c, ARROW, ARROW)
                    if g.mark(c, b) is not CIRCLE:
                        break
        return changed

    def _discriminating_start(self, a: str, b: str, c: str) -> Optional[str]:
        """Search back from ``a`` through colliders that are parents of ``c``."""
        g = self.g
        frontier = [a]
        seen = {a, b, c}
        while frontier:
            nxt = []
            for v in frontier:
                for w in g.neighbors(v):
                    if w in seen or g.mark(w, v) is not ARROW:
                        continue
                    if not g.adjacent(w, c):
                        if self.nonadjacent(w, c):
                            return w
                        continue
                    if g.is_directed(w, c) and g.mark(v, w) is ARROW:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        return None

    # R8: a -> b -> c or a -o b -> c, and a o-> c  =>  a -> c
    def r8(self) -> bool:
        g = self.g
        changed = False
        for a in g.nodes:
            for c in g.neighbors(a):
                if g.mark(c, a) is not CIRCLE or g.mark(a, c) is not ARROW:
                    continue
                for b in g.neighbors(a):
                    if b == c or not g.is_directed(b, c):
                        continue
                    if g.mark(b, a) is TAIL and g.mark(a, b) in (ARROW, CIRCLE):
                        changed |= self.orient("R8", a, c, TAIL, None)
                        break
        return changed

    def _pd(self, u: str, v: str) -> bool:
        """Edge ``u - v`` is potentially directed from ``u`` to ``v``."""
        return self.g.mark(v, u) is not ARROW and self.g.mark(u, v) is not TAIL

    def _uncovered_pd_paths(self, a: str, exclude: str):
        """Yield every uncovered potentially directed path starting at ``a``."""
        g = self.g
        path = [a]
        on = {a, exclude}

        def extend():
            v = path[-1]
            for w in g.neighbors(v):
                if w in on or not self._pd(v, w):
                    continue
                if len(path) >= 2 and not self.nonadjacent(path[-2], w):
                    continue
                path.append(w)
                on.add(w)
                yield list(path)
                yield from extend()
                path.pop()
                on.discard(w)

        yield from extend()

    # R9: a o-> c, uncovered p.d. path <a, b, ..., c> with b, c not adjacent  =>  a -> c
    def r9(self) -> bool:
        g = self.g
        changed = False
        for a in g.nodes:
            for c in g.neighbors(a):
                if g.mark(c, a) is not CIRCLE or g.mark(a, c) is not ARROW:
                    continue
                if self._r9_path(a, c):
                    changed |= self.orient("R9", a, c, TAIL, None)
        return changed

    def _r9_path(self, a: str, c: str) -> bool:
        g = self.g
        for b in g.neighbors(a):
            if b == c or not self._pd(a, b) or not self.nonadjacent(b, c):
                continue
            path = [a, b]
            on = {a, b}

            def extend() -> bool:
                v = path[-1]
                for w in g.neighbors(v):
                    if w in on or not self._pd(v, w):
                        continue
                    if not self.nonadjacent(path[-2], w):
                        continue
                    if w == c:
                        return True
                    path.append(w)
                    on.add(w)
                    if extend():
                        return True
                    path.pop()
                    on.discard(w)
                return False

            if extend():
                return True
        return False

    # R10: a o-> c, b -> c <- d, uncovered p.d. paths a..b and a..d whose first
    # steps m, w differ and are not adjacent  =>  a -> c
    def r10(self) -> bool:
        g = self.g
        changed = False
        for a in g.nodes:
            targets = [c for c in g.neighbors(a) if g.mark(c, a) is CIRCLE and g.mark(a, c) is ARROW]
            if not targets:
                continue
            for c in targets:
                pars = [v for v in g.parents(c) if v != a]
                if len(pars) < 2:
                    continue
                firsts: dict[str, set[str]] = {v: set() for v in pars}
                for path in self._uncovered_pd_paths(a, exclude=c):
                    if path[-1] in firsts:
                        firsts[path[-1]].add(path[1])
                hit = False
                for i, b in enumerate(pars):
                    for d in pars[i + 1:]:
                        for m in firsts[b]:
                            for w in firsts[d]:
                                if m != w and self.nonadjacent(m, w):
                                    hit = True
                                    break
                            if hit:
                                break
                        if hit:
                            break
                    if hit:
                        break
                if hit:
                    changed |= self.orient("R10", a, c, TAIL, None)
        return changed

    def run(self) -> None:
        rules = (self.r1, self.r2, self.r3, self.r4, self.r8, self.r9, self.r10)
        changed = True
        while changed:
            changed = False
            for rule in rules:
                changed |= rule()


def rule_closure(
    p: MixedGraph, sepsets: Optional[Sepsets] = None, strict: bool = True
) -> tuple[MixedGraph, RuleTrace]:
    """Apply R1-R4 and R8-R10 to a fixed point; ``p`` is left untouched.

    With ``strict`` a contradicting orientation raises
    :class:`OrientationConflict`; otherwise the existing mark is kept and the
    clash is recorded in ``trace.conflicts``.
    """
    closure = _Closure(p, sepsets, strict)
    closure.run()
    return closure.g, closure.trace
