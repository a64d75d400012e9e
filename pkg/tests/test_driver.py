from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from mmblocal.ci import OracleCI
from mmblocal.driver import (
    DriverState,
    circle_paths_blocked,
    run_mmb_by_mmb,
    stop_r1,
    stop_r2,
    stop_r3,
    stop_r3_arrowhead,
)
from mmblocal.graph import ARROW, CIRCLE, TAIL, MixedGraph, Pag, pag_from_mag
from mmblocal.local import pc_skeleton
from mmblocal.simgen import random_instance


def _target_edges(g, t):
    return {v: (g.mark(v, t), g.mark(t, v)) for v in g.neighbors(t)} if t in g else {}


def _state(result, backend):
    return DriverState(
        result.target,
        backend,
        list(backend.nodes),
        waitlist=deque(result.waitlist),
        donelist=list(result.trace),
        p=result.p,
    )


# -- worked examples -------------------------------------------------------------

def test_fig1_run(fig1_mag):
    b = OracleCI(fig1_mag)
    r = run_mmb_by_mmb(b, None, "V5")
    assert r.stop_rule == "R1"
    assert r.trace == ["V5", "V4"]
    assert r.parents == ["V4"]
    assert r.children == ["V10"]
    assert r.spouses_or_confounded == ["V8"]
    assert r.ambiguous == []
    assert set(r.mmbs["V5"]) == {"V3", "V4", "V7", "V8", "V10", "V12"}
    assert set(r.mmbs["V4"]) == {"V2", "V3", "V5", "V7", "V8", "V11", "V12"}
    assert r.n_tests == b.n_tests


def test_fig1_final_waitlist(fig1_mag):
    b = OracleCI(fig1_mag)
    r = run_mmb_by_mmb(b, None, "V5")
    assert set(r.waitlist) == {"V8", "V10", "V2", "V3"}
    assert not stop_r2(_state(r, b))


def test_fig1_matches_reference_pag(fig1_mag):
    r = run_mmb_by_mmb(OracleCI(fig1_mag), None, "V5")
    assert _target_edges(r.p, "V5") == _target_edges(pag_from_mag(fig1_mag), "V5")


def test_fig1_uses_fewer_queries_than_global_skeleton(fig1_mag):
    local = OracleCI(fig1_mag)
    run_mmb_by_mmb(local, None, "V5")
    glob = OracleCI(fig1_mag)
    pc_skeleton(glob)
    assert local.n_tests < glob.n_tests


def test_fig3_run(fig3_mag):
    r = run_mmb_by_mmb(OracleCI(fig3_mag), None, "T")
    assert r.stop_rule == "R3"
    assert r.trace == ["T"]
    assert _target_edges(r.p, "T") == {"V1": (CIRCLE, ARROW)}
    assert "V3" not in r.trace and "V4" not in r.trace


def test_isolated_target_stops_after_itself():
    g = MixedGraph(["T", "A", "B"], [("A", "B", TAIL, ARROW)])
    r = run_mmb_by_mmb(OracleCI(g), None, "T")
    assert r.stop_rule == "R1"
    assert r.trace == ["T"]
    assert r.p.neighbors("T") == []


def test_unknown_target(fig1_mag):
    with pytest.raises(ValueError):
        run_mmb_by_mmb(OracleCI(fig1_mag), None, "V1")
    with pytest.raises(ValueError):
        run_mmb_by_mmb(OracleCI(fig1_mag), None, "V5", r3="bogus")


# -- stop rules ----------------------------------------------------------------

def test_stop_rules_on_fresh_state(fig1_mag):
    b = OracleCI(fig1_mag)
    s = DriverState("V5", b, list(b.nodes), waitlist=deque(["V5"]), p=Pag(["V5"]))
    assert not stop_r1(s)
    assert not stop_r2(s)
    assert not stop_r3(s)


def test_stop_rules_after_first_pivot(fig1_mag):
    b = OracleCI(fig1_mag)
    r = run_mmb_by_mmb(b, None, "V5", max_pivots=1)
    s = _state(r, b)
    assert r.stop_rule == "limit"
    assert not stop_r1(s)
    # V5 <-o V4: the walk enters unprocessed V4 through a circle
    assert not circle_paths_blocked(s)
    assert not stop_r3(s)


def test_stop_rules_at_fig1_end(fig1_mag):
    b = OracleCI(fig1_mag)
    s = _state(run_mmb_by_mmb(b, None, "V5"), b)
    assert stop_r1(s)
    assert stop_r3(s)  # no circle at the target: vacuously blocked


def test_stop_rules_at_fig3_end(fig3_mag):
    b = OracleCI(fig3_mag)
    s = _state(run_mmb_by_mmb(b, None, "T"), b)
    assert not stop_r1(s)
    assert circle_paths_blocked(s)
    assert stop_r3(s)
    assert stop_r3_arrowhead(s)


def test_stop_r2_when_waitlist_empty():
    g = MixedGraph(["T", "A"], [("T", "A", TAIL, ARROW)])
    b = OracleCI(g)
    s = DriverState("T", b, list(b.nodes), waitlist=deque(), donelist=["T", "A"], p=Pag(["T"]))
    assert stop_r2(s)


def test_r3_needs_a_single_edge_at_the_target():
    # two arrowheads out of the target: blocked, yet not provably final
    p = Pag(["T", "A", "B"], [("T", "A", CIRCLE, ARROW), ("T", "B", CIRCLE, ARROW)])
    b = OracleCI(MixedGraph(["T", "A", "B"]))
    s = DriverState("T", b, ["T", "A", "B"], waitlist=deque(["A", "B"]), donelist=["T"], p=p)
    assert circle_paths_blocked(s)
    assert stop_r3_arrowhead(s)
    assert not stop_r3(s)


@pytest.mark.parametrize("seed", [26, 573, 1376])
def test_arrowhead_reading_of_r3_stops_too_early(seed):
    inst = random_instance(seed)
    truth = pag_from_mag(OracleCI(inst.dag, inst.latents).mag)
    early = run_mmb_by_mmb(OracleCI(inst.dag, inst.latents), None, inst.target, r3="arrowhead")
    full = run_mmb_by_mmb(OracleCI(inst.dag, inst.latents), None, inst.target)
    assert early.stop_rule == "R3"
    assert _target_edges(early.p, inst.target) != _target_edges(truth, inst.target)
    assert _target_edges(full.p, inst.target) == _target_edges(truth, inst.target)


# -- properties ----------------------------------------------------------------

seeds = st.integers(0, 2**31 - 1)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_target_neighbourhood_matches_reference(seed):
    inst = random_instance(seed)
    b = OracleCI(inst.dag, inst.latents)
    r = run_mmb_by_mmb(b, None, inst.target)
    assert _target_edges(r.p, inst.target) == _target_edges(pag_from_mag(b.mag), inst.target)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_termination_and_bookkeeping(seed):
    inst = random_instance(seed)
    b = OracleCI(inst.dag, inst.latents)
    r = run_mmb_by_mmb(b, None, inst.target)
    assert r.stop_rule in ("R1", "R2", "R3")
    assert len(r.trace) <= len(b.nodes)
    assert len(set(r.trace)) == len(r.trace)
    assert not set(r.trace) & set(r.waitlist)
    # pivot edges put neighbours of processed nodes into p, collider heads
    # one step further (the far end of pivot *-> a <-* b)
    done = set(r.trace)
    near = done | {u for v in done for u in r.p.neighbors(v)}
    for v in r.p.nodes:
        assert v in near or any(u in near for u in r.p.neighbors(v))
    groups = [r.parents, r.children, r.ambiguous, r.spouses_or_confounded]
    assert sorted(v for g in groups for v in g) == sorted(r.p.neighbors(inst.target))


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_fragment_grows_monotonically(seed):
    inst = random_instance(seed)
    full = run_mmb_by_mmb(OracleCI(inst.dag, inst.latents), None, inst.target)
    prev = None
    for k in range(1, len(full.trace) + 1):
        r = run_mmb_by_mmb(OracleCI(inst.dag, inst.latents), None, inst.target, max_pivots=k)
        if prev is not None:
            assert set(r.p.neighbors(inst.target)) == set(prev.p.neighbors(inst.target))
            for a, c, ma, mc in prev.p.edges():
                assert r.p.adjacent(a, c)
                if ma is not CIRCLE:
                    assert r.p.mark(c, a) is ma
                if mc is not CIRCLE:
                    assert r.p.mark(a, c) is mc
        prev = r
