import pytest
from hypothesis import given, settings, strategies as st

from mmblocal.ci import OracleCI
from mmblocal.graph import MixedGraph, graph_mmb
from mmblocal.mmb import MmbResult, tc_mmb
from mmblocal.simgen import random_instance


def test_blankets_of_fig1(fig1_mag):
    b = OracleCI(fig1_mag)
    assert tc_mmb(b, b.nodes, "V5").mmb == {"V3", "V4", "V7", "V8", "V10", "V12"}
    assert tc_mmb(b, b.nodes, "V4").mmb == {"V2", "V3", "V5", "V7", "V8", "V11", "V12"}


def test_edgeless_graph_has_empty_blankets():
    b = OracleCI(MixedGraph(["a", "b", "c"]))
    for x in b.nodes:
        assert tc_mmb(b, b.nodes, x).mmb == frozenset()


def test_mmb_plus():
    r = MmbResult("T", frozenset({"A", "B"}))
    assert r.mmb_plus == {"T", "A", "B"}
    assert "T" not in r.mmb


def test_query_count_is_one_per_other_variable(fig1_mag):
    b = OracleCI(fig1_mag)
    for i, x in enumerate(b.nodes, 1):
        tc_mmb(b, b.nodes, x)
        assert b.n_tests == i * (len(b.nodes) - 1)


def test_bad_arguments(fig1_mag):
    b = OracleCI(fig1_mag)
    with pytest.raises(ValueError):
        tc_mmb(b, b.nodes, "V1")
    with pytest.raises(ValueError):
        tc_mmb(b, ["V5"], "V5")


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=200, deadline=None)
def test_total_conditioning_recovers_graph_blanket(seed):
    inst = random_instance(seed, n_range=(6, 12))
    b = OracleCI(inst.dag, inst.latents)
    for x in b.nodes:
        assert tc_mmb(b, b.nodes, x).mmb == graph_mmb(b.mag, x)
