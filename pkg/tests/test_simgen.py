import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmblocal.graph import Dag, GraphError, latent_project
from mmblocal.simgen import (
    choose_latents,
    choose_targets,
    derive_seed,
    parameterize,
    random_dag,
    random_instance,
    rng_for,
    sample,
    sample_weights,
)

from conftest import FIG1_LATENTS

seeds = st.integers(0, 2**63 - 1)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_weights_in_range(seed):
    scm = parameterize(random_dag(12, 3.0, seed % 2**32), seed)
    w = np.abs(list(scm.weights.values()))
    assert np.all((w >= 0.5) & (w <= 1.0))
    assert set(scm.noise_std.values()) <= {1.0}


def test_parameterize_is_deterministic(fig1_dag):
    one, two = parameterize(fig1_dag, 11), parameterize(fig1_dag, 11)
    assert one.weights == two.weights
    assert parameterize(fig1_dag, 12).weights != one.weights
    assert set(one.weights) == {(u, v) for u in fig1_dag.nodes for v in fig1_dag.children(u)}


def test_weight_sign_balance():
    w = sample_weights(rng_for(0), 100_000)
    assert np.mean(w > 0) == pytest.approx(0.5, abs=0.01)
    assert np.mean((w >= 0.5) & (w <= 1.0)) == pytest.approx(0.5, abs=0.01)
    assert np.all((np.abs(w) >= 0.5) & (np.abs(w) <= 1.0))


def test_noise_std_must_be_positive(fig1_dag):
    with pytest.raises(ValueError):
        parameterize(fig1_dag, 0, noise_std=0.0)


def test_chain_correlation():
    dag = Dag.from_arcs(["x", "y"], [("x", "y")])
    scm = parameterize(dag, 0)
    scm.weights[("x", "y")] = 0.8
    d = sample(scm, 100_000, seed=1)
    r = np.corrcoef(d.data[:, 0], d.data[:, 1])[0, 1]
    assert r == pytest.approx(0.8 / math.sqrt(1 + 0.64), abs=0.01)


def test_sample_shape_and_columns(fig1_dag):
    scm = parameterize(fig1_dag, 3)
    observed = [v for v in fig1_dag.nodes if v not in FIG1_LATENTS]
    d = sample(scm, 1, observed, seed=3)
    assert d.data.shape == (1, 10)
    assert d.columns == observed
    with pytest.raises(ValueError):
        sample(scm, 0)
    with pytest.raises(GraphError):
        sample(scm, 5, ["nope"])


def test_latent_columns_do_not_shift_the_stream(fig1_dag):
    scm = parameterize(fig1_dag, 3)
    full = sample(scm, 50, seed=4)
    part = sample(scm, 50, ["V5", "V2"], seed=4)
    assert np.array_equal(part.data[:, 0], full.data[:, full.columns.index("V5")])


def test_csv_is_byte_identical(tmp_path, fig1_dag):
    paths = []
    for name in ("a.csv", "b.csv"):
        scm = parameterize(fig1_dag, 8)
        sample(scm, 200, seed=8).to_csv(tmp_path / name)
        paths.append(tmp_path / name)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_random_dag_edgeless():
    assert random_dag(10, 0.0, 1).n_edges() == 0


def test_random_dag_edge_count():
    n, deg = 20, 3.0
    counts = [random_dag(n, deg, s).n_edges() for s in range(1000)]
    assert np.mean(counts) == pytest.approx(n * deg / 2, rel=0.05)


@given(st.integers(2, 30), st.floats(0, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_random_dag_is_a_dag(n, deg, seed):
    g = random_dag(n, deg, seed)
    Dag.of(g)
    assert len(g) == n


def test_random_dag_arguments():
    with pytest.raises(ValueError):
        random_dag(1, 1.0, 0)
    with pytest.raises(ValueError):
        random_dag(5, -1.0, 0)


def test_substreams_are_distinct_and_stable():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    assert len({derive_seed(0, k) for k in range(100)}) == 100
    assert 0 <= derive_seed(5, 2, 3) < 2**63
    assert rng_for(1, 2).random() == rng_for(1, 2).random()


def test_latents_have_two_children(fig1_dag):
    lat = choose_latents(fig1_dag, 3, rng_for(0))
    assert len(lat) == 3
    assert all(len(fig1_dag.children(v)) >= 2 for v in lat)
    assert choose_latents(random_dag(5, 0.0, 0), 2, rng_for(0)) == []


def test_targets_respect_degree(fig1_dag):
    ts = choose_targets(fig1_dag, FIG1_LATENTS, 3, 3, rng_for(1))
    mag = latent_project(fig1_dag, FIG1_LATENTS)
    assert ts and all(mag.degree(t) >= 3 for t in ts)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_random_instance_shape(seed):
    inst = random_instance(seed)
    assert 8 <= len(inst.dag) <= 15
    assert len(inst.latents) <= 3
    assert inst.target in inst.observed and inst.target not in inst.latents
    assert random_instance(seed).dag == inst.dag
