import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from mmblocal.ci import (
    CiError,
    Dataset,
    FisherZCI,
    OracleCI,
    ci_query,
    fisher_z,
    n_tests,
    partial_correlation,
)
from mmblocal.graph import m_separated
from mmblocal.simgen import parameterize, sample

from conftest import FIG1_LATENTS
from oracles import random_mag


def _gaussian(seed, n, cols):
    rng = np.random.default_rng(seed)
    return Dataset(cols, rng.standard_normal((n, len(cols))))


def _chain_data(seed, n, w=0.8):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = w * x + rng.standard_normal(n)
    z = w * y + rng.standard_normal(n)
    return Dataset(["x", "y", "z"], np.column_stack([x, y, z]))


# -- oracle backend ------------------------------------------------------------

def test_oracle_examples(fig1_dag):
    b = OracleCI(fig1_dag, FIG1_LATENTS)
    assert ci_query(b, "V4", "V8", {"V7"}).independent
    assert not ci_query(b, "V4", "V8", {"V7", "V5"}).independent
    assert n_tests(b) == 2
    assert "V1" not in b.nodes


def test_oracle_decision_fields(fig1_mag):
    b = OracleCI(fig1_mag)
    d = b.query("V4", "V5")
    assert (d.independent, d.statistic, d.p_value) == (False, 0.0, 0.0)
    d = b.query("V9", "V2", ["V8"])
    assert (d.independent, d.p_value) == (True, 1.0)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_oracle_is_m_separation(seed):
    _, _, mag = random_mag(seed, 9, 2.0, 2)
    b = OracleCI(mag)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x, y = rng.choice(mag.nodes, size=2, replace=False)
        z = [v for v in mag.nodes if v not in (x, y) and rng.random() < 0.3]
        assert b.independent(x, y, z) == m_separated(mag, x, y, z)


def test_counter_contract(fig1_mag):
    b = OracleCI(fig1_mag)
    assert n_tests(b) == 0
    for k in range(1, 6):
        b.query("V4", "V9", ["V8"])
        assert n_tests(b) == k


def test_query_preconditions(fig1_mag):
    b = OracleCI(fig1_mag)
    for args in [("V4", "V4", ()), ("V4", "V5", ("V4",)), ("V4", "nope", ())]:
        with pytest.raises(CiError):
            b.query(*args)
    assert n_tests(b) == 0


# -- partial correlation -------------------------------------------------------

def _precision_partial(cov, i, j, cond):
    idx = [i, j, *cond]
    prec = np.linalg.inv(cov[np.ix_(idx, idx)])
    return -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])


def _residual_partial(data, i, j, cond):
    x = data - data.mean(axis=0)
    if cond:
        a = x[:, cond]
        ri = x[:, i] - a @ np.linalg.lstsq(a, x[:, i], rcond=None)[0]
        rj = x[:, j] - a @ np.linalg.lstsq(a, x[:, j], rcond=None)[0]
    else:
        ri, rj = x[:, i], x[:, j]
    return float(ri @ rj / math.sqrt((ri @ ri) * (rj @ rj)))


@given(st.integers(0, 2**31 - 1), st.integers(0, 3))
@settings(max_examples=40, deadline=None)
def test_partial_correlation_matches_two_routes(seed, k):
    rng = np.random.default_rng(seed)
    mix = rng.normal(size=(6, 6))
    data = rng.standard_normal((200, 6)) @ mix
    cov = np.cov(data, rowvar=False)
    cond = list(rng.choice(range(2, 6), size=k, replace=False))
    r = partial_correlation(cov, 0, 1, cond)
    assert r == pytest.approx(_precision_partial(cov, 0, 1, cond), abs=1e-9)
    assert r == pytest.approx(_residual_partial(data, 0, 1, cond), abs=1e-9)


def test_chain_partial_correlation_is_zero_analytically():
    # Var(x)=1, Var(y)=1.64, Var(z)=0.64*1.64+1 for weights 0.8
    w = 0.8
    vy = w * w + 1
    cov = np.array([[1, w, w * w], [w, vy, w * vy], [w * w, w * vy, w * w * vy + 1]])
    assert partial_correlation(cov, 0, 2, [1]) == pytest.approx(0.0, abs=1e-12)


def test_degenerate_conditioning_set():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(100)
    data = Dataset(["x", "y", "a", "b"], np.column_stack([rng.standard_normal(100), rng.standard_normal(100), a, 2 * a]))
    with pytest.raises(CiError, match="degenerate conditioning set"):
        FisherZCI(data).query("x", "y", ["a", "b"])


# -- Fisher-z ------------------------------------------------------------------

def test_fisher_z_formula():
    r, n, k = 0.3, 100, 2
    assert fisher_z(r, n, k) == pytest.approx(math.sqrt(95) * 0.5 * math.log(1.3 / 0.7))
    assert math.isfinite(fisher_z(1.0, 100, 0))


def test_duplicated_column_is_dependent():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(500)
    b = FisherZCI(Dataset(["x", "y"], np.column_stack([x, x])))
    d = b.query("x", "y")
    assert not d.independent
    assert d.p_value == pytest.approx(0.0, abs=1e-12)


def test_critical_value_and_p_value():
    b = FisherZCI(_gaussian(3, 300, ["a", "b", "c"]), alpha=0.05)
    assert b.critical == pytest.approx(norm.ppf(0.975))
    d = b.query("a", "b", ["c"])
    assert d.p_value == pytest.approx(2 * norm.sf(abs(d.statistic)), rel=1e-9)
    assert d.independent == (d.p_value >= 0.05)


def test_insufficient_sample_size():
    b = FisherZCI(_gaussian(0, 6, list("abcdef")))
    b.query("a", "b", ["c", "d"])  # 6 - 2 - 3 = 1 is still allowed
    with pytest.raises(CiError, match="insufficient sample size"):
        b.query("a", "b", ["c", "d", "e"])


def test_alpha_range():
    data = _gaussian(0, 20, ["a", "b"])
    for alpha in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            FisherZCI(data, alpha)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_fisher_z_symmetry(seed):
    b = FisherZCI(_gaussian(seed, 50, list("abcd")))
    d1 = b.query("a", "b", ["c"])
    d2 = b.query("b", "a", ["c"])
    assert d1.statistic == pytest.approx(d2.statistic, abs=1e-12)
    assert d1.independent == d2.independent


def test_chain_calibration():
    hits = 0
    for seed in range(100):
        b = FisherZCI(_chain_data(seed, 5000), alpha=0.05)
        hits += b.independent("x", "z", ["y"])
        assert not b.independent("x", "z")
    assert hits >= 90


def test_null_rejection_rate():
    rejections = sum(not FisherZCI(_gaussian(s, 1000, ["a", "b"]), 0.05).independent("a", "b") for s in range(1000))
    assert 0.03 <= rejections / 1000 <= 0.07


def test_large_sample_agrees_with_oracle(fig1_dag):
    b = OracleCI(fig1_dag, FIG1_LATENTS)
    scm = parameterize(fig1_dag, seed=5)
    data = sample(scm, 50000, b.nodes, seed=5)
    fz = FisherZCI(data, alpha=0.01)
    agree = total = 0
    for i, x in enumerate(b.nodes):
        for y in b.nodes[i + 1:]:
            for z in [()] + [(v,) for v in b.nodes if v not in (x, y)]:
                agree += fz.independent(x, y, z) == b.independent(x, y, z)
                total += 1
    assert agree / total >= 0.95


# -- datasets ------------------------------------------------------------------

def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(["a", "a"], np.zeros((3, 2)))
    with pytest.raises(ValueError):
        Dataset(["a", "b"], np.zeros((3, 3)))
    with pytest.raises(ValueError):
        Dataset(["a"], np.array([[1.0], [np.nan]]))


def test_csv_round_trip(tmp_path):
    d = _gaussian(9, 25, ["a", "b", "c"])
    path = tmp_path / "d.csv"
    d.to_csv(path)
    back = Dataset.from_csv(path)
    assert back.columns == d.columns
    assert np.array_equal(back.data, d.data)


def test_csv_rejects_text(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,x\n")
    with pytest.raises(ValueError):
        Dataset.from_csv(path)

