"""Linear-Gaussian structural causal models over a DAG, random DAGs, and the
choice of latent variables and targets.

Random streams come from ``numpy.random.default_rng`` seeded with a
``SeedSequence``; independent substreams are derived by spawning keys from a
master seed plus integer coordinates (repetition, sample size, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .ci import Dataset
from .graph import Dag, GraphError, latent_project, topological_order

WEIGHT_LOW = 0.5
WEIGHT_HIGH = 1.0


def rng_for(seed: int, *coords: int) -> np.random.Generator:
    """Generator for the substream of ``seed`` at ``coords``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in coords)))


def derive_seed(seed: int, *coords: int) -> int:
    """A 63-bit integer seed for the substream of ``seed`` at ``coords``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in coords))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class Scm:
    dag: Dag
    weights: dict[tuple[str, str], float]
    noise_std: dict[str, float]
    seed: int = 0

    def weight(self, parent: str, child: str) -> float:
        return self.weights[(parent, child)]


def sample_weights(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform on [-1, -0.5] U [0.5, 1]: fair sign times a uniform magnitude."""
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * rng.uniform(WEIGHT_LOW, WEIGHT_HIGH, size)


def parameterize(dag: Dag, seed: int, noise_std: float = 1.0) -> Scm:
    if noise_std <= 0:
        raise ValueError("noise_std must be positive")
    arcs = [(a, b) if dag.is_directed(a, b) else (b, a) for a, b, _, _ in dag.edges()]
    arcs.sort(key=lambda e: (dag.index(e[0]), dag.index(e[1])))
    w = sample_weights(rng_for(seed, 0), len(arcs))
    return Scm(
        dag=dag,
        weights={e: float(x) for e, x in zip(arcs, w)},
        noise_std={v: float(noise_std) for v in dag.nodes},
        seed=int(seed),
    )


def sample(scm: Scm, n: int, observed: Optional[Sequence[str]] = None, seed: int = 0) -> Dataset:
    """Ancestral sampling; only ``observed`` columns (default all) are kept."""
    if n < 1:
        raise ValueError("n must be at least 1")
    dag = scm.dag
    observed = list(dag.nodes) if observed is None else list(observed)
    for v in observed:
        if v not in dag:
            raise GraphError(f"unknown node: {v}")
    rng = rng_for(seed, 1)
    order = topological_order(dag)
    col = {v: i for i, v in enumerate(dag.nodes)}
    # noise is drawn in node order so the stream does not depend on the sort
    eps = rng.standard_normal((n, len(dag))) * np.array([scm.noise_std[v] for v in dag.nodes])
    x = np.empty((n, len(dag)))
    for v in order:
        acc = eps[:, col[v]].copy()
        for p in dag.parents(v):
            acc += scm.weights[(p, v)] * x[:, col[p]]
        x[:, col[v]] = acc
    return Dataset(observed, x[:, [col[v] for v in observed]])


def random_dag(n_nodes: int, mean_degree: float, seed: int, prefix: str = "V") -> Dag:
    """Erdos-Renyi DAG over a random topological order; nodes ``V1..Vn``."""
    if n_nodes < 2:
        raise ValueError("n_nodes must be at least 2")
    if mean_degree < 0:
        raise ValueError("mean_degree must be non-negative")
    rng = np.random.default_rng(seed)
    nodes = [f"{prefix}{i + 1}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    p = min(1.0, mean_degree / (n_nodes - 1))
    draws = rng.random((n_nodes, n_nodes))
    arcs = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if draws[i, j] < p:
                arcs.append((nodes[order[i]], nodes[order[j]]))
    return Dag.from_arcs(nodes, arcs)


def latent_candidates(dag: Dag) -> list[str]:
    return [v for v in dag.nodes if len(dag.children(v)) >= 2]


def choose_latents(dag: Dag, k: int, rng: np.random.Generator, exclude: Sequence[str] = ()) -> list[str]:
    """Up to ``k`` latents drawn among nodes with two or more children."""
    pool = [v for v in latent_candidates(dag) if v not in set(exclude)]
    k = min(k, len(pool))
    if k == 0:
        return []
    picked = rng.choice(len(pool), size=k, replace=False)
    return dag.sort(pool[i] for i in picked)


def choose_targets(
    dag: Dag, latents: Sequence[str], k: int, min_degree: int, rng: np.random.Generator
) -> list[str]:
    """Up to ``k`` observed targets whose degree in the projected graph is at least ``min_degree``."""
    mag = latent_project(dag, latents)
    pool = [v for v in mag.nodes if mag.degree(v) >= min_degree]
    k = min(k, len(pool))
    if k == 0:
        return []
    picked = rng.choice(len(pool), size=k, replace=False)
    return mag.sort(pool[i] for i in picked)


@dataclass
class Instance:
    """A DAG with latents plus a target, as used by the property suites."""

    dag: Dag
    latents: list[str]
    target: str
    seed: int = 0
    observed: list[str] = field(default_factory=list)


def random_instance(
    seed: int,
    n_range: tuple[int, int] = (8, 15),
    mean_degree_max: float = 3.0,
    max_latents: int = 3,
) -> Instance:
    """Random DAG, 0..max_latents latents among multi-child nodes, uniform observed target."""
    rng = rng_for(seed, 7)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    deg = float(rng.uniform(1.0, mean_degree_max))
    dag = random_dag(n, deg, int(rng.integers(2**32)))
    latents = choose_latents(dag, int(rng.integers(0, max_latents + 1)), rng)
    observed = [v for v in dag.nodes if v not in set(latents)]
    target = observed[int(rng.integers(len(observed)))]
    return Instance(dag, latents, target, seed, observed)
