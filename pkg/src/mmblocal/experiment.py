"""Seeded finite-sample sweeps: repetitions x sample sizes x targets.

Every random choice is drawn from a substream of the master seed, so a spec
fully determines the report.  Repetitions may run in worker processes; the
reduce is ordered by repetition index either way.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .ci import CiError, FisherZCI
from .driver import run_mmb_by_mmb
from .evaluation import Metrics, score_local
from .graph import Dag, GraphError, MixedGraph, latent_project, pag_from_mag, read_graph
from .orient import OrientationConflict
from .simgen import choose_latents, choose_targets, derive_seed, parameterize, random_dag, rng_for, sample

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

ALGORITHM = "MMB-by-MMB"
NETWORK_DIR = Path(__file__).parent / "networks"


@dataclass
class ExperimentSpec:
    # structure: a graph file, or a random DAG when ``network`` is empty
    network: str = ""
    n_nodes: int = 35
    mean_degree: float = 2.0
    latents: list[str] = field(default_factory=list)
    n_latents: int = 0
    targets: list[str] = field(default_factory=list)
    n_targets: int = 1
    min_target_degree: int = 1
    sizes: list[int] = field(default_factory=lambda: [1000])
    repetitions: int = 10
    seed: int = 0
    alpha: float = 0.05
    noise_std: float = 1.0
    r3: str = "sound"
    workers: int = 1

    def validate(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.sizes or any(n < 5 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of integers >= 5")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if set(self.latents) & set(self.targets):
            raise ValueError("a target cannot be latent")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def load_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        raw = json.loads(text)
    else:
        raw = tomllib.loads(text)
    known = {f.name for f in fields(ExperimentSpec)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"{path}: unknown spec keys {unknown}")
    spec = ExperimentSpec(**raw)
    if spec.network and not Path(spec.network).is_absolute():
        candidate = path.parent / spec.network
        if candidate.exists():
            spec.network = str(candidate)
    spec.validate()
    return spec


def resolve_network(name: str) -> Path:
    """A path, or the name of a packaged network (``fig1``, ``fig3``)."""
    p = Path(name)
    if p.exists():
        return p
    packaged = NETWORK_DIR / f"{name}.txt"
    if packaged.exists():
        return packaged
    raise FileNotFoundError(f"no such network: {name}")


@dataclass
class Setup:
    dag: Dag
    latents: list[str]
    targets: list[str]
    truth: MixedGraph

    @property
    def observed(self) -> list[str]:
        return [v for v in self.dag.nodes if v not in set(self.latents)]


def build_setup(spec: ExperimentSpec) -> Setup:
    if spec.network:
        dag = Dag.of(read_graph(resolve_network(spec.network)))
    else:
        dag = random_dag(spec.n_nodes, spec.mean_degree, derive_seed(spec.seed, 0))
    if spec.latents:
        latents = dag.sort(spec.latents)
    else:
        latents = choose_latents(dag, spec.n_latents, rng_for(spec.seed, 1))
    if spec.targets:
        targets = list(spec.targets)
    else:
        targets = choose_targets(dag, latents, spec.n_targets, spec.min_target_degree, rng_for(spec.seed, 2))
        if not targets:
            raise GraphError("no observed node meets min_target_degree")
    mag = latent_project(dag, latents)
    for t in targets:
        if t not in mag:
            raise GraphError(f"target {t} is not an observed node")
    return Setup(dag, latents, targets, pag_from_mag(mag))


@dataclass
class RunRecord:
    repetition: int
    size: int
    target: str
    precision: float
    recall: float
    f1: float
    distance: float
    n_tests: int
    stop_rule: str
    error: str = ""


def _one_repetition(args) -> list[RunRecord]:
    spec, setup, rep = args
    scm = parameterize(setup.dag, derive_seed(spec.seed, 10, rep), spec.noise_std)
    out = []
    for size in spec.sizes:
        data = sample(scm, size, setup.observed, derive_seed(spec.seed, 11, rep, size))
        for t in setup.targets:
            backend = FisherZCI(data, spec.alpha)
            try:
                r = run_mmb_by_mmb(backend, None, t, r3=spec.r3)
            except (CiError, OrientationConflict) as exc:
                out.append(RunRecord(rep, size, t, 0.0, 0.0, 0.0, float(np.sqrt(2.0)), backend.n_tests, "", str(exc)))
                continue
            m: Metrics = score_local(r, setup.truth, t)
            out.append(RunRecord(rep, size, t, m.precision, m.recall, m.f1, m.distance, m.n_tests, r.stop_rule))
    return out


def run_bench(spec: ExperimentSpec, setup: Optional[Setup] = None) -> list[RunRecord]:
    spec.validate()
    setup = setup or build_setup(spec)
    jobs = [(spec, setup, rep) for rep in range(spec.repetitions)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_one_repetition, jobs))
    else:
        chunks = [_one_repetition(j) for j in jobs]
    return [rec for chunk in chunks for rec in chunk]


def _pm(xs: list[float]) -> str:
    return f"{np.mean(xs):.2f}±{np.std(xs):.2f}"


REPORT_COLUMNS = ["Target", "Algorithm", "Size", "Precision", "Recall", "F1", "Distance", "nTest"]


def aggregate(records: list[RunRecord], targets: list[str], sizes: list[int]) -> list[dict[str, str]]:
    """One row per target and size, plus pooled ``all`` rows when there are several targets."""
    groups = [(t, [t]) for t in targets]
    if len(targets) > 1:
        groups.append(("all", list(targets)))
    rows = []
    for label, ts in groups:
        for size in sizes:
            sel = [r for r in records if r.size == size and r.target in ts]
            if not sel:
                continue
            rows.append({
                "Target": label,
                "Algorithm": ALGORITHM,
                "Size": str(size),
                "Precision": _pm([r.precision for r in sel]),
                "Recall": _pm([r.recall for r in sel]),
                "F1": _pm([r.f1 for r in sel]),
                "Distance": _pm([r.distance for r in sel]),
                "nTest": f"{np.mean([r.n_tests for r in sel]):.2f}",
            })
    return rows


def report_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def records_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    names = [f.name for f in fields(RunRecord)]
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = asdict(r)
        for k in ("precision", "recall", "f1", "distance"):
            row[k] = "%.17g" % row[k]
        w.writerow(row)
    return buf.getvalue()


def bench(spec: ExperimentSpec) -> tuple[str, list[RunRecord], Setup]:
    setup = build_setup(spec)
    records = run_bench(spec, setup)
    failed = sum(bool(r.error) for r in records)
    if failed:
        log.warning("%d of %d runs failed; scored as empty predictions", failed, len(records))
    return report_csv(aggregate(records, setup.targets, spec.sizes)), records, setup
