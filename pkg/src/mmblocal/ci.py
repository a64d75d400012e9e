"""Conditional-independence backends with a query counter.

``OracleCI`` answers from m-separation in a MAG (infinite-sample semantics);
``FisherZCI`` runs the Fisher-z partial-correlation test on Gaussian data.
Every query counts, repeated ones included.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .graph import GraphError, MixedGraph, as_mag, m_separated

R_CLAMP = 1.0 - 1e-12
COND_TOL = 1e-12


class CiError(ValueError):
    """A query the backend cannot answer."""


@dataclass(frozen=True)
class CiDecision:
    independent: bool
    statistic: float
    p_value: float


class Dataset:
    """Named real columns with the covariance cached once."""

    def __init__(self, columns: Sequence[str], data):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(columns):
            raise ValueError(f"data shape {data.shape} does not match {len(columns)} columns")
        if len(set(columns)) != len(columns):
            raise ValueError("duplicate column names")
        if not np.all(np.isfinite(data)):
            raise ValueError("data contains missing or non-finite values")
        self.columns = list(columns)
        self.data = data
        self._col = {c: i for i, c in enumerate(self.columns)}
        self._cov: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def col(self, name: str) -> int:
        try:
            return self._col[name]
        except KeyError:
            raise CiError(f"unknown variable: {name}") from None

    @property
    def means(self) -> np.ndarray:
        return self.data.mean(axis=0)

    @property
    def cov(self) -> np.ndarray:
        if self._cov is None:
            if self.n < 2:
                raise CiError("need at least two rows for a covariance")
            self._cov = np.atleast_2d(np.cov(self.data, rowvar=False))
        return self._cov

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.data:
                w.writerow(["%.17g" % x for x in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Dataset":
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows:
            raise ValueError(f"{path}: empty file")
        header, body = rows[0], [r for r in rows[1:] if r]
        try:
            data = np.array([[float(x) for x in r] for r in body], dtype=float)
        except ValueError as e:
            raise ValueError(f"{path}: non-numeric value ({e})") from None
        if body and any(len(r) != len(header) for r in body):
            raise ValueError(f"{path}: ragged rows")
        return cls([h.strip() for h in header], data.reshape(len(body), len(header)))


class CiBackend:
    """Base class; subclasses implement ``_test``."""

    exact = False

    def __init__(self, nodes: Sequence[str]):
        self.nodes = list(nodes)
        self._index = {v: i for i, v in enumerate(self.nodes)}
        self.n_tests = 0

    def index(self, v: str) -> int:
        return self._index[v]

    def sort(self, vs: Iterable[str]) -> list[str]:
        return sorted(vs, key=self._index.__getitem__)

    def query(self, x: str, y: str, z: Iterable[str] = ()) -> CiDecision:
        z = tuple(z)
        if x == y:
            raise CiError("x and y must differ")
        if x in z or y in z:
            raise CiError("x and y must not be in the conditioning set")
        for v in (x, y, *z):
            if v not in self._index:
                raise CiError(f"unknown variable: {v}")
        out = self._test(x, y, z)
        self.n_tests += 1
        return out

    def independent(self, x: str, y: str, z: Iterable[str] = ()) -> bool:
        return self.query(x, y, z).independent

    def _test(self, x: str, y: str, z: tuple[str, ...]) -> CiDecision:
        raise NotImplementedError


class OracleCI(CiBackend):
    """m-separation in a MAG; a DAG plus latents is projected first."""

    exact = True

    def __init__(self, graph: MixedGraph, latents: Sequence[str] = ()):
        self.mag = as_mag(graph, latents)
        super().__init__(self.mag.nodes)

    def _test(self, x, y, z):
        sep = m_separated(self.mag, x, y, z)
        return CiDecision(sep, 0.0, 1.0 if sep else 0.0)


def partial_correlation(cov: np.ndarray, i: int, j: int, cond: Sequence[int]) -> float:
    """Partial correlation of ``i`` and ``j`` given ``cond`` from a covariance matrix."""
    cond = list(cond)
    if not cond:
        den = np.sqrt(cov[i, i] * cov[j, j])
        if den <= 0:
            raise CiError("zero-variance variable")
        return float(cov[i, j] / den)
    c = np.asarray(cond)
    szz = cov[c[:, None], c]
    ev = np.linalg.eigvalsh(szz)
    if ev[0] <= COND_TOL * max(ev[-1], COND_TOL):
        raise CiError("degenerate conditioning set")
    ab = np.array([i, j])
    sxz = cov[ab[:, None], c]
    resid = cov[ab[:, None], ab] - sxz @ np.linalg.solve(szz, sxz.T)
    vi, vj = resid[0, 0], resid[1, 1]
    if vi <= COND_TOL * cov[i, i] or vj <= COND_TOL * cov[j, j]:
        raise CiError("degenerate conditioning set")
    return float(resid[0, 1] / np.sqrt(vi * vj))


def fisher_z(r: float, n: int, k: int) -> float:
    r = min(max(float(r), -R_CLAMP), R_CLAMP)
    return math.sqrt(n - k - 3) * math.atanh(r)


class FisherZCI(CiBackend):
    def __init__(self, data: Dataset, alpha: float = 0.05):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        super().__init__(data.columns)
        self.data = data
        self.alpha = float(alpha)
        self.critical = float(norm.ppf(1.0 - alpha / 2.0))

    def _test(self, x, y, z):
        n, k = self.data.n, len(z)
        if n - k - 3 < 1:
            raise CiError(f"insufficient sample size: n={n} with {k} conditioning variables")
        d = self.data
        r = partial_correlation(d.cov, d.col(x), d.col(y), [d.col(v) for v in z])
        stat = fisher_z(r, n, k)
        # two-sided normal tail, 2 * (1 - Phi(|z|))
        p = math.erfc(abs(stat) / math.sqrt(2.0))
        return CiDecision(abs(stat) <= self.critical, stat, p)


def ci_query(b: CiBackend, x: str, y: str, z: Iterable[str] = ()) -> CiDecision:
    return b.query(x, y, z)


def n_tests(b: CiBackend) -> int:
    return b.n_tests


__all__ = [
    "CiBackend",
    "CiDecision",
    "CiError",
    "Dataset",
    "FisherZCI",
    "GraphError",
    "OracleCI",
    "ci_query",
    "fisher_z",
    "n_tests",
    "partial_correlation",
]
