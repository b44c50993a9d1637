"""Random DAGs and linear SEM data for benchmarking.

Graphs are drawn relative to a vertex ordering ``pi``: every edge points
from an earlier to a later vertex, so the result is acyclic by
construction. Scale-free graphs keep the in-degrees of an Erdos-Renyi draw
and redraw parents by preferential attachment on current out-degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Dag, topological_order

NOISE_FAMILIES = ("gaussian", "gumbel", "exponential")
GRAPH_KINDS = ("er", "sf")


def target_edge_count(p: int, alpha: float) -> int:
    """``round(alpha * p / 2)``, half-up, checked against ``p (p - 1) / 2``."""
    if alpha < 0:
        raise ValueError("average degree must be non-negative")
    m = int(math.floor(alpha * p / 2 + 0.5))
    if m > p * (p - 1) // 2:
        raise ValueError(f"average degree {alpha} needs {m} edges but {p} variables allow {p * (p - 1) // 2}")
    return m


@dataclass
class SimConfig:
    num_vars: int
    avg_degree: float
    n: int = 1000
    noise_family: str = "gaussian"
    graph_kind: str = "er"
    seed: int | None = None

    def __post_init__(self):
        if self.noise_family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.noise_family!r}")
        if self.graph_kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.graph_kind!r}")
        if self.num_vars < 1 or self.n < 2:
            raise ValueError("need at least one variable and two samples")
        target_edge_count(self.num_vars, self.avg_degree)


def er_dag(p: int, pi, alpha: float, rng: np.random.Generator) -> Dag:
    """Erdos-Renyi DAG with exactly ``round(alpha p / 2)`` edges consistent with ``pi``."""
    m = target_edge_count(p, alpha)
    order = list(pi)
    edges = set()
    while len(edges) < m:
        i, j = sorted(rng.choice(p, size=2, replace=False))
        edges.add((order[i], order[j]))
    return Dag(p, frozenset(edges))


def sf_dag(p: int, pi, alpha: float, rng: np.random.Generator) -> Dag:
    """Scale-free DAG: ER in-degrees, parents redrawn with weight ``1 + out-degree``."""
    hidden = er_dag(p, pi, alpha, rng)
    order = list(pi)
    out_degree = np.zeros(p)
    edges = set()
    for i, v in enumerate(order):
        need = len(hidden.parents(v))
        if need == 0:
            continue
        cands = np.array(order[:i])
        chosen: set[int] = set()
        while len(chosen) < need:
            weights = 1.0 + out_degree[cands]
            w = int(rng.choice(cands, p=weights / weights.sum()))
            if w not in chosen:
                chosen.add(w)
                out_degree[w] += 1
                edges.add((w, v))
    return Dag(p, frozenset(edges))


def noise_draw(family: str, sigma: float, rng: np.random.Generator, size=None):
    """Zero-mean noise with standard deviation ``sigma``.

    Gumbel and exponential draws are centred and rescaled from their
    standard forms.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if family == "gaussian":
        return rng.normal(0.0, sigma, size)
    if family == "gumbel":
        return (rng.gumbel(0.0, 1.0, size) - np.euler_gamma) / (math.pi / math.sqrt(6)) * sigma
    if family == "exponential":
        return (rng.exponential(1.0, size) - 1.0) * sigma
    raise ValueError(f"unknown noise family {family!r}")


@dataclass
class SemModel:
    dag: Dag
    beta: dict
    sigma: np.ndarray

    def weight_matrix(self) -> np.ndarray:
        """``B[w, v]`` is the coefficient of ``w`` in the equation for ``v``."""
        b = np.zeros((self.dag.num_vars,) * 2)
        for (w, v), c in self.beta.items():
            b[w, v] = c
        return b

    def implied_covariance(self) -> np.ndarray:
        """Covariance of the unstandardised model, ``(I-B)^-T D (I-B)^-1``."""
        p = self.dag.num_vars
        inv = np.linalg.inv(np.eye(p) - self.weight_matrix())
        return inv.T @ np.diag(self.sigma**2) @ inv


@dataclass
class SemSample:
    data: np.ndarray
    model: SemModel
    column_of: np.ndarray = field(default=None)

    def unshuffled(self) -> np.ndarray:
        """Data with columns back in the original variable order."""
        return self.data[:, self.column_of]


def sample_sem(cfg: SimConfig, dag: Dag, rng: np.random.Generator, order=None,
               standardize: bool = True, shuffle: bool = True) -> SemSample:
    """Simulate ``cfg.n`` rows of a linear SEM on ``dag``.

    Variables are generated along ``order`` (a topological order; default the
    smallest-index-first one), each standardised right after generation.
    ``column_of[v]`` is the column holding original variable ``v`` after the
    final column shuffle.
    """
    p = dag.num_vars
    order = topological_order(dag) if order is None else list(order)
    if order is None:
        raise ValueError("graph has a directed cycle")
    n = cfg.n
    x = np.zeros((n, p))
    sigma = np.zeros(p)
    beta = {}
    for v in order:
        sigma[v] = rng.uniform(1.0, 2.0)
        col = noise_draw(cfg.noise_family, sigma[v], rng, n)
        for w in sorted(dag.parents(v)):
            beta[(w, v)] = rng.uniform(-1.0, 1.0)
            col = col + beta[(w, v)] * x[:, w]
        if standardize:
            col = (col - col.mean()) / col.std()
        x[:, v] = col
    model = SemModel(dag, beta, sigma)
    if not shuffle:
        return SemSample(x, model, np.arange(p))
    perm = rng.permutation(p)  # shuffled column j holds original variable perm[j]
    column_of = np.empty(p, dtype=int)
    column_of[perm] = np.arange(p)
    return SemSample(x[:, perm], model, column_of)


@dataclass
class Simulation:
    config: SimConfig
    dag: Dag
    sample: SemSample


def simulate(cfg: SimConfig) -> Simulation:
    """Draw a graph and a dataset from one seed."""
    rng = np.random.default_rng(cfg.seed)
    pi = rng.permutation(cfg.num_vars)
    make = er_dag if cfg.graph_kind == "er" else sf_dag
    dag = make(cfg.num_vars, pi, cfg.avg_degree, rng)
    sample = sample_sem(cfg, dag, rng, order=pi)
    return Simulation(cfg, dag, sample)


def degree_histogram(degrees, width: int = 4, bins: int = 16) -> np.ndarray:
    """Fraction of vertices per degree bin ``[k*width, (k+1)*width)``."""
    d = np.asarray(degrees)
    counts = np.bincount(np.minimum(d // width, bins - 1), minlength=bins)
    return counts / d.size
