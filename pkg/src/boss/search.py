"""Best order score search over variable permutations.

A permutation is projected to a DAG by running grow-shrink for every
variable on its prefix (answered by the per-variable Grow-Shrink Trees).
BOSS repeatedly moves each variable to the position that maximises the
projected score, converts the final DAG to its CPDAG and optionally prunes
it with the backward phase of GES.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import Dag, Pdag, consistent_extension, find_compelled, to_cpdag
from .gst import GrowShrinkTree
from .score import score_dag

log = logging.getLogger(__name__)

MAX_SWEEPS = 100
_MASK = (1 << 64) - 1


def derive_seed(base: int, index: int) -> int:
    """Mix ``base`` with ``index`` through the splitmix64 finaliser."""
    z = (int(base) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


class SearchError(RuntimeError):
    """The search failed to converge or violated a monotonicity guarantee."""


class Permutation:
    """An ordering of ``0..p-1`` with constant-time position lookup."""

    __slots__ = ("order", "position")

    def __init__(self, order: Iterable[int]):
        self.order = tuple(int(v) for v in order)
        position = [-1] * len(self.order)
        for i, v in enumerate(self.order):
            if not 0 <= v < len(self.order) or position[v] != -1:
                raise ValueError("order is not a permutation of 0..p-1")
            position[v] = i
        self.position = tuple(position)

    @classmethod
    def identity(cls, p: int) -> "Permutation":
        return cls(range(p))

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.order == other.order

    def __hash__(self):
        return hash(self.order)

    def __repr__(self):
        return f"Permutation({list(self.order)})"

    def index(self, v: int) -> int:
        return self.position[v]

    def move(self, v: int, i: int) -> "Permutation":
        """Remove ``v`` and reinsert it so that it ends up at position ``i``."""
        if not 0 <= i < len(self.order):
            raise IndexError("position out of range")
        rest = [u for u in self.order if u != v]
        rest.insert(i, v)
        return Permutation(rest)

    def prefix(self, v: int) -> frozenset:
        return frozenset(self.order[: self.position[v]])


@dataclass
class SearchConfig:
    penalty_discount: float = 2.0
    use_bes: bool = False
    num_starts: int = 1
    seed: int | None = None
    randomize_initial_order: bool = True
    max_tree_nodes: int | None = None

    def __post_init__(self):
        if self.num_starts < 1:
            raise ValueError("num_starts must be at least 1")
        if not self.penalty_discount > 0:
            raise ValueError("penalty discount must be positive")


class GstForest:
    """One Grow-Shrink Tree per variable over a shared score.

    ``max_tree_nodes`` caps the total number of cached nodes; when exceeded
    every tree is cleared back to its root.
    """

    def __init__(self, score, max_tree_nodes: int | None = None):
        self.score = score
        self.p = score.num_vars
        self.trees = [GrowShrinkTree(v, score, self.p) for v in range(self.p)]
        self.max_tree_nodes = max_tree_nodes
        self._nodes = self.p

    @property
    def score_calls(self) -> int:
        return sum(t.score_calls for t in self.trees)

    def query(self, v: int, prefix) -> tuple[frozenset, float]:
        tree = self.trees[v]
        before = tree.num_nodes
        out = tree.query(prefix)
        if self.max_tree_nodes is not None:
            self._nodes += tree.num_nodes - before
            if self._nodes > self.max_tree_nodes:
                log.debug("clearing %d cached tree nodes", self._nodes)
                for t in self.trees:
                    t.clear()
                self._nodes = self.p
        return out

    def local_results(self, pi: Permutation) -> list[tuple[frozenset, float]]:
        """Grow-shrink result of every variable (indexed by variable) under ``pi``."""
        if len(pi) != self.p:
            raise ValueError("permutation size does not match the score")
        out = [None] * self.p
        prefix: set[int] = set()
        for v in pi.order:
            out[v] = self.query(v, prefix)
            prefix.add(v)
        return out

    def score_perm(self, pi: Permutation) -> float:
        return math.fsum(s for _, s in self.local_results(pi))

    def project(self, pi: Permutation) -> Dag:
        return Dag.from_parents([pa for pa, _ in self.local_results(pi)])


def forest_score(f: GstForest, pi: Permutation) -> float:
    return f.score_perm(pi)


def project(f: GstForest, pi: Permutation) -> Dag:
    return f.project(pi)


def insertion_scores(f: GstForest, pi: Permutation, v: int) -> list[float]:
    """Projected score of ``pi.move(v, k)`` for every position ``k``.

    Moving ``v`` only changes its own prefix and whether ``v`` belongs to the
    prefixes of the other variables, so each variable needs at most two
    queries (with and without ``v`` in its prefix) instead of one per
    position.
    """
    rest = [u for u in pi.order if u != v]
    without_v, with_v, own = [], [], []
    prefix: set[int] = set()
    for u in rest:
        own.append(f.query(v, prefix)[1])
        without_v.append(f.query(u, prefix)[1])
        prefix.add(v)
        with_v.append(f.query(u, prefix)[1])
        prefix.discard(v)
        prefix.add(u)
    own.append(f.query(v, prefix)[1])
    return [math.fsum(without_v[:k] + with_v[k:] + [own[k]]) for k in range(len(rest) + 1)]


def best_move(f: GstForest, pi: Permutation, v: int) -> Permutation:
    """Sweep ``v`` over all positions, keeping a move only on strict improvement."""
    scores = insertion_scores(f, pi, v)
    best = scores[pi.index(v)]
    pos = pi.index(v)
    for k, s in enumerate(scores):
        if best < s:
            best, pos = s, k
    return pi if pos == pi.index(v) else pi.move(v, pos)


def _check_monotone(trace: list[float], value: float, what: str):
    # equivalent DAGs can differ in the last bits of a floating-point BIC
    if trace and value < trace[-1] - 1e-9 * max(1.0, abs(trace[-1])):
        raise SearchError(f"score decreased during {what}: {trace[-1]} -> {value}")
    trace.append(value)


def boss_permutation(f: GstForest, pi: Permutation, trace: list[float] | None = None) -> tuple[Permutation, int]:
    """Best-move sweeps until a full sweep leaves the score unchanged.

    Returns the final permutation and the number of sweeps run.
    """
    trace = [] if trace is None else trace
    sweeps = 0
    while True:
        sweeps += 1
        if sweeps > MAX_SWEEPS:
            raise SearchError(f"no convergence after {MAX_SWEEPS} sweeps")
        best = f.score_perm(pi)
        _check_monotone(trace, best, "sweep")
        for v in list(pi.order):
            moved = best_move(f, pi, v)
            if moved is not pi:
                pi = moved
                _check_monotone(trace, f.score_perm(pi), "best move")
        if f.score_perm(pi) == best:
            return pi, sweeps
        log.debug("sweep %d: %.6f -> %.6f", sweeps, best, f.score_perm(pi))


@dataclass
class BossResult:
    cpdag: Pdag
    dag: Dag
    permutation: Permutation
    score: float
    sweeps: int
    score_trace: list[float] = field(default_factory=list)
    score_calls: int = 0


def initial_permutation(p: int, cfg: SearchConfig, start: int) -> Permutation:
    """Starting order of start ``start``: data order or a shuffle seeded per start."""
    if start == 0 and not cfg.randomize_initial_order:
        return Permutation.identity(p)
    seed = None if cfg.seed is None else derive_seed(cfg.seed, start)
    return Permutation(np.random.default_rng(seed).permutation(p))


def _one_start(score, cfg: SearchConfig, pi: Permutation, f: GstForest) -> BossResult:
    trace: list[float] = []
    pi, sweeps = boss_permutation(f, pi, trace)
    dag = f.project(pi)
    cpdag = find_compelled(dag, pi.order)
    total = f.score_perm(pi)
    if cfg.use_bes:
        cpdag = bes(cpdag, score, trace)
        dag = consistent_extension(cpdag)
        total = score_dag(score, dag)
    return BossResult(cpdag, dag, pi, total, sweeps, trace, f.score_calls)


def _start_worker(args):
    score, cfg, pi = args
    return _one_start(score, cfg, pi, GstForest(score, cfg.max_tree_nodes))


def run_boss(score, cfg: SearchConfig | None = None, initial: Permutation | None = None,
             forest: GstForest | None = None, workers: int = 1) -> BossResult:
    """Run BOSS with ``score`` and return the best result over all starts.

    ``initial`` overrides the first start's permutation. Sequential starts
    share one forest; with ``workers > 1`` starts run in separate processes
    with their own forests. The outcome does not depend on ``workers``.
    """
    cfg = SearchConfig() if cfg is None else cfg
    p = score.num_vars
    starts = [initial_permutation(p, cfg, k) for k in range(cfg.num_starts)]
    if initial is not None:
        starts[0] = initial
    if workers > 1 and len(starts) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_start_worker, [(score, cfg, pi) for pi in starts]))
    else:
        f = GstForest(score, cfg.max_tree_nodes) if forest is None else forest
        results = [_one_start(score, cfg, pi, f) for pi in starts]
    best = None
    for k, result in enumerate(results):
        log.info("start %d: score %.4f after %d sweeps", k, result.score, result.sweeps)
        if best is None or result.score > best.score:
            best = result
    return best


def boss(f: GstForest, pi: Permutation, cfg: SearchConfig | None = None) -> Pdag:
    return run_boss(f.score, cfg, initial=pi, forest=f).cpdag


def _is_clique(nodes: Sequence[int], adj: list[set[int]]) -> bool:
    return all(b in adj[a] for a, b in itertools.combinations(nodes, 2))


def _best_delete(g: Pdag, s):
    p = g.num_vars
    adj = [g.adjacent(v) for v in range(p)]
    nbr = [g.neighbors(v) for v in range(p)]
    par = [g.parents(v) for v in range(p)]
    best = None
    for y in range(p):
        for x in sorted(adj[y]):
            if y in par[x]:
                continue  # y -> x is handled as Delete(y, x) from x's side
            na = sorted(nbr[y] & adj[x])
            for r in range(len(na) + 1):
                for h in itertools.combinations(na, r):
                    keep = [u for u in na if u not in h]
                    if not _is_clique(keep, adj):
                        continue
                    base = set(keep) | par[y]
                    base.discard(x)
                    delta = s.local(y, base) - s.local(y, base | {x})
                    if best is None or delta > best[0]:
                        best = (delta, x, y, h)
    return best


def _apply_delete(g: Pdag, x: int, y: int, h: Iterable[int]) -> Pdag:
    directed = set(g.directed)
    undirected = set(g.undirected)
    directed.discard((x, y))
    directed.discard((y, x))
    undirected.discard((min(x, y), max(x, y)))
    for u in h:
        undirected.discard((min(y, u), max(y, u)))
        directed.add((y, u))
        if (min(x, u), max(x, u)) in undirected:
            undirected.discard((min(x, u), max(x, u)))
            directed.add((x, u))
    return Pdag(g.num_vars, directed, undirected)


def bes(g: Pdag, s, trace: list[float] | None = None) -> Pdag:
    """Backward equivalence search: greedy single-edge deletions on a CPDAG.

    Each round applies the valid Delete(x, y, H) operator with the largest
    score gain (``NA(y, x) - H`` must be a clique) and re-completes the
    result to a CPDAG; stops when no deletion strictly improves the score.
    """
    trace = [] if trace is None else trace
    while True:
        step = _best_delete(g, s)
        if step is None or not step[0] > 0:
            return g
        delta, x, y, h = step
        g = to_cpdag(_apply_delete(g, x, y, h))
        if getattr(s, "score_equivalent", False):
            value = score_dag(s, consistent_extension(g))
        else:
            # extensions of one class score differently; follow the operator gain
            value = (trace[-1] if trace else 0.0) + delta
        _check_monotone(trace, value, "BES delete")
