"""Accuracy of an estimated CPDAG against the true graph.

Adjacency counts compare skeletons pair by pair. Orientation counts follow
the arrowhead convention: a true directed edge expects one arrowhead, a
pair with no true arrowhead (absent or undirected) only penalises an
estimated arrowhead.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .graph import Dag, GraphError, Pdag, consistent_extension, find_compelled
from .score import score_dag


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0


@dataclass
class Confusion:
    adjacency: ConfusionCounts
    orientation: ConfusionCounts


def _edge_state(g: Pdag, a: int, b: int) -> str:
    """One of '->' (a to b), '<-', '--' or '' for the pair ``a < b``."""
    if (a, b) in g.directed:
        return "->"
    if (b, a) in g.directed:
        return "<-"
    if (a, b) in g.undirected:
        return "--"
    return ""


def confusion(true_g: Pdag, est_g: Pdag) -> Confusion:
    if true_g.num_vars != est_g.num_vars:
        raise GraphError("graphs have different variable counts")
    adj = ConfusionCounts()
    ori = ConfusionCounts()
    for a, b in itertools.combinations(range(true_g.num_vars), 2):
        t = _edge_state(true_g, a, b)
        e = _edge_state(est_g, a, b)
        if t and e:
            adj.tp += 1
        elif e:
            adj.fp += 1
        elif t:
            adj.fn += 1
        else:
            adj.tn += 1

        if t in ("->", "<-"):
            if e == t:
                ori.tp += 1
                ori.tn += 1
            elif e in ("->", "<-"):
                ori.fp += 1
                ori.fn += 1
            else:
                ori.fn += 1
        elif e in ("->", "<-"):
            ori.fp += 1
    return Confusion(adj, ori)


def precision(c: ConfusionCounts) -> float:
    """``tp / (tp + fp)``; NaN when undefined."""
    d = c.tp + c.fp
    return c.tp / d if d else math.nan


def recall(c: ConfusionCounts) -> float:
    d = c.tp + c.fn
    return c.tp / d if d else math.nan


def precision_recall(c: ConfusionCounts) -> tuple[float, float]:
    return precision(c), recall(c)


def delta_bic(s, true_dag: Dag, est: Pdag) -> float:
    """``score(true) - score(extension of est)``; negative when the estimate scores higher."""
    ext = consistent_extension(est)
    return score_dag(s, true_dag) - score_dag(s, ext)


@dataclass
class EvalReport:
    adj_precision: float
    adj_recall: float
    ori_precision: float
    ori_recall: float
    delta_bic: float
    edge_count: int
    elapsed_seconds: float = math.nan

    FIELDS = ("adj_pre", "adj_rec", "ori_pre", "ori_rec", "delta_bic", "edges", "seconds")

    def row(self) -> tuple:
        return (self.adj_precision, self.adj_recall, self.ori_precision, self.ori_recall,
                self.delta_bic, self.edge_count, self.elapsed_seconds)


def evaluate(true_dag: Dag, est: Pdag, s=None, elapsed_seconds: float = math.nan) -> EvalReport:
    """Metrics of ``est`` against the CPDAG of ``true_dag``; ``s`` enables the BIC difference."""
    c = confusion(find_compelled(true_dag), est)
    dbic = delta_bic(s, true_dag, est) if s is not None else math.nan
    return EvalReport(precision(c.adjacency), recall(c.adjacency),
                      precision(c.orientation), recall(c.orientation),
                      dbic, len(est), elapsed_seconds)


def mean_sd(values) -> tuple[float, float, int]:
    """Mean and sample standard deviation over the defined (non-NaN) values.

    Also returns how many values were used. The deviation is 0 for a
    single value.
    """
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return math.nan, math.nan, 0
    m = math.fsum(vals) / len(vals)
    if len(vals) == 1:
        return m, 0.0, 1
    var = math.fsum((v - m) ** 2 for v in vals) / (len(vals) - 1)
    return m, math.sqrt(var), len(vals)
