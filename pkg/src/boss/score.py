"""Decomposable local scores of parent sets.

All scores share one duck-typed interface: ``num_vars``,
``local(v, parents)`` and ``local_batch(v, parents, candidates)``. The batch
form returns the score of ``parents | {z}`` for every candidate ``z`` and is
what grow steps use; implementations must return the same value for a
candidate regardless of which other candidates are requested.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg.lapack import dpotrf, dtrtrs

from .graph import Dag, d_separated, is_acyclic, topological_order

PIVOT_TOL = 1e-10


class DegenerateParentSetError(ArithmeticError):
    """The covariance of a parent set is singular or the residual variance is not positive."""


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Sample size and ``p x p`` covariance (``1/n`` denominator) of a dataset."""

    n: int
    cov: np.ndarray

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] < 1:
            raise ValueError("covariance must be a non-empty square matrix")
        if self.n < 2:
            raise ValueError("need at least two samples")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance is not symmetric")
        cov = (cov + cov.T) / 2
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)

    @property
    def p(self) -> int:
        return self.cov.shape[0]


def covariance_from_data(data) -> CovarianceModel:
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ValueError("data must be a 2-d array")
    if x.shape[0] < 2:
        raise ValueError("need at least two samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / x.shape[0]
    return CovarianceModel(x.shape[0], cov)


def _lower_solve(chol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``chol @ x = rhs`` for lower-triangular ``chol`` (LAPACK trtrs, no input checks)."""
    x, info = dtrtrs(chol, rhs, lower=1)
    if info != 0:
        raise DegenerateParentSetError("singular triangular factor")
    return x


def _canonical(parents: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(int(w) for w in parents))


class BicScore:
    """Linear-Gaussian BIC with a penalty discount.

    ``local(v, W) = -(n/2) ln s2 - (penalty_discount/2) (|W| + 1) ln n`` where
    ``s2`` is the MLE residual variance of ``v`` regressed on ``W``. Constants
    shared by every local score are dropped.
    """

    score_equivalent = True

    def __init__(self, model: CovarianceModel, penalty_discount: float = 2.0):
        if not penalty_discount > 0:
            raise ValueError("penalty discount must be positive")
        self.model = model
        self.penalty_discount = float(penalty_discount)
        self._cov = model.cov
        self._diag = np.diag(model.cov).copy()
        self._half_n = model.n / 2.0
        self._log_n = math.log(model.n)

    @classmethod
    def from_data(cls, data, penalty_discount: float = 2.0) -> "BicScore":
        return cls(covariance_from_data(data), penalty_discount)

    @property
    def num_vars(self) -> int:
        return self.model.p

    def _penalty(self, k: int) -> float:
        return self.penalty_discount / 2.0 * (k + 1) * self._log_n

    def _check(self, v, w):
        p = self.num_vars
        if not 0 <= v < p or any(not 0 <= u < p for u in w):
            raise IndexError("variable index out of range")
        if v in w:
            raise ValueError(f"variable {v} cannot be its own parent")

    def _factor(self, w: tuple[int, ...]) -> np.ndarray:
        idx = list(w)
        sub = self._cov[idx][:, idx]
        d = sub.diagonal()
        chol, info = dpotrf(sub, lower=1, clean=1)
        if info != 0 or chol.diagonal().min() ** 2 <= PIVOT_TOL * d.max():
            raise DegenerateParentSetError(f"degenerate parent set {w}")
        return chol

    def residual_variance(self, v: int, parents: Iterable[int]) -> float:
        w = _canonical(parents)
        self._check(v, w)
        s2 = self._diag[v]
        if w:
            chol = self._factor(w)
            b = _lower_solve(chol, self._cov[list(w), v])
            s2 = s2 - b @ b
        if not s2 > 0:
            raise DegenerateParentSetError(f"non-positive residual variance for {v} given {w}")
        return float(s2)

    def local(self, v: int, parents: Iterable[int]) -> float:
        w = _canonical(parents)
        s2 = self.residual_variance(v, w)
        return -self._half_n * math.log(s2) - self._penalty(len(w))

    def local_batch(self, v: int, parents: Iterable[int], candidates: Sequence[int]) -> np.ndarray:
        """Scores of ``parents | {z}`` for each ``z`` in ``candidates``.

        Uses the rank-one update ``s2(v | W+z) = s2(v | W) - pc(v,z|W)^2 / s2(z | W)``
        computed for all variables at once, then indexed.
        """
        w = _canonical(parents)
        cand = np.asarray(candidates, dtype=int)
        self._check(v, w)
        if cand.size == 0:
            return np.empty(0)
        if v in cand or not set(w).isdisjoint(cand.tolist()):
            raise ValueError("candidates must exclude the target and current parents")
        cov = self._cov
        if w:
            chol = self._factor(w)
            a = _lower_solve(chol, cov[list(w), :])
            rz = self._diag - np.einsum("ij,ij->j", a, a)
            pc = cov[v, :] - a[:, v] @ a
            rv = rz[v]
            maxdiag = np.maximum(self._diag[list(w)].max(), self._diag)
        else:
            rz = self._diag
            pc = cov[v, :]
            rv = self._diag[v]
            maxdiag = self._diag
        rzc = rz[cand]
        if np.any(rzc <= PIVOT_TOL * maxdiag[cand]):
            bad = cand[rzc <= PIVOT_TOL * maxdiag[cand]]
            raise DegenerateParentSetError(f"degenerate parent set {w} + {bad.tolist()}")
        s2 = rv - pc[cand] ** 2 / rzc
        if np.any(s2 <= 0):
            raise DegenerateParentSetError(f"non-positive residual variance for {v} given {w}")
        return -self._half_n * np.log(s2) - self._penalty(len(w) + 1)


class OracleScore:
    """Graphical large-sample stand-in for the BIC of a faithful distribution.

    ``local(v, W) = -big * #{u not in W+v : u d-connected to v given W} - |W|``
    with ``big = p + 1``. Values are exact integers stored as floats. Members
    of one Markov equivalence class need not receive equal totals.
    """

    score_equivalent = False

    def __init__(self, true_dag: Dag):
        self.dag = true_dag
        self.big = true_dag.num_vars + 1
        self._memo: dict[tuple[int, tuple[int, ...]], float] = {}

    @property
    def num_vars(self) -> int:
        return self.dag.num_vars

    def local(self, v: int, parents: Iterable[int]) -> float:
        w = _canonical(parents)
        key = (v, w)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if v in w:
            raise ValueError(f"variable {v} cannot be its own parent")
        ws = set(w)
        connected = sum(
            1
            for u in range(self.num_vars)
            if u != v and u not in ws and not d_separated(self.dag, u, v, ws)
        )
        val = float(-self.big * connected - len(w))
        self._memo[key] = val
        return val

    def local_batch(self, v: int, parents: Iterable[int], candidates: Sequence[int]) -> np.ndarray:
        w = list(parents)
        return np.array([self.local(v, w + [int(z)]) for z in candidates], dtype=float)


def oracle_score(true_dag: Dag) -> OracleScore:
    return OracleScore(true_dag)


def _schur_variance(cov, v, w):
    """Exact residual variance of ``v`` given ``w`` by rational elimination."""
    idx = list(w) + [v]
    m = [[cov[a][b] for b in idx] for a in idx]
    k = len(w)
    for i in range(k):
        piv = m[i][i]
        for r in range(i + 1, k + 1):
            f = m[r][i] / piv
            if f:
                for c in range(i, k + 1):
                    m[r][c] -= f * m[i][c]
    return m[k][k]


class GaussianOracleScore:
    """Large-sample BIC of an exact, faithful linear-Gaussian model of ``true_dag``.

    Edge weights are random rationals and the implied covariance is computed
    exactly, so conditional independences hold exactly (equal residual
    variances give bit-identical scores). The weights are redrawn until every
    d-separation statement of ``true_dag`` matches a vanishing partial
    covariance and vice versa. ``local(v, W) = -(n/2) ln s2(v | W) - |W|``
    with ``n`` chosen so the weakest dependence gains at least ``margin``.
    Intended for small graphs (exhaustive faithfulness check).
    """

    score_equivalent = True

    def __init__(self, true_dag: Dag, seed=None, margin: float = 10.0):
        self.dag = true_dag
        p = true_dag.num_vars
        rng = np.random.default_rng(seed)
        order = topological_order(true_dag)
        if order is None:
            raise ValueError("graph has a directed cycle")
        while True:
            beta = {}
            for e in sorted(true_dag.edges):
                mag = Fraction(int(rng.integers(8, 25)), 16)
                beta[e] = mag if rng.random() < 0.5 else -mag
            cov = [[Fraction(0)] * p for _ in range(p)]
            for i, v in enumerate(order):
                for u in order[:i]:
                    c = sum((b * cov[w][u] for (w, t), b in beta.items() if t == v), Fraction(0))
                    cov[v][u] = cov[u][v] = c
                cov[v][v] = 1 + sum((b * cov[w][v] for (w, t), b in beta.items() if t == v), Fraction(0))
            weakest = None
            faithful = True
            for x, y in itertools.combinations(range(p), 2):
                rest = [u for u in range(p) if u not in (x, y)]
                for r in range(len(rest) + 1):
                    for z in itertools.combinations(rest, r):
                        s_xz = _schur_variance(cov, x, z)
                        s_xzy = _schur_variance(cov, x, z + (y,))
                        independent = s_xz == s_xzy
                        if independent != d_separated(true_dag, x, y, z):
                            faithful = False
                            break
                        if not independent:
                            gain = math.log(s_xz / s_xzy)
                            weakest = gain if weakest is None else min(weakest, gain)
                    if not faithful:
                        break
                if not faithful:
                    break
            if faithful:
                break
        self.cov = cov
        self.beta = beta
        self.n = 2.0 * margin / weakest if weakest else 2.0
        self._memo: dict[tuple[int, tuple[int, ...]], float] = {}

    @property
    def num_vars(self) -> int:
        return self.dag.num_vars

    def local(self, v: int, parents: Iterable[int]) -> float:
        w = _canonical(parents)
        key = (v, w)
        hit = self._memo.get(key)
        if hit is None:
            if v in w:
                raise ValueError(f"variable {v} cannot be its own parent")
            s2 = _schur_variance(self.cov, v, w)
            hit = -self.n / 2 * math.log(s2) - len(w)
            self._memo[key] = hit
        return hit

    def local_batch(self, v: int, parents: Iterable[int], candidates: Sequence[int]) -> np.ndarray:
        w = list(parents)
        return np.array([self.local(v, w + [int(z)]) for z in candidates], dtype=float)


def score_dag(s, g: Dag) -> float:
    """Sum of local scores of each variable given its parents in ``g``.

    ``math.fsum`` makes the total independent of summation order.
    """
    if g.num_vars != s.num_vars:
        raise ValueError("graph and score disagree on the number of variables")
    if not is_acyclic(g):
        raise ValueError("graph has a directed cycle")
    return math.fsum(s.local(v, g.parents(v)) for v in range(g.num_vars))
