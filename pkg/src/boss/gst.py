"""Grow-Shrink Trees: per-variable caches of grow-shrink parent selection.

Each tree node stands for a grown parent set (the variables on its root
path). Expanding a node scores every possible single addition and keeps the
candidates sorted by score (descending, ties by ascending index). A query
walks down from the root taking the best in-prefix child while it strictly
improves, then applies shrink, whose result is cached on the node.

:func:`grow` and :func:`shrink` are the plain, uncached routines; the tree
must reproduce ``shrink(grow(...))`` exactly.
"""
from __future__ import annotations

from typing import Collection, Iterable

import numpy as np


class CountingScore:
    """Wraps a score and counts local evaluations."""

    def __init__(self, score):
        self.score = score
        self.calls = 0

    def local(self, v, parents):
        self.calls += 1
        return self.score.local(v, parents)

    def local_batch(self, v, parents, candidates):
        self.calls += len(candidates)
        return self.score.local_batch(v, parents, candidates)


def _best_addition(score, v, grown, current, candidates):
    """Best-scoring strict improvement among ``candidates`` or ``None``."""
    cand = sorted(candidates)
    if not cand:
        return None
    vals = score.local_batch(v, grown, cand)
    best = None
    best_val = current
    for z, val in zip(cand, vals):
        if val > best_val:
            best, best_val = z, float(val)
    return None if best is None else (best, best_val)


def grow(score, v: int, prefix: Iterable[int]) -> tuple[list[int], float]:
    """Greedy forward selection of parents of ``v`` from ``prefix``.

    Returns the grown set in order of addition and its score. Ties in the
    argmax go to the smallest variable index.
    """
    prefix = set(prefix)
    if v in prefix:
        raise ValueError("prefix contains the target variable")
    grown: list[int] = []
    current = score.local(v, [])
    while True:
        step = _best_addition(score, v, grown, current, prefix.difference(grown))
        if step is None:
            return grown, current
        grown.append(step[0])
        current = step[1]


def shrink(score, v: int, parents: Iterable[int]) -> tuple[frozenset, float]:
    """Greedy backward elimination; removes the best strict improvement each round."""
    w = set(parents)
    current = score.local(v, w)
    while w:
        best = None
        best_val = current
        for u in sorted(w):
            val = score.local(v, w - {u})
            if val > best_val:
                best, best_val = u, val
        if best is None:
            break
        w.discard(best)
        current = best_val
    return frozenset(w), current


def grow_shrink(score, v: int, prefix: Iterable[int]) -> tuple[frozenset, float]:
    grown, _ = grow(score, v, prefix)
    return shrink(score, v, grown)


class GstNode:
    __slots__ = ("added_var", "grown", "grow_score", "child_vars", "child_scores", "_kids", "shrunk")

    def __init__(self, added_var, grown, grow_score):
        self.added_var = added_var
        self.grown = grown  # tuple, in order of addition
        self.grow_score = grow_score
        self.child_vars = None  # sorted candidates once expanded
        self.child_scores = None
        self._kids = {}
        self.shrunk = None

    @property
    def expanded(self) -> bool:
        return self.child_vars is not None

    @property
    def children(self) -> list[tuple[int, float]]:
        if self.child_vars is None:
            return []
        return list(zip(self.child_vars, self.child_scores))

    def child(self, var: int) -> "GstNode":
        node = self._kids.get(var)
        if node is None:
            i = self.child_vars.index(var)
            node = GstNode(var, self.grown + (var,), self.child_scores[i])
            self._kids[var] = node
        return node


class GrowShrinkTree:
    """Cached grow-shrink queries for one target variable."""

    def __init__(self, v: int, score, p: int | None = None):
        self.p = score.num_vars if p is None else p
        if not 0 <= v < self.p:
            raise IndexError("target variable out of range")
        self.target = v
        self.score = score
        self.score_calls = 0
        self.num_nodes = 1
        self.root = GstNode(None, (), self._local([]))

    def _local(self, parents):
        self.score_calls += 1
        return self.score.local(self.target, parents)

    def _expand(self, node: GstNode):
        taken = set(node.grown)
        taken.add(self.target)
        cand = [z for z in range(self.p) if z not in taken]
        vals = self.score.local_batch(self.target, node.grown, cand) if cand else np.empty(0)
        self.score_calls += len(cand)
        order = sorted(range(len(cand)), key=lambda i: (-vals[i], cand[i]))
        node.child_vars = [cand[i] for i in order]
        node.child_scores = [float(vals[i]) for i in order]
        self.num_nodes += len(cand)

    def _shrink(self, node: GstNode):
        if node.shrunk is None:
            w = set(node.grown)
            current = self._local(w)
            while w:
                best = None
                best_val = current
                for u in sorted(w):
                    val = self._local(w - {u})
                    if val > best_val:
                        best, best_val = u, val
                if best is None:
                    break
                w.discard(best)
                current = best_val
            node.shrunk = (frozenset(w), current)
        return node.shrunk

    def query(self, prefix: Collection[int]) -> tuple[frozenset, float]:
        """Grow-shrink result for ``prefix``: ``(parents, local score)``."""
        if self.target in prefix:
            raise ValueError("prefix contains the target variable")
        node = self.root
        while len(node.grown) < len(prefix):
            if node.child_vars is None:
                self._expand(node)
            nxt = None
            floor = node.grow_score
            for var, val in zip(node.child_vars, node.child_scores):
                if not val > floor:
                    break
                if var in prefix:
                    nxt = var
                    break
            if nxt is None:
                break
            node = node.child(nxt)
        return self._shrink(node)

    def clear(self):
        """Drop every cached node except the root."""
        self.root = GstNode(None, (), self.root.grow_score)
        self.num_nodes = 1


def gst_new(v: int, s, p: int | None = None) -> GrowShrinkTree:
    return GrowShrinkTree(v, s, p)


def gst_query(t: GrowShrinkTree, prefix: Collection[int]) -> tuple[frozenset, float]:
    return t.query(prefix)
