"""Directed and partially directed graphs over dense integer variables.

Variables are the integers ``0..num_vars-1``. Both graph types are immutable
values; every "mutation" helper returns a new graph.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Raised for malformed graphs or invalid graph queries."""


def _check_index(v: int, p: int) -> None:
    if not 0 <= v < p:
        raise GraphError(f"variable {v} out of range for {p} variables")


@dataclass(frozen=True)
class Dag:
    """Directed graph; ``edges`` holds ``(parent, child)`` pairs.

    Acyclicity is not enforced at construction so that cyclic edge sets can
    be represented and rejected by :func:`is_acyclic`.
    """

    num_vars: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            _check_index(a, self.num_vars)
            _check_index(b, self.num_vars)
            if a == b:
                raise GraphError(f"self-loop on {a}")
        object.__setattr__(self, "edges", edges)
        pa = [set() for _ in range(self.num_vars)]
        ch = [set() for _ in range(self.num_vars)]
        for a, b in edges:
            pa[b].add(a)
            ch[a].add(b)
        object.__setattr__(self, "_pa", tuple(frozenset(s) for s in pa))
        object.__setattr__(self, "_ch", tuple(frozenset(s) for s in ch))

    @classmethod
    def from_parents(cls, parent_sets: Sequence[Iterable[int]]) -> "Dag":
        return cls(len(parent_sets), frozenset((w, v) for v, ws in enumerate(parent_sets) for w in ws))

    def parents(self, v: int) -> frozenset:
        _check_index(v, self.num_vars)
        return self._pa[v]

    def children(self, v: int) -> frozenset:
        _check_index(v, self.num_vars)
        return self._ch[v]

    def adjacencies(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.edges)

    def relabel(self, mapping: Sequence[int]) -> "Dag":
        """Return the graph with variable ``i`` renamed to ``mapping[i]``."""
        return Dag(self.num_vars, frozenset((mapping[a], mapping[b]) for a, b in self.edges))

    def __len__(self):
        return len(self.edges)


def parents(g: Dag, v: int) -> frozenset:
    return g.parents(v)


def children(g: Dag, v: int) -> frozenset:
    return g.children(v)


def topological_order(g: Dag) -> list[int] | None:
    """Kahn's algorithm with smallest-index-first; ``None`` if ``g`` has a cycle."""
    import heapq

    indeg = [len(g._pa[v]) for v in range(g.num_vars)]
    heap = [v for v in range(g.num_vars) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g._ch[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return order if len(order) == g.num_vars else None


def is_acyclic(g: Dag) -> bool:
    return topological_order(g) is not None


def d_separated(g: Dag, x: int, y: int, given: Iterable[int]) -> bool:
    """True iff ``x`` and ``y`` are d-separated by ``given`` in ``g``.

    Reachability ("Bayes ball") over (node, direction) states. Only intended
    for the small graphs used by the graphical oracle score and tests.
    """
    z = set(given)
    if x in z or y in z:
        raise GraphError("query variables must not be in the conditioning set")
    if x == y:
        return False
    # ancestors of the conditioning set, for collider activation
    anc = set()
    stack = list(z)
    while stack:
        u = stack.pop()
        if u not in anc:
            anc.add(u)
            stack.extend(g._pa[u])
    # direction: True = arrived from a child (moving up), False = from a parent
    visited = set()
    stack = [(x, True)]
    while stack:
        u, up = stack.pop()
        if (u, up) in visited:
            continue
        visited.add((u, up))
        if u == y:
            return False
        if up:
            if u not in z:
                stack.extend((w, True) for w in g._pa[u])
                stack.extend((w, False) for w in g._ch[u])
        else:
            if u not in z:
                stack.extend((w, False) for w in g._ch[u])
            if u in anc:
                stack.extend((w, True) for w in g._pa[u])
    return True


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph; undirected edges are stored as ``(i, j)`` with ``i < j``."""

    num_vars: int
    directed: frozenset = field(default_factory=frozenset)
    undirected: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        directed = frozenset((int(a), int(b)) for a, b in self.directed)
        undirected = frozenset(_pair(int(a), int(b)) for a, b in self.undirected)
        for a, b in directed | undirected:
            _check_index(a, self.num_vars)
            _check_index(b, self.num_vars)
            if a == b:
                raise GraphError(f"self-loop on {a}")
        dpairs = [_pair(a, b) for a, b in directed]
        if len(set(dpairs)) != len(dpairs):
            raise GraphError("edge directed both ways")
        if set(dpairs) & undirected:
            raise GraphError("pair is both directed and undirected")
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)

    @classmethod
    def from_dag(cls, g: Dag) -> "Pdag":
        return cls(g.num_vars, g.edges, frozenset())

    def adjacencies(self) -> frozenset:
        return frozenset(frozenset(e) for e in self.directed | self.undirected)

    def parents(self, v: int) -> set[int]:
        return {a for a, b in self.directed if b == v}

    def neighbors(self, v: int) -> set[int]:
        """Variables joined to ``v`` by an undirected edge."""
        return {b if a == v else a for a, b in self.undirected if v in (a, b)}

    def adjacent(self, v: int) -> set[int]:
        out = self.neighbors(v)
        out.update(b if a == v else a for a, b in self.directed if v in (a, b))
        return out

    def relabel(self, mapping: Sequence[int]) -> "Pdag":
        return Pdag(
            self.num_vars,
            frozenset((mapping[a], mapping[b]) for a, b in self.directed),
            frozenset((mapping[a], mapping[b]) for a, b in self.undirected),
        )

    def __len__(self):
        return len(self.directed) + len(self.undirected)


def cpdag_equal(x: Pdag, y: Pdag) -> bool:
    if x.num_vars != y.num_vars:
        raise GraphError("graphs have different variable counts")
    return x.directed == y.directed and x.undirected == y.undirected


def find_compelled(g: Dag, order: Sequence[int] | None = None) -> Pdag:
    """Label every edge of ``g`` compelled or reversible and return the CPDAG.

    Chickering's (1995) edge-labelling procedure. Edges are ordered by
    increasing position of the child in ``order`` and, for a fixed child, by
    decreasing position of the parent; the lowest unknown edge is processed
    first. ``order`` must be a topological order of ``g``; when omitted the
    smallest-index-first topological order is used.
    """
    if order is None:
        order = topological_order(g)
        if order is None:
            raise GraphError("graph has a directed cycle")
    order = list(order)
    if sorted(order) != list(range(g.num_vars)):
        raise GraphError("order is not a permutation of the variables")
    pos = {v: i for i, v in enumerate(order)}
    for a, b in g.edges:
        if pos[a] >= pos[b]:
            raise GraphError(f"order is not topological for edge {a}->{b}")

    ranked = sorted(g.edges, key=lambda e: (pos[e[1]], -pos[e[0]]))
    label: dict[tuple[int, int], str | None] = {e: None for e in ranked}
    for x, y in ranked:
        if label[(x, y)] is not None:
            continue
        into_y = [(w, y) for w in g._pa[y]]
        done = False
        for w in g._pa[x]:
            if label[(w, x)] != "compelled":
                continue
            if w not in g._pa[y]:
                for e in into_y:
                    label[e] = "compelled"
                done = True
                break
            label[(w, y)] = "compelled"
        if done:
            continue
        z_exists = any(z != x and z not in g._pa[x] for z in g._pa[y])
        tag = "compelled" if z_exists else "reversible"
        for e in into_y:
            if label[e] is None:
                label[e] = tag

    directed = frozenset(e for e, t in label.items() if t == "compelled")
    undirected = frozenset(_pair(*e) for e, t in label.items() if t == "reversible")
    return Pdag(g.num_vars, directed, undirected)


def consistent_extension(pd: Pdag) -> Dag:
    """Orient the undirected edges of ``pd`` without new v-structures or cycles.

    Dor and Tarsi's sink-elimination procedure; among admissible sinks the
    smallest index is removed first, which makes the result deterministic.
    """
    p = pd.num_vars
    alive = set(range(p))
    directed = set(pd.directed)
    undirected = {frozenset(e) for e in pd.undirected}
    result = set(pd.directed)

    def nbrs(v):
        return {u for e in undirected if v in e for u in e if u != v and u in alive}

    def adj(v):
        out = nbrs(v)
        out.update(b if a == v else a for a, b in directed if v in (a, b) and a in alive and b in alive)
        return out

    while alive:
        for x in sorted(alive):
            if any(a == x and b in alive for a, b in directed):
                continue
            nx_ = nbrs(x)
            ax = adj(x)
            if all(ax - {y} <= adj(y) for y in nx_):
                break
        else:
            raise GraphError("PDAG admits no consistent extension")
        for y in nx_:
            result.add((y, x))
            undirected.discard(frozenset((x, y)))
        alive.discard(x)
    dag = Dag(p, frozenset(result))
    if not is_acyclic(dag):
        raise GraphError("PDAG admits no consistent extension")
    return dag


def to_cpdag(pd: Pdag) -> Pdag:
    """Canonical CPDAG of the equivalence class represented by ``pd``."""
    return find_compelled(consistent_extension(pd))
