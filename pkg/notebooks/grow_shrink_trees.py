"""
Grow-shrink trees on a four variable graph
==========================================

A grow-shrink tree caches, for one target variable, every parent set the
greedy grow step can reach. This walks the tree for ``a`` in the graph
b -> a <- d, c -> b, c -> d under a graphical large-sample score.
"""

from boss import Dag, GrowShrinkTree, oracle_score
from boss.gst import CountingScore, grow_shrink

names = "abcd"
a, b, c, d = range(4)
g = Dag(4, frozenset({(b, a), (d, a), (c, b), (c, d)}))
score = oracle_score(g)

# one tree per target; only the root is scored at construction
tree = GrowShrinkTree(a, score)
print("calls after construction:", tree.score_calls)

# each prefix is the set of variables placed before ``a`` in some order
for prefix in [{b, d}, {c, d}, {c}, {b, c}, {b, c, d}]:
    parents, value = tree.query(prefix)
    label = "".join(sorted(names[u] for u in prefix))
    print(f"prefix {label:>4} -> parents {sorted(names[u] for u in parents)}  score {value:g}"
          f"  (calls so far {tree.score_calls})")

# the same queries again cost nothing
for prefix in [{b, d}, {c, d}, {c}, {b, c}, {b, c, d}]:
    tree.query(prefix)
print("calls after repeating:", tree.score_calls)

# the uncached routine gives the same answers but pays every time
plain = CountingScore(score)
for _ in range(2):
    for prefix in [{b, d}, {c, d}, {c}, {b, c}, {b, c, d}]:
        grow_shrink(plain, a, prefix)
print("uncached calls for the same ten queries:", plain.calls)
