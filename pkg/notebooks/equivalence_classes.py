"""
Equivalence classes and backward deletion
=========================================

Several DAGs can encode the same conditional independences. The CPDAG keeps
the edges they agree on directed and leaves the rest undirected.
"""

import numpy as np

from boss import Dag, Pdag, find_compelled
from boss.score import BicScore, CovarianceModel
from boss.search import bes
from boss.graph import consistent_extension


def show(pd):
    arrows = [f"{i}->{j}" for i, j in sorted(pd.directed)]
    lines = [f"{i}--{j}" for i, j in sorted(pd.undirected)]
    return " ".join(arrows + lines) or "(empty)"


# a chain is reversible, a collider is not
print("chain    0->1->2 :", show(find_compelled(Dag(3, frozenset({(0, 1), (1, 2)})))))
print("collider 0->1<-2 :", show(find_compelled(Dag(3, frozenset({(0, 1), (2, 1)})))))

# a collider fixes the edges downstream of it as well
g = Dag(4, frozenset({(0, 2), (1, 2), (2, 3)}))
cp = find_compelled(g)
print("0->2<-1, 2->3    :", show(cp))

# any member of the class can be recovered for scoring
print("one member       :", sorted(consistent_extension(cp).edges))

# Backward deletion. Here 0 and 1 are correlated and 2 is independent of both,
# so the extra edge 0 -- 2 should go.
cov = np.array([[1.0, 0.6, 0.0], [0.6, 1.0, 0.0], [0.0, 0.0, 1.0]])
score = BicScore(CovarianceModel(1000, cov))
start = Pdag(3, frozenset(), frozenset({(0, 1), (0, 2)}))
trace = []
print("before deletion  :", show(start))
print("after deletion   :", show(bes(start, score, trace)), " score", round(trace[-1], 3))
