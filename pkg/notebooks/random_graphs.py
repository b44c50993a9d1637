"""
Random graphs: Erdos-Renyi against scale-free
=============================================

Both generators keep the same in-degree profile. The scale-free one redraws
parents with weight one plus the current out-degree, which piles children
onto a few hubs.
"""

import numpy as np

from boss.simgen import degree_histogram, er_dag, sf_dag

p, alpha, reps = 100, 10, 100
er_out, sf_out = [], []
for rep in range(reps):
    rng = np.random.default_rng(rep)
    pi = rng.permutation(p)
    er, sf = er_dag(p, pi, alpha, rng), sf_dag(p, pi, alpha, rng)
    er_out.append([len(er.children(v)) for v in range(p)])
    sf_out.append([len(sf.children(v)) for v in range(p)])
er_out, sf_out = np.array(er_out), np.array(sf_out)

print("edges per graph:", er_out.sum(axis=1)[0], "(both kinds)")
print("out-degree bins of width 4, mean fraction of vertices")
print("  bin      ER     SF")
h_er = np.mean([degree_histogram(d) for d in er_out], axis=0)
h_sf = np.mean([degree_histogram(d) for d in sf_out], axis=0)
for k in range(8):
    print(f"  {4 * k:>2}-{4 * k + 3:<3} {h_er[k]:6.3f} {h_sf[k]:6.3f}  {'#' * int(40 * h_sf[k])}")

print("max out-degree  ER", er_out.max(), " SF", sf_out.max())
print("95th percentile ER", np.percentile(er_out, 95), " SF", np.percentile(sf_out, 95))
