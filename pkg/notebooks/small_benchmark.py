"""
A small benchmark grid
======================

``run_bench`` does what ``boss bench`` does on the command line: simulate,
search and score each repetition of each cell, each with its own seed.
The grid here is small enough to finish in a few seconds.
"""

from boss.cli import aggregate, format_table, run_bench

records = run_bench(graphs=["er", "sf"], noises=["gaussian", "exponential"], ps=[30],
                    degrees=[2.0, 4.0], reps=3, seed=11, n=500)
print(len(records), "runs")
print(format_table(aggregate(records)))

# per-run rows keep the derived seed, so any single run can be redone
worst = min(records, key=lambda r: r["adj_rec"])
print("lowest adjacency recall:", round(worst["adj_rec"], 3), "in", worst["graph"], worst["noise"],
      "degree", worst["avg_degree"], "seed", worst["seed"])
