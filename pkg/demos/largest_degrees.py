"""Largest degrees of a sparse Erdos-Renyi graph against the Delta_k prediction.

Delta_k solves f_d(x) = log(n/k).  The k-th largest degree should sit within
one integer of floor(Delta_k) most of the time.
"""

import numpy as np

from ersparse.graph_model import EdgeProbabilityModel, ordered_degrees, sample_graph
from ersparse.theory import TheoryPredictor

n, d, replicas = 100_000, 2.0, 10
model = EdgeProbabilityModel.homogeneous_mean_degree(n, d)
theory = TheoryPredictor(n, d)

for k in (1, 10, 100):
    delta = theory.delta_k(k).delta
    observed = [int(ordered_degrees(sample_graph(model, 0, r))[k - 1]) for r in range(replicas)]
    hits = np.mean([abs(x - int(delta)) <= 1 for x in observed])
    print(f"k={k:>3}  Delta_k={delta:6.3f}  L_k={theory.l_k(k):6.3f}  observed={observed}  "
          f"in window: {hits:.0%}")

print("\nvertices of degree >= t against n exp(-f_d(t)):")
g = sample_graph(model, 0, 0)
for t in range(4, 9):
    print(f"t={t}  observed={int(np.count_nonzero(g.degrees >= t)):>5}  "
          f"predicted={theory.predicted_tail_count(t):8.1f}")
