"""Top eigenvalues come from stars around the highest-degree vertices.

Splits the graph into disjoint stars centred at vertices of degree >= t plus
a residual graph.  A star with D leaves has eigenvalues +-sqrt(D), and the
extreme eigenvalues of the centered adjacency track sqrt of the top degrees.
"""

import math

from ersparse.graph_model import EdgeProbabilityModel, ordered_degrees, sample_graph
from ersparse.pruning import (decomposition_spectrum_check, residual_norm_check, star_decomposition,
                              threshold_for)
from ersparse.spectral import centered_operator, extreme_eigenvalues

n, d = 50_000, 1.0
model = EdgeProbabilityModel.homogeneous_mean_degree(n, d)
g = sample_graph(model, 0)
t = threshold_for(n, d)
dec = star_decomposition(g, t)
chk = decomposition_spectrum_check(dec)
print(f"threshold t={t}: {dec.centers.size} centers, {len(dec.star_edges)} star edges, "
      f"{len(dec.residual_edges)} residual edges")
print(f"star spectrum vs +-sqrt(D): max discrepancy {chk.discrepancy:.1e}")

rep = extreme_eigenvalues(centered_operator(g, model), 5, 5)
degs = ordered_degrees(g)
print("\n k  lambda_k   -lambda_(n+1-k)  sqrt(D_k)")
for k in range(5):
    print(f"{k + 1:>2}  {rep.top_values[k]:8.4f}  {-rep.bottom_values[k]:8.4f}  "
          f"{math.sqrt(degs[k]):8.4f}")

res = residual_norm_check(g, model, dec)
print(f"\nresidual ||A - E A|| after removing stars: {res.norm:.3f} (max degree {res.d_prime})")
