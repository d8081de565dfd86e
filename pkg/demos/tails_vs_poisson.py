"""How close is a sum of rare Bernoulli trials to a Poisson law in the far tail?

Builds the exact law of X = sum of independent Bernoulli(p_i) for a
heterogeneous p, compares P(X = k) with the Poisson mass at the same mean,
and shows the Bennett bound above the exact tail.
"""

import math

import numpy as np

from ersparse.poisson_binomial import bound_reports, exact_pmf

rng = np.random.default_rng(0)
n, d = 20_000, 2.0
p = (d / n) * (1 + 0.5 * rng.uniform(-1, 1, n))
p *= d / p.sum()

law = exact_pmf(p, 40)
print(f"n={n}  d={law.d:.3f}  p_max={law.p_max:.2e}")
print(f"{'k':>3} {'P(X=k)':>11} {'Poisson':>11} {'|ratio-1|':>10} {'P(X>k)':>11} {'Bennett':>11}")
for r in bound_reports(p, [4, 6, 8, 10, 12]):
    print(f"{r.k:>3} {r.exact_pmf:11.3e} {r.poisson_pmf:11.3e} {r.ratio_deviation:10.2e} "
          f"{r.exact_tail:11.3e} {r.bennett_bound:11.3e}")

# the same law far out, where linear probabilities would underflow
print(f"log P(X > 40) = {law.log_tail_at_kmax:.2f}  (about 1e{law.log_tail_at_kmax / math.log(10):.0f})")
