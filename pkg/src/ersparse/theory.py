"""Deterministic predictors and bounds for sparse inhomogeneous random graphs.

Everything here is a pure function of its arguments: the Bennett rate ``h``,
the degree rate function ``f_d``, the eigenvalue predictor ``L_k``, the
degree location ``Delta_k`` and a few explicit bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoSolutionError

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def bennett_h(x, clamp=False):
    """``h(x) = (1 + x) log(1 + x) - x``, vectorised.

    With ``clamp=True`` the argument is replaced by its positive part first,
    which is the form used in the Lindeberg comparison bound.
    """
    x = np.asarray(x, dtype=float)
    if clamp:
        x = np.maximum(x, 0.0)
    elif np.any(x < -1.0):
        raise DomainError("bennett_h is defined for x >= -1")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x == -1.0, 1.0, (1.0 + x) * np.log1p(x) - x)
    return float(out) if out.ndim == 0 else out


def f_d(x, d):
    """Degree rate function ``x log(x/d) - (x - d) + log sqrt(2 pi x)``.

    ``exp(-f_d(k))`` is the Stirling form of the Poisson(d) mass at ``k``, so
    ``n exp(-f_d(t))`` approximates the number of vertices of degree at least
    ``t``.  The function is strictly increasing on ``(d, inf)``.
    """
    x = np.asarray(x, dtype=float)
    if d <= 0 or np.any(x <= 0):
        raise DomainError("f_d needs x > 0 and d > 0")
    out = x * np.log(x / d) - (x - d) + 0.5 * np.log(x) + _HALF_LOG_2PI
    return float(out) if out.ndim == 0 else out


def f_d_prime(x, d):
    return math.log(x / d) + 0.5 / x


@dataclass(frozen=True)
class DeltaSolution:
    k: int
    delta: float
    residual: float
    iterations: int


class TheoryPredictor:
    """Predictors for a graph on ``n`` vertices with maximal mean degree ``d``."""

    def __init__(self, n, d):
        if n < 2:
            raise DomainError("need n >= 2")
        if d <= 0:
            raise DomainError("need d > 0")
        self.n = int(n)
        self.d = float(d)
        self.log_n = math.log(n)
        self.log_log_ratio = math.log(self.log_n / self.d)

    def __repr__(self):
        return f"TheoryPredictor(n={self.n}, d={self.d:g})"

    def _check_rank(self, k):
        if not 1 <= k <= self.n:
            raise DomainError(f"rank k={k} outside [1, {self.n}]")

    def l_k(self, k):
        """``log(n/k) / log(log(n)/d)``; needs ``d < log n``."""
        self._check_rank(k)
        if self.log_log_ratio <= 0:
            raise DomainError(f"d={self.d:g} >= log n={self.log_n:g}")
        return math.log(self.n / k) / self.log_log_ratio

    def predicted_eigenvalue(self, k):
        """Predicted size ``sqrt(L_k)`` of the k-th extreme eigenvalue of ``A - E[A]``."""
        return math.sqrt(self.l_k(k))

    def f(self, x):
        return f_d(x, self.d)

    def delta_k(self, k, tol=1e-10, bracket=None, max_iter=200):
        """Root ``Delta >= d`` of ``f_d(Delta) = log(n/k)``.

        Bisection until the bracket has width 1, then Newton steps kept inside
        the bracket.  ``bracket`` overrides the starting interval; it is
        widened by doubling until it contains the root.
        """
        self._check_rank(k)
        target = math.log(self.n / k)
        d = self.d
        lo_val = f_d(d, d)
        if lo_val >= target:
            raise NoSolutionError(
                f"f_d(d)={lo_val:.6g} >= log(n/k)={target:.6g}: no root above d",
                boundary_value=lo_val)
        if bracket is None:
            guess = target / self.log_log_ratio if self.log_log_ratio > 0 else target
            lo, hi = d, max(2.0 * d, 8.0 * guess, d + 1.0)
        else:
            lo, hi = max(float(bracket[0]), d), max(float(bracket[1]), d)
        it = 0
        if f_d(lo, d) > target:
            lo = d
        while f_d(hi, d) <= target:
            lo, hi = hi, 2.0 * hi
            it += 1
        while hi - lo > 1.0:
            mid = 0.5 * (lo + hi)
            if f_d(mid, d) > target:
                hi = mid
            else:
                lo = mid
            it += 1
        x = 0.5 * (lo + hi)
        g = f_d(x, d) - target
        while abs(g) > tol and it < max_iter:
            if g > 0:
                hi = x
            else:
                lo = x
            step = x - g / f_d_prime(x, d)
            x = step if lo < step < hi else 0.5 * (lo + hi)
            g = f_d(x, d) - target
            it += 1
            if hi - lo <= 4 * np.finfo(float).eps * hi:
                break
        return DeltaSolution(int(k), x, abs(g), it)

    def predicted_tail_count(self, t):
        """``n exp(-f_d(t))``, the predicted number of vertices of degree ``>= t``."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= self.d):
            raise DomainError("predicted_tail_count needs t > d")
        out = np.exp(self.log_n - f_d(t, self.d))
        return float(out) if np.ndim(out) == 0 else out

    def edge_density(self, x):
        """``2 log(n) n^(1-x^2) x``: density of edge eigenvalues rescaled by ``sqrt(L_1)``.

        It integrates to ``n - 1`` over ``(0, 1)``.
        """
        x = np.asarray(x, dtype=float)
        if np.any((x <= 0) | (x >= 1)):
            raise DomainError("edge_density needs 0 < x < 1")
        out = 2.0 * self.log_n * np.exp(self.log_n * (1.0 - x * x)) * x
        return float(out) if out.ndim == 0 else out

    def counting_exponent(self, x):
        """``1 - x^2``, the predicted value of ``log N(x) / log n``."""
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)):
            raise DomainError("counting_exponent needs 0 <= x <= 1")
        out = 1.0 - x * x
        return float(out) if out.ndim == 0 else out


def gershgorin_bound(model):
    """Maximal row sum ``d`` of the edge-probability matrix, an upper bound on ``||E[A]||``."""
    return float(model.d)


def degree_sum_deviation_bound(k, t, d, p_max):
    """Bound on ``P(D_{i_1} + ... + D_{i_k} >= k (d + t))`` for distinct vertices."""
    if d <= 0:
        raise DomainError("need d > 0")
    if k < 1 or t < 0 or p_max < 0:
        raise DomainError("need k >= 1, t >= 0, p_max >= 0")
    r = t / d
    return math.exp(-k * d * bennett_h(r) + k * k * p_max * (r + 1.0) ** 2)


def variance_bound(expected_count, d, n, q):
    """``E + 3 d n q^2`` where ``q = max_i P(D_i >= t - 1)``."""
    if expected_count < 0 or not 0 <= q <= 1:
        raise DomainError("need E >= 0 and q in [0, 1]")
    return float(expected_count + 3.0 * d * n * q * q)
