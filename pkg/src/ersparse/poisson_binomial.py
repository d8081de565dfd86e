"""Exact Poisson-binomial laws and their Poisson and binomial references.

``X ~ Bin(p_1, ..., p_n)`` is the number of successes among independent
Bernoulli trials.  :func:`exact_pmf` computes its law up to a truncation
index together with the exact mass beyond it.  :func:`bound_report` then
compares ``X`` to a Poisson variable ``Y`` of the same mean and evaluates
the explicit tail bounds.

CSV schema written by :func:`write_bound_reports` (one row per instance and
``k``), in this order::

    instance, k, d, p_max, exact_pmf, exact_tail, poisson_pmf, poisson_tail,
    ratio_deviation, pmf_ratio_shape, tail_ratio, tail_ratio_shape, bennett_bound,
    lindeberg_pmf_bound, lindeberg_tail_bound, bennett_holds, in_regime

``exact_tail`` and ``poisson_tail`` are strict upper tails ``P(. > k)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import special

from .errors import DomainError
from .theory import f_d

# absolute slack allowed on the constant-free inequalities
FLOAT_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class TailDistribution:
    """Law of ``X`` on ``0..k_max`` in log scale plus ``log P(X > k_max)``."""

    probabilities: np.ndarray
    d: float
    p_max: float
    k_max: int
    log_pmf: np.ndarray
    log_tail_at_kmax: float

    @property
    def n(self):
        return int(self.probabilities.size)

    def pmf(self):
        return np.exp(self.log_pmf)

    def log_sf(self, k):
        """``log P(X >= k)`` for ``0 <= k <= k_max + 1``."""
        if k < 0:
            return 0.0
        if k > self.k_max + 1:
            raise DomainError(f"k={k} beyond truncation k_max+1={self.k_max + 1}")
        terms = np.append(self.log_pmf[k:], self.log_tail_at_kmax)
        return float(special.logsumexp(terms))

    def log_tail(self, k):
        """``log P(X > k)``."""
        return self.log_sf(k + 1)


def exact_pmf(probabilities, k_max) -> TailDistribution:
    """Exact law of a sum of independent Bernoulli variables, truncated at ``k_max``.

    Convolution one trial at a time, O(n k_max), in linear space on the
    tilted vector ``v[k] = P(X = k) rho^k 2^-E``.  The tilt ``rho`` is a power
    of two chosen so that the deep tail stays far above underflow, and ``E``
    is an exact power-of-two rescaling, so neither introduces rounding.  The
    update is written as ``v + p (rho v[k-1] - v)`` for small ``p`` so the
    rounding of ``1 - p`` cannot accumulate into a drift over many trials.

    Mass pushed past ``k_max`` is accumulated separately, so ``P(X > k_max)``
    is exact rather than a difference of nearly equal numbers.
    Probabilities are processed in sorted order, which makes the output
    independent of the input order bit for bit; zero probabilities are
    skipped.
    """
    p = np.sort(np.asarray(probabilities, dtype=float).ravel())
    if p.size and (not np.all(np.isfinite(p)) or p[0] < 0.0 or p[-1] > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    k_max = int(k_max)
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    active = p[np.searchsorted(p, 0.0, side="right"):]
    d = float(p.sum())
    target = min(k_max, 500)
    log2_rho = min(1000, max(0, round(math.log2(target) - math.log2(d)))) if d > 0 and target > 0 else 0
    rho = 2.0 ** log2_rho
    v = np.zeros(k_max + 1)
    v[0] = 1.0
    E = 0
    growth = 0.0
    log2 = math.log(2.0)
    tail = -np.inf
    top = 0
    for pi in active:
        up = pi * rho
        if top == k_max and v[k_max] > 0:
            tail = np.logaddexp(tail, math.log(pi) + math.log(v[k_max])
                                - k_max * log2_rho * log2 + E * log2)
        hi = min(top + 1, k_max)
        head = v[:hi + 1]
        if pi <= 0.5:
            # v + p (rho v[k-1] - v): no rounded 1 - p enters the recursion
            delta = -head
            delta[1:] += rho * head[:hi]
            delta *= pi
            head += delta
        else:
            # 1 - p is exact for p >= 1/2
            moved = up * head[:hi]
            head *= 1.0 - pi
            head[1:] += moved
        top = hi
        growth += math.log2(1.0 - pi + up)
        if growth > 600:
            shift = int(math.frexp(head.max())[1])
            head *= 2.0 ** -shift
            E += shift
            growth = 0.0
    with np.errstate(divide="ignore"):
        L = np.log(v) - np.arange(k_max + 1) * (log2_rho * log2) + E * log2
    L.setflags(write=False)
    p.setflags(write=False)
    return TailDistribution(p, float(p.sum()), float(p[-1]) if p.size else 0.0,
                            k_max, L, float(tail))


def poisson_log_pmf(d, k):
    return k * math.log(d) - d - math.lgamma(k + 1) if k >= 0 else -np.inf


def _log_series_tail(log_first, ratio_fn, k0, limit=None):
    """``log sum_{j >= k0} exp(log term_j)`` for terms that eventually decrease."""
    total = log_first
    cur = log_first
    j = k0
    while True:
        if limit is not None and j >= limit:
            break
        r = ratio_fn(j)
        if r <= 0:
            break
        cur += math.log(r)
        j += 1
        total = np.logaddexp(total, cur)
        if cur < total - 40.0 and r < 0.5:
            break
    return float(total)


def poisson_reference(d, k):
    """``(log P(Y = k), log P(Y > k))`` for ``Y ~ Poisson(d)``."""
    if d <= 0:
        raise DomainError("Poisson mean must be positive")
    if k < 0:
        raise DomainError("k must be nonnegative")
    log_pmf = poisson_log_pmf(d, k)
    direct = special.pdtrc(k, d)
    if k + 1 <= d or direct > 1e-250:
        return log_pmf, float(math.log(direct)) if direct > 0 else -np.inf
    return log_pmf, _log_series_tail(poisson_log_pmf(d, k + 1), lambda j: d / (j + 1), k + 1)


def stirling_log_pmf(d, k):
    """``-f_d(k)``, the Stirling approximation of ``log P(Y = k)``."""
    return -f_d(k, d)


def log_binomial_coefficient(n, k):
    """``log C(n, k)`` as ``k log n - log k! + sum_j log(1 - j/n)``.

    The compensated sum keeps the relative error near machine precision
    even for ``n`` in the millions, unlike differences of log-gamma values.
    """
    k = min(k, n - k)
    if k == 0:
        return 0.0
    j = np.arange(1, k, dtype=float)
    return math.fsum(np.log1p(-j / n)) + k * math.log(n) - math.lgamma(k + 1)


def binomial_log_pmf(n, p, k):
    if k < 0 or k > n:
        return -np.inf
    return float(log_binomial_coefficient(n, k) + special.xlogy(k, p)
                 + special.xlog1py(n - k, -p))


def binomial_reference(n, d, k):
    """``(log P(Z = k), log P(Z > k))`` for ``Z ~ Bin(n, d/n)``."""
    if d < 0 or d > n:
        raise DomainError("need 0 <= d <= n")
    p = d / n
    log_pmf = binomial_log_pmf(n, p, k)
    if k >= n:
        return log_pmf, -np.inf
    if k < 0:
        return log_pmf, 0.0
    direct = special.bdtrc(k, n, p)
    if k + 1 <= d or direct > 1e-250:
        return log_pmf, float(math.log(direct)) if direct > 0 else -np.inf
    ratio = lambda j: (n - j) / (j + 1) * p / (1.0 - p)
    return log_pmf, _log_series_tail(binomial_log_pmf(n, p, k + 1), ratio, k + 1, limit=n)


def _scaled_h(d, y):
    """``d h(y/d - 1) = y log(y/d) - (y - d)`` for ``y >= d``, safe for tiny ``d``."""
    return y * (math.log(y) - math.log(d)) - (y - d)


def bennett_tail_bound(d, k):
    """Bound ``exp(-d h(k/d - 1))`` on ``P(X >= k)``; equals 1 for ``k <= d``."""
    if k <= d:
        return 1.0
    return math.exp(-_scaled_h(d, k))


def lindeberg_bounds(d, p_max, k):
    """Bounds on ``|P(k) - Q(k)|`` and ``|P(X >= k) - Q(Z >= k)|``."""
    base = d * p_max * math.exp(-_scaled_h(d, max(k - 2.0, d)))
    return 2.0 * base, base


@dataclass(frozen=True)
class BoundReport:
    k: int
    d: float
    p_max: float
    exact_pmf: float
    exact_tail: float
    poisson_pmf: float
    poisson_tail: float
    ratio_deviation: float
    pmf_ratio_shape: float
    tail_ratio: float
    tail_ratio_shape: float
    bennett_bound: float
    lindeberg_pmf_bound: float
    lindeberg_tail_bound: float
    bennett_holds: bool
    in_regime: bool

    def as_row(self):
        return [getattr(self, f.name) for f in fields(self)]


def bound_report(probabilities, k, dist: TailDistribution | None = None) -> BoundReport:
    """Compare ``X`` with ``Poisson(d)`` at ``k`` and evaluate every explicit bound.

    Fields depend on the probabilities only through their nonzero entries.
    """
    if dist is None or dist.k_max < k + 1:
        dist = exact_pmf(probabilities, k + 1)
    d, p_max = dist.d, dist.p_max
    if d <= 0:
        raise DomainError("all probabilities are zero")
    log_x = float(dist.log_pmf[k])
    log_x_tail = dist.log_tail(k)
    log_y, log_y_tail = poisson_reference(d, k)
    ratio_dev = abs(math.expm1(log_x - log_y))
    tail_ratio = math.exp(log_x_tail - log_x) if log_x > -np.inf else np.inf
    pmf_shape = p_max * k ** 2.5 / d
    bennett = bennett_tail_bound(d, k)
    lin_pmf, lin_tail = lindeberg_bounds(d, p_max, k)
    return BoundReport(
        k=int(k), d=d, p_max=p_max,
        exact_pmf=math.exp(log_x), exact_tail=math.exp(log_x_tail),
        poisson_pmf=math.exp(log_y), poisson_tail=math.exp(log_y_tail),
        ratio_deviation=ratio_dev, pmf_ratio_shape=pmf_shape,
        tail_ratio=tail_ratio, tail_ratio_shape=d / k + pmf_shape,
        bennett_bound=bennett,
        lindeberg_pmf_bound=lin_pmf, lindeberg_tail_bound=lin_tail,
        bennett_holds=math.exp(dist.log_sf(k)) <= bennett + FLOAT_SLACK,
        in_regime=bool(2 * d <= k <= (d / p_max) ** 0.4),
    )


def bound_reports(probabilities, ks):
    ks = [int(k) for k in ks]
    dist = exact_pmf(probabilities, max(ks) + 1)
    return [bound_report(None, k, dist) for k in ks]


@dataclass(frozen=True)
class LindebergCheck:
    """Measured distances between ``X`` and ``Bin(n, d/n)`` next to their bounds."""

    ks: np.ndarray
    pmf_gap: np.ndarray
    tail_gap: np.ndarray
    pmf_bound: np.ndarray
    tail_bound: np.ndarray

    @property
    def holds(self):
        return bool(np.all(self.pmf_gap <= self.pmf_bound + FLOAT_SLACK)
                    and np.all(self.tail_gap <= self.tail_bound + FLOAT_SLACK))


def lindeberg_check(probabilities, k_max) -> LindebergCheck:
    """Evaluate both comparison inequalities for ``k = 0..k_max``.

    The homogeneous reference uses the same number of trials ``n`` as the
    input, each with probability ``d/n``.
    """
    p = np.asarray(probabilities, dtype=float)
    X = exact_pmf(p, k_max)
    Z = exact_pmf(np.full(p.size, X.d / p.size), k_max)
    ks = np.arange(k_max + 1)
    pmf_gap = np.abs(X.pmf() - Z.pmf())
    tail_gap = np.abs(np.array([math.exp(X.log_sf(k)) - math.exp(Z.log_sf(k)) for k in ks]))
    bounds = np.array([lindeberg_bounds(X.d, X.p_max, k) for k in ks]) if X.d > 0 \
        else np.zeros((ks.size, 2))
    return LindebergCheck(ks, pmf_gap, tail_gap, bounds[:, 0], bounds[:, 1])


def fit_constant(reports, which="pmf"):
    """Smallest constant ``C`` with ``measured <= C * shape`` on every report.

    ``which="pmf"`` fits ``ratio_deviation`` against ``p_max k^(5/2) / d``;
    ``which="tail"`` fits ``tail_ratio`` against ``d/k + p_max k^(5/2) / d``.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("fit_constant needs at least one report")
    if which == "pmf":
        pairs = [(r.ratio_deviation, r.pmf_ratio_shape) for r in reports]
    elif which == "tail":
        pairs = [(r.tail_ratio, r.tail_ratio_shape) for r in reports]
    else:
        raise ValueError(f"unknown bound {which!r}")
    ratios = [m / s for m, s in pairs if s > 0]
    if not ratios:
        raise ValueError("no report has a positive shape")
    return float(max(ratios))


CSV_COLUMNS = ["instance", "k", "d", "p_max", "exact_pmf", "exact_tail", "poisson_pmf",
               "poisson_tail", "ratio_deviation", "pmf_ratio_shape", "tail_ratio", "tail_ratio_shape",
               "bennett_bound", "lindeberg_pmf_bound", "lindeberg_tail_bound",
               "bennett_holds", "in_regime"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def write_bound_reports(rows, fh):
    """Write ``(instance, BoundReport)`` pairs as CSV to an open text file."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for instance, rep in rows:
        w.writerow([_fmt(instance)] + [_fmt(v) for v in rep.as_row()])
