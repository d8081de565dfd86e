import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ersparse.errors import DomainError
from ersparse.poisson_binomial import (CSV_COLUMNS, BoundReport, binomial_reference, bound_report,
                                       bound_reports, exact_pmf, fit_constant, lindeberg_check,
                                       poisson_reference, stirling_log_pmf, write_bound_reports)

probability_lists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40)


def rational_pmf(ps):
    """Exact law by convolution in rational arithmetic."""
    pmf = [Fraction(1)]
    for p in ps:
        q = Fraction(p)
        nxt = [Fraction(0)] * (len(pmf) + 1)
        for k, m in enumerate(pmf):
            nxt[k] += m * (1 - q)
            nxt[k + 1] += m * q
        pmf = nxt
    return pmf


def test_single_fair_coin():
    assert np.allclose(exact_pmf([0.5], 1).pmf(), [0.5, 0.5], atol=0, rtol=1e-15)


def test_three_trials_products():
    law = exact_pmf([0.1, 0.2, 0.3], 3)
    pmf = law.pmf()
    assert pmf[0] == pytest.approx(0.504, rel=1e-14)
    assert pmf[3] == pytest.approx(0.006, rel=1e-14)
    assert law.log_tail_at_kmax == -np.inf


def test_fair_coins_binomial():
    assert np.allclose(exact_pmf([0.5] * 3, 3).pmf(), [1 / 8, 3 / 8, 3 / 8, 1 / 8], rtol=1e-15)


def test_exact_pmf_domain_errors():
    with pytest.raises(DomainError):
        exact_pmf([0.2, 1.1], 2)
    with pytest.raises(DomainError):
        exact_pmf([-0.1], 1)
    with pytest.raises(DomainError):
        exact_pmf([0.2], -1)


@given(probability_lists)
@settings(max_examples=60, deadline=None)
def test_matches_rational_oracle(ps):
    exact = rational_pmf(ps)
    k_max = len(ps) // 2
    law = exact_pmf(ps, k_max)
    for k in range(k_max + 1):
        ref = float(exact[k])
        if ref > 1e-300:
            assert math.exp(law.log_pmf[k]) == pytest.approx(ref, rel=1e-12)
    tail = float(sum(exact[k_max + 1:]))
    if tail > 1e-300:
        assert math.exp(law.log_tail_at_kmax) == pytest.approx(tail, rel=1e-11)


@given(st.lists(st.floats(0.0, 0.2), min_size=1, max_size=3000), st.integers(0, 200))
@settings(max_examples=40, deadline=None)
def test_normalization(ps, k_max):
    law = exact_pmf(ps, k_max)
    total = math.fsum(law.pmf()) + math.exp(law.log_tail_at_kmax)
    assert abs(total - 1.0) <= 1e-12


def test_normalization_large_n():
    rng = np.random.default_rng(3)
    ps = rng.uniform(0, 4e-5, 100_000)
    law = exact_pmf(ps, 200)
    assert abs(math.fsum(law.pmf()) + math.exp(law.log_tail_at_kmax) - 1.0) <= 1e-12


@pytest.mark.parametrize("n,p", [(10, 0.3), (1000, 0.002), (10_000, 2e-4), (10_000, 0.01), (50, 0.9)])
def test_homogeneous_matches_binomial_reference(n, p):
    k_max = min(n, 60)
    law = exact_pmf(np.full(n, p), k_max)
    for k in range(k_max + 1):
        ref, _ = binomial_reference(n, n * p, k)
        if ref > -700:
            assert abs(law.log_pmf[k] - ref) <= 1e-10 * max(1.0, abs(ref))
    if k_max < n:
        _, ref_tail = binomial_reference(n, n * p, k_max)
        assert abs(law.log_tail_at_kmax - ref_tail) <= 1e-10 * max(1.0, abs(ref_tail))


def test_deep_tail_is_resolved():
    # P(X > 150) for n=1e4, p=2e-4 is far below 1e-200 but still representable in log space
    law = exact_pmf(np.full(10_000, 2e-4), 150)
    _, ref = binomial_reference(10_000, 2.0, 150)
    assert law.log_tail_at_kmax == pytest.approx(ref, rel=1e-10)


@given(probability_lists, st.randoms(use_true_random=False))
@settings(max_examples=50, deadline=None)
def test_permutation_invariance_is_bitwise(ps, rnd):
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    a, b = exact_pmf(ps, len(ps)), exact_pmf(shuffled, len(ps))
    assert np.array_equal(a.log_pmf, b.log_pmf)
    assert a.log_tail_at_kmax == b.log_tail_at_kmax or (
        np.isinf(a.log_tail_at_kmax) and np.isinf(b.log_tail_at_kmax))


def test_zero_probabilities_are_ignored():
    a = exact_pmf([0.3, 0.0, 0.6, 0.0], 2)
    b = exact_pmf([0.3, 0.6], 2)
    assert np.array_equal(a.log_pmf, b.log_pmf)


def test_log_sf_limits():
    law = exact_pmf([0.2] * 5, 3)
    assert law.log_sf(0) == pytest.approx(0.0, abs=1e-15)
    assert law.log_sf(4) == law.log_tail_at_kmax
    with pytest.raises(DomainError):
        law.log_sf(5)


def test_poisson_reference_examples():
    lp, lt = poisson_reference(2.5, 0)
    assert lp == pytest.approx(-2.5)
    assert math.exp(lt) == pytest.approx(1 - math.exp(-2.5))
    assert poisson_reference(1.0, 1)[0] == pytest.approx(-1.0)
    for d, k in ((2.0, 10), (3.0, 40), (0.5, 5)):
        assert math.exp(poisson_reference(d, k)[1]) == pytest.approx(stats.poisson.sf(k, d), rel=1e-10)
    with pytest.raises(DomainError):
        poisson_reference(0.0, 1)


def test_poisson_far_tail_series():
    d, k = 2.0, 400
    lp, lt = poisson_reference(d, k)
    terms = [poisson_reference(d, j)[0] for j in range(k + 1, k + 60)]
    assert lt == pytest.approx(float(np.logaddexp.reduce(terms)), rel=1e-12)


def test_stirling_error_decays_like_one_over_k():
    d = 3.0
    errs = [abs(poisson_reference(d, k)[0] - stirling_log_pmf(d, k)) for k in (10, 20, 40)]
    c0 = max(e * 10 * k for e, k in zip(errs, (10, 20, 40)))
    assert all(e <= c0 / (10 * k) for e, k in zip(errs, (10, 20, 40)))
    assert errs[0] > errs[1] > errs[2]
    # the gap is the Stirling correction 1/(12k) up to O(k^-3)
    assert errs[2] == pytest.approx(1 / (12 * 40), rel=1e-3)


def test_binomial_reference_examples():
    assert math.exp(binomial_reference(3, 1.5, 1)[0]) == pytest.approx(3 / 8, rel=1e-15)
    assert binomial_reference(3, 1.5, 4)[0] == -np.inf
    assert binomial_reference(3, 1.5, 3)[1] == -np.inf
    with pytest.raises(DomainError):
        binomial_reference(3, 4.0, 1)
    for n, d, k in ((1000, 2.0, 5), (10**6, 3.0, 30)):
        lp, lt = binomial_reference(n, d, k)
        assert math.exp(lp) == pytest.approx(stats.binom.pmf(k, n, d / n), rel=1e-9)
        assert math.exp(lt) == pytest.approx(stats.binom.sf(k, n, d / n), rel=1e-9)


def test_binomial_vs_poisson_constant_stable():
    consts = []
    for n in (10**3, 10**4, 10**5):
        c = max(abs(math.expm1(binomial_reference(n, 2.0, k)[0] - poisson_reference(2.0, k)[0]))
                / (k * k / n) for k in range(4, 21))
        consts.append(c)
    assert max(consts) / min(consts) <= 1.5


def test_bound_report_fields_and_homogeneous_case():
    n, d, k = 1000, 2.0, 6
    rep = bound_report(np.full(n, d / n), k)
    lz, lz_tail = binomial_reference(n, d, k)
    ly, _ = poisson_reference(d, k)
    assert rep.ratio_deviation == pytest.approx(abs(math.expm1(lz - ly)), rel=1e-9)
    assert rep.exact_tail == pytest.approx(math.exp(lz_tail), rel=1e-10)
    assert rep.pmf_ratio_shape == pytest.approx((d / n) * k ** 2.5 / d)
    assert rep.tail_ratio_shape == pytest.approx(d / k + rep.pmf_ratio_shape)
    assert rep.bennett_holds and rep.in_regime
    for name in ("exact_pmf", "exact_tail", "poisson_pmf", "poisson_tail"):
        assert 0.0 <= getattr(rep, name) <= 1.0
    with pytest.raises(DomainError):
        bound_report([0.0, 0.0], 1)


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=300), st.integers(0, 12))
@settings(max_examples=80, deadline=None)
def test_bennett_inequality_holds(ps, t):
    d = math.fsum(ps)
    if d <= 0:
        return
    k = math.ceil(d * (1 + t))
    if k > len(ps):
        return
    law = exact_pmf(ps, k)
    rep = bound_report(None, k, law) if k + 1 <= law.k_max else bound_report(ps, k)
    assert math.exp(law.log_sf(k)) <= rep.bennett_bound + 1e-12


@given(st.lists(st.floats(0.0, 0.2), min_size=100, max_size=100))
@settings(max_examples=40, deadline=None)
def test_lindeberg_inequalities_hold(ps):
    if math.fsum(ps) <= 0:
        return
    assert lindeberg_check(ps, 30).holds


def test_ratio_deviation_shrinks_with_p_max():
    devs = [bound_report(np.full(n, 2.0 / n), 6).ratio_deviation for n in (10**3, 10**4, 10**5)]
    assert devs[0] > devs[1] > devs[2]


def _report(dev, shape):
    return BoundReport(1, 1.0, 0.1, 0, 0, 0, 0, dev, shape, 0, shape, 1, 0, 0, True, True)


def test_fit_constant_examples():
    assert fit_constant([_report(0.01, 0.005)]) == pytest.approx(2.0)
    assert fit_constant([_report(0.01, 0.005), _report(0.0, 0.3)]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        fit_constant([])
    with pytest.raises(ValueError):
        fit_constant([_report(0.01, 0.005)], which="other")


def test_fit_constant_stable_across_grid():
    consts = [fit_constant([bound_report(np.full(n, 2.0 / n), 6)]) for n in (10**3, 10**4, 10**5)]
    assert all(math.isfinite(c) and c > 0 for c in consts)
    assert max(consts) / min(consts) <= 3.0


def test_bound_reports_share_one_law():
    ps = np.full(500, 0.004)
    reps = bound_reports(ps, [4, 6, 8])
    assert [r.k for r in reps] == [4, 6, 8]
    assert reps[1] == bound_report(ps, 6)


def test_csv_schema():
    buf = io.StringIO()
    write_bound_reports([(0, bound_report(np.full(100, 0.02), 5))], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines[1].split(",")) == len(CSV_COLUMNS)


@given(st.floats(0.01, 50.0), st.integers(0, 200))
@settings(max_examples=100)
def test_bound_exponents_match_bennett_h(d, k):
    from ersparse.poisson_binomial import bennett_tail_bound, lindeberg_bounds
    from ersparse.theory import bennett_h
    ref = 1.0 if k <= d else math.exp(-d * bennett_h(k / d - 1))
    assert bennett_tail_bound(d, k) == pytest.approx(ref, rel=1e-9, abs=1e-300)
    lin = 0.1 * d * math.exp(-d * bennett_h((k - 2 - d) / d, clamp=True))
    assert lindeberg_bounds(d, 0.1, k)[1] == pytest.approx(lin, rel=1e-9, abs=1e-300)
