import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from pairedval.distributions import (
    DomainError,
    binomial_cdf,
    binomial_log_pmf,
    binomial_sf,
    chi2_1_survival,
    log_gamma,
    normal_cdf,
    normal_pdf,
    normal_quantile,
)


def exact_tails(n, p):
    """Lists (P(X >= x), P(X < x)) for x = 0..n by direct summation in rationals."""
    p = Fraction(p)
    pmf = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    sf, cdf = [Fraction(0)] * (n + 2), [Fraction(0)] * (n + 2)
    for k in range(n, -1, -1):
        sf[k] = sf[k + 1] + pmf[k]
    for k in range(1, n + 2):
        cdf[k] = cdf[k - 1] + pmf[k - 1]
    return [float(v) for v in sf], [float(v) for v in cdf]


def rel_close(a, b, rel=1e-9, floor=1e-300):
    if a == b:
        return True
    return abs(a - b) <= rel * max(abs(a), abs(b), floor)


@pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(1, 10), Fraction(9, 10), Fraction(7, 13)])
def test_binomial_tails_match_direct_summation(p):
    bad = []
    for n in range(1, 101):
        sf, cdf = exact_tails(n, p)
        for x in range(0, n + 1):
            if not rel_close(binomial_sf(x, n, float(p)), sf[x]):
                bad.append(("sf", n, x))
            if not rel_close(binomial_cdf(x, n, float(p)), cdf[x]):
                bad.append(("cdf", n, x))
    assert not bad, bad[:10]


def test_binomial_cdf_accepts_n_plus_one():
    assert binomial_cdf(11, 10, 0.3) == pytest.approx(1.0)
    assert binomial_cdf(0, 10, 0.3) == 0.0


@given(st.integers(1, 400), st.floats(0.01, 0.99), st.data())
@settings(max_examples=300, deadline=None)
def test_tails_are_complementary(n, p, data):
    x = data.draw(st.integers(0, n))
    assert binomial_sf(x, n, p) + binomial_cdf(x, n, p) == pytest.approx(1.0, abs=1e-12)


def test_binomial_tails_against_scipy_large_n():
    for n, x, p in [(500, 300, 0.5), (1346, 700, 0.5), (262, 164, 0.5), (1000, 10, 0.02)]:
        assert rel_close(binomial_sf(x, n, p), stats.binom.sf(x - 1, n, p), rel=1e-8)


@pytest.mark.parametrize("args", [(0, 0, 0.5), (1, 5, 1.5), (-1, 5, 0.5), (7, 5, 0.5), (1, 2.5, 0.5)])
def test_binomial_domain_errors(args):
    with pytest.raises(DomainError):
        binomial_sf(*args)


def test_binomial_log_pmf_sums_to_one():
    n, p = 37, 0.23
    assert sum(math.exp(binomial_log_pmf(k, n, p)) for k in range(n + 1)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 50.5, 171.3, 1000.0])
def test_log_gamma_matches_math_lgamma(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-13)


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        log_gamma(0.0)


@pytest.mark.parametrize("q", [1e-12, 1e-6, 0.001, 0.025, 0.05, 0.3, 0.5, 0.8, 0.95, 0.975, 0.999999])
def test_normal_quantile_against_scipy(q):
    assert normal_quantile(q) == pytest.approx(stats.norm.ppf(q), abs=1e-12, rel=1e-12)


def test_normal_quantile_known_values():
    assert normal_quantile(0.975) == pytest.approx(1.959963985, abs=1e-9)
    assert normal_quantile(0.95) == pytest.approx(1.644853627, abs=1e-9)
    assert normal_quantile(0.5) == 0.0


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.2])
def test_normal_quantile_domain(q):
    with pytest.raises(DomainError):
        normal_quantile(q)


@given(st.floats(-8, 5))
def test_normal_cdf_quantile_round_trip(z):
    p = normal_cdf(z)
    if 1e-15 < p < 1 - 1e-15:
        assert normal_quantile(p) == pytest.approx(z, abs=1e-7)


def test_normal_cdf_and_pdf_against_scipy():
    for z in (-12.0, -3.0, -1.0, 0.0, 0.7, 2.5, 9.6):
        assert normal_cdf(z) == pytest.approx(stats.norm.cdf(z), rel=1e-12, abs=1e-300)
        assert normal_pdf(z) == pytest.approx(stats.norm.pdf(z), rel=1e-12)


def test_chi2_survival_against_scipy():
    for x in (0.0, 0.04, 0.5, 2.64, 3.84, 23.4, 66.2):
        assert chi2_1_survival(x) == pytest.approx(stats.chi2.sf(x, 1), rel=1e-12, abs=1e-300)
    with pytest.raises(DomainError):
        chi2_1_survival(-1.0)
