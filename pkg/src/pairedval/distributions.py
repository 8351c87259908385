"""Numeric kernels: standard normal CDF/quantile, chi-squared (1 dof) survival
and binomial tails.

Everything here is pure and dependency-free so the golden values in the test
suite are bit-stable across platforms.
"""

import math

__all__ = [
    "DomainError",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "chi2_1_survival",
    "log_gamma",
    "binomial_log_pmf",
    "binomial_sf",
    "binomial_cdf",
]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the domain of a distribution function."""


def normal_pdf(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def normal_cdf(z):
    """Standard normal CDF.

    Uses the complementary error function on the negated argument so that the
    lower tail keeps full relative precision.
    """
    if math.isnan(z):
        raise DomainError("normal_cdf: z is NaN")
    return 0.5 * math.erfc(-z / _SQRT2)


# Acklam's rational approximation, relative error < 1.15e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` for ``0 < p < 1``.

    Rational approximation followed by one Newton step on ``normal_cdf``.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"normal_quantile: p={p!r} not in (0, 1)")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact here; the lower tail refines without cancellation
        return -normal_quantile(1.0 - p)
    z = _acklam(p)
    density = normal_pdf(z)
    if density > 0.0:
        z -= (normal_cdf(z) - p) / density
    return z


def chi2_1_survival(x):
    """P(X >= x) for a chi-squared variable with one degree of freedom."""
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"chi2_1_survival: x={x!r} must be >= 0")
    # 2 * (1 - Phi(sqrt(x))), written as erfc to avoid cancellation
    return math.erfc(math.sqrt(x / 2.0))


_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def log_gamma(x):
    """log Gamma(x) for x > 0 via the Lanczos approximation (g=7, 9 terms)."""
    if not x > 0.0:
        raise DomainError(f"log_gamma: x={x!r} must be > 0")
    if x < 0.5:
        # reflection keeps the series in its accurate range
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def _check_binomial(x, n, p, upper):
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"binomial: n={n!r} must be an integer >= 1")
    if not isinstance(x, int):
        raise DomainError(f"binomial: x={x!r} must be an integer")
    if x < 0 or x > upper:
        raise DomainError(f"binomial: x={x} outside [0, {upper}]")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"binomial: p={p!r} not in [0, 1]")


def binomial_log_pmf(k, n, p):
    if p == 0.0:
        return 0.0 if k == 0 else -math.inf
    if p == 1.0:
        return 0.0 if k == n else -math.inf
    log_comb = log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0)
    return log_comb + k * math.log(p) + (n - k) * math.log1p(-p)


def _tail_sum(start, n, p, upward):
    """Sum of PMFs from ``start`` moving away from the mode.

    Terms are generated by the ratio recurrence relative to the first one, so
    only a single log-gamma evaluation is needed and the result keeps full
    relative precision even when the tail itself is tiny.
    """
    log_first = binomial_log_pmf(start, n, p)
    if log_first == -math.inf:
        return 0.0
    odds = p / (1.0 - p)
    total = 1.0
    term = 1.0
    k = start
    if upward:
        while k < n:
            term *= (n - k) / (k + 1.0) * odds
            k += 1
            total += term
            if term < 1e-17 * total:
                break
    else:
        while k > 0:
            term *= k / (n - k + 1.0) / odds
            k -= 1
            total += term
            if term < 1e-17 * total:
                break
    return math.exp(log_first) * total


def _tails(x, n, p):
    """Return (P(X >= x), P(X < x)), each computed from the smaller tail."""
    if x <= 0:
        return 1.0, 0.0
    if x > n:
        return 0.0, 1.0
    if p == 0.0:
        return 0.0, 1.0
    if p == 1.0:
        return 1.0, 0.0
    if x > n * p:
        upper = _tail_sum(x, n, p, upward=True)
        return upper, 1.0 - upper
    lower = _tail_sum(x - 1, n, p, upward=False)
    return 1.0 - lower, lower


def binomial_sf(x, n, p):
    """P(X >= x) for X ~ Binomial(n, p)."""
    _check_binomial(x, n, p, upper=n)
    return _tails(x, n, p)[0]


def binomial_cdf(x, n, p):
    """P(X < x) for X ~ Binomial(n, p); strict lower tail.

    ``x`` may be ``n + 1``, giving 1.
    """
    _check_binomial(x, n, p, upper=n + 1)
    return _tails(x, n, p)[1]
