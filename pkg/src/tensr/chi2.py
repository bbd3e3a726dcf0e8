"""Chi-square distribution helpers for two degrees of freedom.

With two degrees of freedom the central chi-square distribution has the
closed forms

    F(x)    = 1 - exp(-x/2)
    F^-1(p) = -2 ln(1 - p)

and the noncentral CDF is a Poisson mixture of central CDFs with
2, 4, 6, ... degrees of freedom:

    F(x; lam) = sum_k  e^{-lam/2} (lam/2)^k / k!  *  F_{2+2k}(x)

where F_{2+2k} is an Erlang CDF available by recurrence.  The mixture is
summed in log space so that large noncentrality (lam of several thousand,
which shows up when two position estimates are far apart relative to
their uncertainty) does not underflow the Poisson weights.
"""

from __future__ import annotations

import math

# Terms beyond this cumulative Poisson weight change the sum by < 1e-12.
_WEIGHT_CUTOFF = 1.0 - 1e-12
_MAX_TERMS = 10000


def chi2_cdf_2(x: float) -> float:
    """CDF of the central chi-square distribution with 2 dof."""
    if x < 0:
        raise ValueError(f"chi-square argument must be >= 0, got {x}")
    return -math.expm1(-0.5 * x)


def chi2_quantile_2(p: float) -> float:
    """Quantile (inverse CDF) of the central chi-square with 2 dof."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"probability must be in [0, 1), got {p}")
    return -2.0 * math.log1p(-p)


def noncentral_chi2_cdf_2(x: float, lam: float) -> float:
    """CDF of the noncentral chi-square with 2 dof and noncentrality lam.

    Series form: Poisson(lam/2) mixture of central chi-square CDFs with
    2 + 2k dof.  Summation stops once the accumulated Poisson weight
    exceeds 1 - 1e-12, the remaining Erlang factor underflows to zero,
    or 10000 terms have been taken, whichever comes first.
    """
    if x < 0:
        raise ValueError(f"chi-square argument must be >= 0, got {x}")
    if lam < 0:
        raise ValueError(f"noncentrality must be >= 0, got {lam}")
    if lam == 0.0:
        return chi2_cdf_2(x)
    if x == 0.0:
        return 0.0

    half_x = 0.5 * x
    half_lam = 0.5 * lam
    log_half_lam = math.log(half_lam)

    # Erlang(k+1, 1/2) CDF at x, by recurrence on the Poisson pmf of
    # half_x:  F_{2+2k}(x) = 1 - sum_{j<=k} e^{-h} h^j / j!
    log_s = -half_x          # log of e^{-h} h^j / j! at j = 0
    partial = math.exp(log_s)
    erlang_cdf = 1.0 - partial

    log_w = -half_lam        # log Poisson weight at k = 0
    weight = math.exp(log_w)
    cum_weight = weight
    total = weight * erlang_cdf

    for k in range(1, _MAX_TERMS):
        if cum_weight >= _WEIGHT_CUTOFF:
            break
        if erlang_cdf <= 0.0:
            break            # all remaining mixture components are ~0
        log_w += log_half_lam - math.log(k)
        weight = math.exp(log_w)
        cum_weight += weight
        log_s += math.log(half_x) - math.log(k)
        partial += math.exp(log_s)
        erlang_cdf = 1.0 - partial
        if erlang_cdf > 0.0:
            total += weight * erlang_cdf
    return min(total, 1.0)
