"""Special functions needed by the closed-form SIR distributions.

Only two families are implemented, both to double precision:

* ``hyp2f1_neg(s, x)`` = 2F1(2/s, 1; 1 + 2/s; -x) for s > 2 and x >= 0,
  the hypergeometric family that appears when a Rayleigh-faded link is
  averaged over an annulus.
* ``expint_ei(z)``, the exponential integral Ei on the principal branch
  (cut along the negative real axis), for complex arguments.

Both are vectorised over numpy arrays but evaluate scalars element by element;
inputs in this package are small, so clarity wins over speed.
"""

from __future__ import annotations

import math
import cmath

import numpy as np

# Relative accuracy targets, one decade tighter than the 1e-8 used by the
# downstream CDF equivalence checks.
HYP2F1_RTOL = 1e-10
EI_RTOL = 1e-9

EULER_GAMMA = 0.57721566490153286060651209008240243
_EPS = 2.0**-53
_MAX_TERMS = 100_000

# x above which the large-argument connection formula replaces the Pfaff series.
_HYP_LARGE_X = 3.0
# |z| up to which the Ei power series is used for complex arguments.
_EI_SERIES_RADIUS = 8.0
_EI_ASYMPTOTIC_RADIUS = 45.0


# ---------------------------------------------------------------------------
# 2F1(a, 1; 1 + a; -x),  a = 2/s in (0, 1)
# ---------------------------------------------------------------------------
def _hyp_pfaff_series(a: float, x: float) -> float:
    # Pfaff: 2F1(a,1;1+a;-x) = (1+x)^-1 2F1(1,1;1+a;u),  u = x/(1+x) in [0,1)
    u = x / (1.0 + x)
    term = 1.0
    total = 1.0
    for n in range(_MAX_TERMS):
        term *= u * (n + 1.0) / (n + 1.0 + a)
        total += term
        if term < _EPS * total:
            break
    return total / (1.0 + x)


def _hyp_large_x(a: float, x: float) -> float:
    # a x^-a int_0^x u^(a-1)/(1+u) du, with the tail int_x^inf expanded in 1/x.
    lead = a * math.pi / math.sin(math.pi * a) * x ** (-a)
    inv = 1.0 / x
    power = inv
    tail = 0.0
    for k in range(_MAX_TERMS):
        term = power / (k + 1.0 - a)
        tail += term if k % 2 == 0 else -term
        if term < _EPS * abs(tail):
            break
        power *= inv
    return lead - a * tail


def _hyp2f1_neg_scalar(s: float, x: float) -> float:
    if not (math.isfinite(s) and math.isfinite(x)):
        raise ValueError(f"hyp2f1_neg needs finite inputs, got s={s}, x={x}")
    if s < 2.0:
        raise ValueError(f"exponent must be >= 2, got {s}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    a = 2.0 / s
    if x == 0.0:
        return 1.0
    if s == 2.0:
        # 2F1(1,1;2;-x) = log(1+x)/x
        return math.log1p(x) / x
    if x <= _HYP_LARGE_X:
        return _hyp_pfaff_series(a, x)
    return _hyp_large_x(a, x)


def hyp2f1_neg(s, x):
    """Gauss hypergeometric 2F1(2/s, 1; 1 + 2/s; -x).

    Parameters
    ----------
    s : float
        Pathloss exponent, s >= 2 (s = 2 reduces to log(1+x)/x).
    x : float or array_like
        Nonnegative argument magnitude.

    Returns
    -------
    float or ndarray
        Values in (0, 1], strictly decreasing in ``x``.

    Notes
    -----
    For ``x <= 3`` the Pfaff transformation maps the argument to
    ``x/(1+x)`` in [0, 3/4] where the Gauss series converges geometrically.
    Beyond that the exact connection formula

        a x^-a pi/sin(pi a) - a sum_k (-1)^k x^(-1-k) / (k + 1 - a)

    is used, whose tail converges like (1/3)^k or faster.
    """
    if np.ndim(x) == 0:
        return _hyp2f1_neg_scalar(float(s), float(x))
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    for idx, val in np.ndenumerate(arr):
        out[idx] = _hyp2f1_neg_scalar(float(s), float(val))
    return out


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------
def _ei_series(z: complex) -> complex:
    # gamma + Log z + sum z^k / (k k!)
    term = complex(1.0)
    total = complex(0.0)
    for k in range(1, _MAX_TERMS):
        term *= z / k
        inc = term / k
        total += inc
        if abs(inc) <= _EPS * abs(total):
            break
    return EULER_GAMMA + cmath.log(z) + total


def _e1_continued_fraction(zeta: complex) -> complex:
    # E1(zeta) = e^-zeta / (zeta + 1 - 1/(zeta + 3 - 4/(zeta + 5 - ...)))
    # evaluated with the modified Lentz algorithm.
    tiny = 1e-300
    b = zeta + 1.0
    f = b
    c = b
    d = complex(0.0)
    for n in range(1, _MAX_TERMS):
        an = -float(n * n)
        b += 2.0
        d = b + an * d
        if d == 0:
            d = tiny
        c = b + an / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return cmath.exp(-zeta) / f


def _e1_asymptotic(zeta: complex) -> complex:
    # e^-zeta / zeta * sum (-1)^k k! / zeta^k, truncated at the smallest term
    term = complex(1.0)
    total = complex(1.0)
    prev = math.inf
    for k in range(1, int(abs(zeta)) + 1):
        term *= -k / zeta
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev < _EPS * abs(total):
            break
    return cmath.exp(-zeta) / zeta * total


def _e1_real(t: float) -> float:
    # E1 on the positive real axis
    if t <= 1.0:
        return -_ei_series(complex(-t)).real
    return _e1_continued_fraction(complex(t)).real


def _ei_real(x: float) -> float:
    if x < 0.0:
        return -_e1_real(-x)
    if x <= 40.0:
        return _ei_series(complex(x)).real
    return -_e1_asymptotic(complex(-x, 0.0)).real


def _ei_parts(z: complex) -> tuple[complex, complex]:
    """Ei(z) split as (branch constant, remainder) for exact cancellation."""
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"Ei needs a finite argument, got {z}")
    if z == 0:
        raise ValueError("Ei has a logarithmic singularity at z = 0")
    zero = complex(0.0)
    if z.imag == 0.0:
        return zero, complex(_ei_real(z.real), 0.0)
    r = abs(z)
    if r <= _EI_SERIES_RADIUS:
        return zero, _ei_series(z)
    # Ei(z) = i pi sgn(Im z) - E1(-z) off the real axis
    branch = complex(0.0, math.copysign(math.pi, z.imag))
    zeta = -z
    if r > _EI_ASYMPTOTIC_RADIUS and zeta.real < 0.0:
        return branch, -_e1_asymptotic(zeta)
    if zeta.real < 0.0 and abs(zeta.imag) < -zeta.real:
        # near the positive real axis of z the continued fraction crawls;
        # the series loses at most e^(|z| - Re z) there
        return zero, _ei_series(z)
    return branch, -_e1_continued_fraction(zeta)


def _expint_ei_scalar(z: complex) -> complex:
    branch, rest = _ei_parts(z)
    return branch + rest


def _ei_increment_series(a: complex, delta: complex) -> complex:
    # e^t/t = (e^a/a) e^u / (1 + u/a), u = t - a; the Taylor coefficients of
    # e^u/(1 + u/a) obey c_m = 1/m! - c_{m-1}/a. Integrate termwise.
    c = complex(1.0)
    inv_fact = 1.0
    power = delta
    total = delta
    for m in range(1, _MAX_TERMS):
        inv_fact /= m
        c = inv_fact - c / a
        power *= delta
        inc = c * power / (m + 1)
        total += inc
        if abs(inc) <= _EPS * abs(total):
            break
    return cmath.exp(a) / a * total


def expint_ei_increment(a, delta):
    """Ei(a + delta) - Ei(a) without cancellation for small ``delta``.

    When ``|delta| <= min(1, |a|/2)`` the difference is summed as a Taylor
    series of the integrand around ``a`` (larger steps would cancel inside
    the e^u factor); otherwise the two values are subtracted with their
    branch constants cancelled exactly.
    The straight segment from ``a`` to ``a + delta`` must not cross the
    branch cut, which holds whenever both points share a nonzero imaginary
    part.
    """
    a = complex(a)
    delta = complex(delta)
    if delta == 0:
        return complex(0.0)
    if abs(delta) <= min(1.0, 0.5 * abs(a)):
        return _ei_increment_series(a, delta)
    b1, r1 = _ei_parts(a + delta)
    b0, r0 = _ei_parts(a)
    return (b1 - b0) + (r1 - r0)


def expint_ei(z):
    """Exponential integral Ei(z) = PV int_{-inf}^{z} e^t / t dt.

    Principal branch with the cut on the negative real axis; on the real
    axis itself the real (Cauchy principal value) result is returned, so
    ``Ei(conj(z)) == conj(Ei(z))`` everywhere.

    Raises
    ------
    ValueError
        At the singularity ``z = 0`` or for non-finite input.
    """
    if np.ndim(z) == 0:
        return _expint_ei_scalar(complex(z))
    arr = np.asarray(z, dtype=complex)
    out = np.empty_like(arr)
    for idx, val in np.ndenumerate(arr):
        out[idx] = _expint_ei_scalar(complex(val))
    return out
