"""Convergence-rate bound for hit-and-run in a body with ``B(x0, r) in X in B(x0, R)``.

The total-variation distance after ``n`` steps from any start is at most
``(1 - theta)^n`` with ``theta = (2/d) [(R/r + 1)^(d-1) (R/r)]^(-1)``.
``theta`` is computed in log space.  For the quantum bodies at ``N = 25``
(``d = 624``) it is about ``exp(-2014)``, far below the smallest double, so
:func:`log_theta` or the decimal value from :func:`theta_decimal` should be
used there.
"""

from __future__ import annotations

import math
from decimal import ROUND_CEILING, Decimal, localcontext

from ..errors import ValidationError


def log_theta(r: float, R: float, d: int) -> float:
    if not (r > 0 and R > 0):
        raise ValidationError("radii must be positive")
    if r > R:
        raise ValidationError(f"inradius {r} exceeds outradius {R}")
    if int(d) != d or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d!r}")
    q = R / r
    # the formula exceeds 1 only for d = 1 with R/r < 2; one step is then exactly uniform
    return min(0.0, math.log(2.0) - math.log(d) - (d - 1) * math.log1p(q) - math.log(q))


def theta_bound(r: float, R: float, d: int) -> float:
    """Doeblin constant of the chain as a float; 0.0 once it underflows."""
    return math.exp(log_theta(r, R, d))


def theta_decimal(r: float, R: float, d: int, digits: int = 50) -> Decimal:
    """``theta`` as a :class:`~decimal.Decimal`, which has no practical exponent limit."""
    log_theta(r, R, d)  # validates the inputs
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.Emin = -(10**9)
        q = Decimal(R) / Decimal(r)
        val = Decimal(2) / Decimal(d) / ((q + 1) ** (int(d) - 1) * q)
    return min(val, Decimal(1))


def _check_theta(theta):
    if not 0.0 < theta <= 1.0:
        raise ValidationError(f"theta must lie in (0, 1], got {theta!r}")


def log_tv_bound(theta: float, n: int) -> float:
    _check_theta(theta)
    if n < 0:
        raise ValidationError("number of steps must be >= 0")
    if n == 0:
        return 0.0
    if theta == 1.0:
        return -math.inf
    return n * math.log1p(-theta)


def tv_bound(theta: float, n: int) -> float:
    """Upper bound ``(1 - theta)^n`` on the total-variation distance to uniform."""
    return math.exp(log_tv_bound(theta, n))


def steps_for_tv(theta: float, eps: float, *, log_theta_value: float | None = None) -> int:
    """Smallest ``n`` with ``(1 - theta)^n <= eps``.

    For ``theta`` too small to represent pass ``log_theta_value``; then
    ``-log1p(-theta) ~ theta`` and the count is ``ceil(-log(eps) / theta)``.
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"eps must lie in (0, 1], got {eps!r}")
    if eps == 1.0:
        return 0
    if log_theta_value is not None:
        rate = math.exp(log_theta_value)
        if rate < 1e-12:
            with localcontext() as ctx:
                ctx.prec = 60
                ctx.Emax = 10**9
                n = (Decimal(-math.log(eps)) * Decimal(-log_theta_value).exp()).to_integral_value(rounding=ROUND_CEILING)
            return int(n)
        theta = rate
    _check_theta(theta)
    if theta == 1.0:
        return 1
    step = -math.log1p(-theta)
    target = -math.log(eps)
    n = math.ceil(target / step)
    # guard against ratios like 10.000000000000002
    if n > 0 and (n - 1) * step >= target * (1.0 - 1e-12):
        n -= 1
    return int(n)
