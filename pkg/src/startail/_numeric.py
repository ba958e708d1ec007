"""Small numerical kernels shared by the rate, variational and oracle modules."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/golden ratio
EXACT_COMB_LIMIT = 20


def log_comb(n: int, k: int) -> float:
    """Natural log of C(n, k); -inf outside 0 <= k <= n."""
    if k < 0 or k > n:
        return -math.inf
    if n <= EXACT_COMB_LIMIT:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def comb_float(n: int, k: int) -> float:
    """C(n, k) as a float, exact integer arithmetic before the final rounding."""
    c = math.comb(n, k)
    try:
        return float(c)
    except OverflowError:
        return math.inf


def comb_table(top: int, r: int) -> np.ndarray:
    """Integer array C(x, r) for x = 0..top."""
    return np.array([math.comb(x, r) for x in range(top + 1)], dtype=np.int64)


def xlogy(x: float, y: float) -> float:
    """x*log(y) with the convention 0*log(0) = 0."""
    return float(special.xlogy(x, y))


def logsumexp(values) -> float:
    a = np.asarray(values, dtype=float)
    if a.size == 0 or not np.any(a > -np.inf):
        return -math.inf
    return float(special.logsumexp(a))


def golden_min(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 500,
) -> tuple[float, float]:
    """Golden-section search for the minimum of a unimodal f on [lo, hi].

    Returns ``(x, f(x))``. The bracket endpoints are also compared against
    the interior estimate, so a monotone f returns the correct endpoint.
    """
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    for xe in (lo, hi):
        fe = f(xe)
        if fe < fx:
            x, fx = xe, fe
    return x, fx


def golden_max(f, lo, hi, tol=1e-12, max_iter=500):
    x, fx = golden_min(lambda t: -f(t), lo, hi, tol=tol, max_iter=max_iter)
    return x, -fx


def bisect(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-13,
    rtol: float = 0.0,
    max_iter: int = 2000,
) -> float:
    """Root of g on [lo, hi] by bisection; g(lo) and g(hi) must differ in sign.

    Stops when the bracket is below ``xtol + rtol*|mid|`` or when the midpoint
    no longer moves in floating point.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise ValueError(f"root not bracketed on [{lo}, {hi}]: g={glo}, {ghi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= xtol + rtol * abs(mid):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nearest_integer_gap(x: float) -> float:
    return abs(x - round(x))


def threshold_count(threshold: float) -> int:
    """Smallest integer y with y >= threshold, robust to last-bit rounding.

    Integer-valued statistics are compared against real thresholds such as
    (1+eps)*mu; a threshold that is an integer up to rounding counts as that
    integer.
    """
    if threshold <= 0:
        return 0
    k = math.ceil(threshold)
    if k - 1 >= threshold - 1e-9 * max(1.0, abs(threshold)):
        k -= 1
    return int(k)
