"""The one-dimensional trade-off behind the transition regime.

For c > 0 the rate function is

    I_r(c, eps) = min_{0 <= delta <= eps} phi(eps - delta) + psi_r(delta) c^{1/r - 1},

and I_r(0, eps) = phi(eps). Substituting alpha = r^{-1} (r!)^{1/r} c^{1/r-1}
turns the objective into f_alpha(delta) = phi(eps - delta) + alpha delta^{1/r}.
Its derivative g_alpha - h, with g_alpha(delta) = alpha / (r delta^{1-1/r}) and
h(delta) = log(1 + eps - delta), is strictly convex; this drives the whole
structure computed here:

* alpha0(eps): the alpha at which g_alpha and h touch. Above it f_alpha is
  increasing and 0 is the only minimizer.
* for alpha <= alpha0 two stationary points delta_- <= delta_+; delta_+ is
  the interior local minimum, F(alpha, eps) = f_alpha(delta_+).
* alpha1(eps) in (0, alpha0): the root of F(alpha, eps) = phi(eps).
  c_crit = c(alpha1) separates the Poisson minimizer {0} from {delta*}.

All root finding is bisection and all 1-D extremum searches are golden
section; the objective derivative is singular at delta = 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._numeric import bisect, golden_max, golden_min
from .rate_core import phi, psi

DEFAULT_TOL = 1e-9
ROOT_RTOL = 1e-15


@dataclass(frozen=True)
class VariationalSolution:
    c: float
    eps: float
    r: int
    value: float
    minimizers: tuple[float, ...]
    alpha: float
    delta_minus: float | None = None
    delta_plus: float | None = None

    def objective(self, delta: float) -> float:
        return objective(self.c, self.eps, self.r, delta)

    def to_dict(self) -> dict:
        return {
            "c": self.c, "eps": self.eps, "r": self.r, "value": self.value,
            "minimizers": list(self.minimizers), "alpha": self.alpha,
            "delta_minus": self.delta_minus, "delta_plus": self.delta_plus,
        }


@dataclass(frozen=True)
class CriticalConstants:
    alpha0: float
    alpha1: float
    c_crit: float
    eps: float
    r: int
    delta_touch: float
    delta_star_crit: float

    def to_dict(self) -> dict:
        return {
            "alpha0": self.alpha0, "alpha1": self.alpha1, "c_crit": self.c_crit,
            "eps": self.eps, "r": self.r, "delta_touch": self.delta_touch,
            "delta_star_crit": self.delta_star_crit,
        }


def _check(eps: float, r: int):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if int(r) != r or r < 2:
        raise ValueError(f"r must be an integer >= 2, got {r!r}")


# ---------------------------------------------------------------------------
# the objective and its derivative
# ---------------------------------------------------------------------------

def objective(c: float, eps: float, r: int, delta):
    """phi(eps - delta) + psi_r(delta) c^{1/r - 1} (the un-substituted form)."""
    d = np.asarray(delta, dtype=float)
    if c == 0:
        raise ValueError("objective is defined for c > 0")
    out = phi(np.maximum(eps - d, 0.0)) + psi(r, d) * c ** (1.0 / r - 1.0)
    return float(out) if np.ndim(delta) == 0 else out


def f_alpha(alpha: float, delta: float, eps: float, r: int) -> float:
    if delta < 0 or delta > eps:
        raise ValueError("delta must lie in [0, eps]")
    return phi(eps - delta) + alpha * delta ** (1.0 / r)


def g_alpha(alpha: float, delta, r: int):
    d = np.asarray(delta, dtype=float)
    out = alpha / (r * d ** (1.0 - 1.0 / r))
    return float(out) if np.ndim(delta) == 0 else out


def h_curve(delta, eps: float):
    d = np.asarray(delta, dtype=float)
    out = np.log1p(eps - d)
    return float(out) if np.ndim(delta) == 0 else out


def f_alpha_prime(alpha: float, delta: float, eps: float, r: int) -> float:
    """d/d delta of f_alpha on (0, eps]."""
    if delta <= 0:
        raise ValueError("f_alpha_prime is singular at delta = 0")
    return alpha / (r * delta ** (1.0 - 1.0 / r)) - math.log1p(eps - delta)


def _fprime_or_inf(alpha, eps, r):
    def fp(d):
        if d <= 0:
            return math.inf
        return alpha / (r * d ** (1.0 - 1.0 / r)) - math.log1p(eps - d)
    return fp


# ---------------------------------------------------------------------------
# change of variable c <-> alpha
# ---------------------------------------------------------------------------

def alpha_of_c(c: float, r: int) -> float:
    if c <= 0:
        raise ValueError("c must be positive")
    return math.factorial(r) ** (1.0 / r) / r * c ** (1.0 / r - 1.0)


def c_of_alpha(alpha: float, r: int) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    base = alpha * r / math.factorial(r) ** (1.0 / r)
    return base ** (r / (1.0 - r))


# ---------------------------------------------------------------------------
# critical constants
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _alpha0_point(eps: float, r: int, tol: float) -> tuple[float, float]:
    def tangent(d):
        return r * d ** (1.0 - 1.0 / r) * math.log1p(eps - d)
    return golden_max(tangent, 0.0, eps, tol=tol)


def alpha0(eps: float, r: int, tol: float = 1e-12) -> float:
    """max over delta in [0, eps] of r delta^{1-1/r} log(1 + eps - delta)."""
    _check(eps, r)
    return _alpha0_point(float(eps), int(r), tol)[1]


def alpha0_point(eps: float, r: int, tol: float = 1e-12) -> tuple[float, float]:
    """(delta, alpha0) at which g_alpha0 and h touch."""
    _check(eps, r)
    return _alpha0_point(float(eps), int(r), tol)


def stationary_points(alpha: float, eps: float, r: int) -> tuple[float, float] | None:
    """(delta_-, delta_+) for alpha <= alpha0(eps), else None.

    The minimum of the convex derivative is located first; each root is then
    bracketed on its own side of it.
    """
    _check(eps, r)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alpha > alpha0(eps, r):
        return None
    fp = _fprime_or_inf(alpha, eps, r)
    d_m, fp_m = golden_min(fp, 0.0, eps, tol=1e-13)
    if fp_m >= 0.0:
        # tangency up to rounding: both stationary points collapse
        return d_m, d_m
    d_plus = bisect(fp, d_m, eps, xtol=0.0, rtol=ROOT_RTOL)
    lo = d_m
    while fp(lo) <= 0.0:
        lo *= 0.5
    d_minus = bisect(fp, lo, d_m, xtol=0.0, rtol=ROOT_RTOL)
    return d_minus, d_plus


def big_f(alpha: float, eps: float, r: int) -> float:
    """F(alpha, eps) = f_alpha(delta_+(alpha, eps)) for 0 < alpha <= alpha0."""
    pts = stationary_points(alpha, eps, r)
    if pts is None:
        raise ValueError("alpha exceeds alpha0(eps); delta_+ is undefined")
    return f_alpha(alpha, pts[1], eps, r)


@lru_cache(maxsize=4096)
def _alpha1(eps: float, r: int) -> float:
    target = phi(eps)
    a0 = alpha0(eps, r)
    lo = 0.5 * a0
    while big_f(lo, eps, r) >= target:
        lo *= 0.5
    return bisect(lambda a: big_f(a, eps, r) - target, lo, a0, xtol=0.0, rtol=1e-15)


def alpha1(eps: float, r: int) -> float:
    """Unique alpha in (0, alpha0) with F(alpha, eps) = phi(eps)."""
    _check(eps, r)
    return _alpha1(float(eps), int(r))


def c_crit(eps: float, r: int) -> float:
    """The transition constant c_{r,eps}."""
    return c_of_alpha(alpha1(eps, r), r)


def critical_constants(eps: float, r: int) -> CriticalConstants:
    a1 = alpha1(eps, r)
    d_touch, a0 = alpha0_point(eps, r)
    return CriticalConstants(
        alpha0=a0, alpha1=a1, c_crit=c_of_alpha(a1, r), eps=float(eps), r=int(r),
        delta_touch=d_touch, delta_star_crit=stationary_points(a1, eps, r)[1],
    )


# ---------------------------------------------------------------------------
# solving the minimization
# ---------------------------------------------------------------------------

def solve(c: float, eps: float, r: int, tol: float = DEFAULT_TOL) -> VariationalSolution:
    """Value and minimizer set of the trade-off at (c, eps).

    Equality of the two candidate values (the c = c_crit case) is declared
    when they agree to relative tolerance ``tol``.
    """
    _check(eps, r)
    if c < 0:
        raise ValueError("c must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    base = phi(eps)
    if c == 0:
        return VariationalSolution(0.0, eps, r, base, (0.0,), math.inf)
    alpha = alpha_of_c(c, r)
    pts = stationary_points(alpha, eps, r)
    if pts is None:
        return VariationalSolution(c, eps, r, base, (0.0,), alpha)
    d_minus, d_plus = pts
    F = f_alpha(alpha, d_plus, eps, r)
    if abs(F - base) <= tol * base:
        mins, value = (0.0, d_plus), base
    elif F < base:
        mins, value = (d_plus,), F
    else:
        mins, value = (0.0,), base
    return VariationalSolution(c, eps, r, value, mins, alpha, d_minus, d_plus)


def rate_function(c: float, eps: float, r: int) -> float:
    """I_r(c, eps)."""
    return solve(c, eps, r).value


def delta_star(c: float, eps: float, r: int) -> float:
    """Interior minimizer for c > c_crit(eps, r)."""
    cc = c_crit(eps, r)
    if c <= cc:
        raise ValueError(f"delta_star needs c > c_crit = {cc!r}; the minimizer is 0 there")
    return stationary_points(alpha_of_c(c, r), eps, r)[1]


def grid_minimize(c: float, eps: float, r: int, points: int = 1_000_000) -> tuple[float, float]:
    """Brute-force (argmin, min) of the objective on a uniform grid in [0, eps]."""
    _check(eps, r)
    if c == 0:
        return 0.0, phi(eps)
    d = np.linspace(0.0, eps, points)
    v = objective(c, eps, r, d)
    i = int(np.argmin(v))
    return float(d[i]), float(v[i])


def grid_check(c: float, eps: float, r: int, points: int = 1_000_000,
               value_tol: float = 1e-6, delta_tol: float = 1e-4) -> dict:
    """Compare :func:`solve` against :func:`grid_minimize`."""
    sol = solve(c, eps, r)
    g_arg, g_min = grid_minimize(c, eps, r, points)
    value_err = abs(sol.value - g_min)
    delta_err = min(abs(g_arg - m) for m in sol.minimizers)
    return {
        "value": sol.value, "grid_value": g_min, "value_error": value_err,
        "grid_argmin": g_arg, "delta_error": delta_err,
        "ok": value_err <= value_tol and delta_err <= delta_tol,
    }


# ---------------------------------------------------------------------------
# curve data
# ---------------------------------------------------------------------------

CURVE_HEADER = ("delta", "f", "g", "h")


def curve_samples(alpha: float, eps: float, r: int, points: int = 1000) -> np.ndarray:
    """Rows (delta, f_alpha, g_alpha, h) on delta = eps*k/points, k = 1..points."""
    _check(eps, r)
    if points < 1:
        raise ValueError("points must be >= 1")
    d = eps * np.arange(1, points + 1) / points
    f = phi(np.maximum(eps - d, 0.0)) + alpha * d ** (1.0 / r)
    return np.column_stack([d, f, g_alpha(alpha, d, r), h_curve(d, eps)])


def curves_csv(alpha: float, eps: float, r: int, points: int = 1000) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_HEADER)
    for row in curve_samples(alpha, eps, r, points):
        w.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def default_curve_alphas(eps: float, r: int) -> list[float]:
    a0 = alpha0(eps, r)
    a1 = alpha1(eps, r)
    return [0.5 * a1, a1, a0, 1.5 * a0]
