"""Closed-form rate functions, tail bounds and finite-n quantities for star counts.

Everything here is a pure function of its arguments. Probabilities and bounds
are returned on the natural-log scale.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._numeric import (
    EXACT_COMB_LIMIT,
    comb_float,
    golden_min,
    log_comb,
    nearest_integer_gap,
    xlogy,
)

BOUNDARY_TOL = 1e-9


# ---------------------------------------------------------------------------
# instance description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarParams:
    """An upper-tail instance: r-stars in G(n, p).

    ``N`` is the trial count of the i.i.d. binomial surrogate and defaults to
    ``n - 1`` (the degree distribution of G(n, p)).
    """

    r: int
    n: int
    p: float
    N: int | None = None
    mu: float = field(init=False)
    nu: float = field(init=False)
    rho: float = field(init=False)

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 2:
            raise ValueError(f"r must be an integer >= 2, got {self.r!r}")
        if int(self.n) != self.n or self.n <= self.r:
            raise ValueError(f"n must be an integer > r, got {self.n!r}")
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")
        N = self.n - 1 if self.N is None else self.N
        if int(N) != N or N < 0:
            raise ValueError(f"N must be a non-negative integer, got {N!r}")
        object.__setattr__(self, "N", int(N))
        r, n, p = self.r, self.n, self.p
        object.__setattr__(self, "mu", _count_times_pr(n * math.comb(n - 1, r), r, p))
        object.__setattr__(self, "nu", _count_times_pr(n * math.comb(N, r), r, p))
        object.__setattr__(self, "rho", self.mu / comb_float(n, r))

    def to_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "p": self.p, "N": self.N,
                "mu": self.mu, "nu": self.nu, "rho": self.rho}


def _count_times_pr(count: int, r: int, p: float) -> float:
    try:
        return float(count) * p**r
    except OverflowError:
        return math.exp(math.log(count) + r * math.log(p))


class RegimeKind(str, enum.Enum):
    POISSON_TRANSITION = "PoissonTransition"
    INTERMEDIATE = "Intermediate"
    FRACTIONAL = "Fractional"
    DENSE = "Dense"


@dataclass(frozen=True)
class RegimeTag:
    kind: RegimeKind
    value: float | None = None  # c for PoissonTransition, rho for Fractional

    def __post_init__(self):
        kind = RegimeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RegimeKind.POISSON_TRANSITION:
            if self.value is None or not math.isfinite(self.value) or self.value < 0:
                raise ValueError("PoissonTransition needs a finite c >= 0")
        elif kind is RegimeKind.FRACTIONAL:
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise ValueError("Fractional needs a finite rho > 0")
        elif self.value is not None:
            raise ValueError(f"{kind.value} carries no scalar")

    @classmethod
    def poisson(cls, c: float) -> "RegimeTag":
        return cls(RegimeKind.POISSON_TRANSITION, float(c))

    @classmethod
    def fractional(cls, rho: float) -> "RegimeTag":
        return cls(RegimeKind.FRACTIONAL, float(rho))

    @classmethod
    def intermediate(cls) -> "RegimeTag":
        return cls(RegimeKind.INTERMEDIATE)

    @classmethod
    def dense(cls) -> "RegimeTag":
        return cls(RegimeKind.DENSE)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value}


class BoundSource(str, enum.Enum):
    CHERNOFF = "Chernoff"
    WEAK_CHERNOFF = "WeakChernoff"
    BINOM_LOWER = "BinomLower"
    WARNKE = "Warnke"


@dataclass(frozen=True)
class BoundReport:
    log_upper: float
    log_lower: float
    source: BoundSource
    vacuous: bool = False

    def __post_init__(self):
        if math.isfinite(self.log_lower) and math.isfinite(self.log_upper):
            if self.log_lower > self.log_upper + 1e-12 * max(1.0, abs(self.log_upper)):
                raise ValueError("log_lower exceeds log_upper")


# ---------------------------------------------------------------------------
# elementary functions
# ---------------------------------------------------------------------------

def phi(eps):
    """(1+eps)*log(1+eps) - eps; accepts scalars or arrays.

    A short alternating series is used for |eps| < 1e-3 where the direct
    formula loses digits to cancellation.
    """
    x = np.asarray(eps, dtype=float)
    if np.any(x < 0):
        raise ValueError("phi is defined for eps >= 0")
    small = x < 1e-3
    with np.errstate(invalid="ignore"):
        out = (1.0 + x) * np.log1p(x) - x
    if np.any(small):
        xs = x[small] if x.ndim else x
        series = np.zeros_like(xs)
        for k in range(9, 1, -1):
            series = series + (-1.0) ** k * xs**k / (k * (k - 1))
        if x.ndim:
            out[small] = series
        else:
            out = series
    if np.isscalar(eps) or x.ndim == 0:
        return float(out)
    return out


def psi(r: int, delta):
    """r^{-1} (r! delta)^{1/r}."""
    d = np.asarray(delta, dtype=float)
    if r < 2:
        raise ValueError("r must be >= 2")
    if np.any(d < 0):
        raise ValueError("psi is defined for delta >= 0")
    out = (math.factorial(r) * d) ** (1.0 / r) / r
    if np.isscalar(delta) or d.ndim == 0:
        return float(out)
    return out


def entropy_hp(p: float, lam: float) -> float:
    """Relative entropy H_p(lam) of Bernoulli(lam) w.r.t. Bernoulli(p).

    Endpoint values of p and lam are the continuous limits (possibly +inf).
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= lam <= 1.0):
        raise ValueError("entropy_hp needs p, lam in [0, 1]")
    out = 0.0
    for a, b in ((lam, p), (1.0 - lam, 1.0 - p)):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        out += a * math.log(a / b)
    return max(out, 0.0)


def frac(x: float) -> float:
    return x - math.floor(x)


# ---------------------------------------------------------------------------
# orders of magnitude and regime selection
# ---------------------------------------------------------------------------

def phi_order_thresholds(r: int, n: int) -> tuple[float, float]:
    """Edge probabilities separating the three cases of the order Phi_n."""
    low = n ** (-1.0 - 1.0 / r) * math.log(n) ** (1.0 / (r - 1))
    high = n ** (-1.0 / r)
    return low, high


def phi_order_cases(r: int, n: int, p: float) -> tuple[float, float, float]:
    """The three candidate formulas of Phi_n, evaluated regardless of case."""
    sparse = n ** (r + 1) * p**r
    middle = n ** (1.0 + 1.0 / r) * p * math.log(n)
    dense = n**2 * p**r * math.log(1.0 / p)
    return sparse, middle, dense


def phi_order(params: StarParams) -> float:
    r, n, p = params.r, params.n, params.p
    low, high = phi_order_thresholds(r, n)
    sparse, middle, dense = phi_order_cases(r, n, p)
    if p <= low:
        return sparse
    if p <= high:
        return middle
    return dense


def classify_regime(params: StarParams, window: float = 4.0) -> RegimeTag:
    """Finite-n stand-in for the limit conditions of the four-case rate.

    ``window`` is the multiplicative band within which a ratio is treated as
    tending to a constant.
    """
    if window <= 1.0:
        raise ValueError("window must exceed 1")
    r, n = params.r, params.n
    q1 = params.mu / math.log(n) ** (r / (r - 1.0))
    rho = params.rho
    if q1 <= window:
        return RegimeTag.poisson(q1)
    if 1.0 / window <= rho <= window:
        return RegimeTag.fractional(rho)
    if rho > window:
        return RegimeTag.dense()
    return RegimeTag.intermediate()


def fractional_case_value(r: int, n: int, x: float) -> float:
    """(1/r)({x}^{1/r} + floor(x)) n log n."""
    return (frac(x) ** (1.0 / r) + math.floor(x)) * n * math.log(n) / r


def fractional_one_sided(r: int, n: int, x: float) -> tuple[float, float]:
    """Left and right limits of the fractional-case rate at x."""
    k = round(x)
    left = (1.0 + (k - 1)) * n * math.log(n) / r
    right = k * n * math.log(n) / r
    return left, right


def star_rate_asymptotic(params: StarParams, eps: float, tag: RegimeTag) -> float:
    """Leading-order value of -log P(X >= (1+eps) mu) for the given regime."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    r, n, p, mu = params.r, params.n, params.p, params.mu
    kind = tag.kind
    if kind is RegimeKind.POISSON_TRANSITION:
        from .variational import rate_function

        return rate_function(tag.value, eps, r) * mu
    if kind is RegimeKind.INTERMEDIATE:
        return psi(r, eps) * mu ** (1.0 / r) * math.log(n)
    if kind is RegimeKind.FRACTIONAL:
        if tag.value <= 0:
            raise ValueError("Fractional regime needs rho > 0")
        return fractional_case_value(r, n, eps * tag.value)
    return eps * n**2 * p**r * math.log(1.0 / p)


@dataclass
class RateResult:
    """Regime tag, the selected asymptotic rate and supporting quantities."""

    params: StarParams
    eps: float
    tag: RegimeTag
    value: float
    phi_n: float
    cases: dict
    boundary: bool = False
    one_sided: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "eps": self.eps,
            "regime": self.tag.to_dict(),
            "rate": self.value,
            "phi_n": self.phi_n,
            "cases": dict(self.cases),
            "boundary": self.boundary,
            "one_sided": list(self.one_sided) if self.one_sided else None,
        }


def rate_report(params: StarParams, eps: float, window: float = 4.0,
                tag: RegimeTag | None = None) -> RateResult:
    """Evaluate all four cases and select one by regime classification."""
    from .variational import rate_function

    r, n = params.r, params.n
    if tag is None:
        tag = classify_regime(params, window)
    c = params.mu / math.log(n) ** (r / (r - 1.0))
    x = eps * params.rho
    cases = {
        "PoissonTransition": rate_function(c, eps, r) * params.mu,
        "Intermediate": star_rate_asymptotic(params, eps, RegimeTag.intermediate()),
        "Fractional": fractional_case_value(r, n, x),
        "Dense": star_rate_asymptotic(params, eps, RegimeTag.dense()),
    }
    value = star_rate_asymptotic(params, eps, tag)
    boundary = False
    one_sided = None
    if tag.kind is RegimeKind.FRACTIONAL:
        x = eps * tag.value
        if nearest_integer_gap(x) <= BOUNDARY_TOL:
            boundary = True
            one_sided = fractional_one_sided(r, n, x)
    return RateResult(params, eps, tag, value, phi_order(params), cases, boundary, one_sided)


def big_psi(params: StarParams, delta):
    """Localized-cost term of the unified rate, vectorized over delta."""
    r, n, p = params.r, params.n, params.p
    x = np.asarray(delta, dtype=float) * params.mu / comb_float(n, r)
    fl = np.floor(x)
    out = (x - fl) ** (1.0 / r) * n * math.log(n) / r + n * fl * math.log(1.0 / p)
    if np.ndim(delta) == 0:
        return float(out)
    return out


def unified_objective(params: StarParams, eps: float, delta):
    d = np.asarray(delta, dtype=float)
    out = phi(np.maximum(eps - d, 0.0)) * params.mu + big_psi(params, d)
    if np.ndim(delta) == 0:
        return float(out)
    return out


def unified_rate(params: StarParams, eps: float, grid: int = 10_000,
                 refine_tol: float = 1e-13) -> tuple[float, float]:
    """Minimize phi(eps-delta)*mu + Psi(delta) over delta in [0, eps].

    Coarse scan on ``grid`` cells, then golden-section refinement inside the
    cells adjacent to the best node. Jump points of the floor term are added
    as explicit candidates because the objective is only lower
    semicontinuous there.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    nodes = np.linspace(0.0, eps, grid + 1)
    vals = unified_objective(params, eps, nodes)
    i = int(np.argmin(vals))
    best_d, best_v = float(nodes[i]), float(vals[i])

    scale = comb_float(params.n, params.r) / params.mu
    jumps = math.floor(eps / scale + 1e-12)
    if jumps <= 100_000:
        for k in range(1, jumps + 1):
            d = min(k * scale, eps)
            v = unified_objective(params, eps, d)
            if v < best_v:
                best_d, best_v = d, v

    lo = float(nodes[max(i - 1, 0)])
    hi = float(nodes[min(i + 1, grid)])
    d, v = golden_min(lambda t: unified_objective(params, eps, t), lo, hi, tol=refine_tol)
    if v < best_v:
        best_d, best_v = d, v
    return best_d, best_v


# ---------------------------------------------------------------------------
# binomial tail bounds
# ---------------------------------------------------------------------------

def chernoff_upper_log(n: int, p: float, t: float) -> float:
    """-t log(t/(e n p)); a valid bound on log P(Bin(n,p) >= t) for t > 0.

    The value is >= 0 (vacuous) whenever t <= e n p.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    return -t * math.log(t / (math.e * n * p))


def chernoff_is_vacuous(n: int, p: float, t: float) -> bool:
    return chernoff_upper_log(n, p, t) >= 0.0


def chernoff_full_upper_log(n: int, p: float, k: float) -> float:
    """-n H_p(k/n), valid for k >= np."""
    lam = k / n
    if lam < p:
        return 0.0
    return -n * entropy_hp(p, min(lam, 1.0)) if lam <= 1.0 else -math.inf


def binom_point_lower_log(n: int, p: float, k: int) -> float:
    """log of C(n,k) p^k (1-p)^(n-k), a lower bound on log P(Bin(n,p) >= k)."""
    if int(k) != k or k < 0 or k > n:
        raise ValueError(f"k must be an integer in [0, {n}], got {k!r}")
    k = int(k)
    return log_comb(n, k) + xlogy(k, p) + xlogy(n - k, 1.0 - p)


def binomial_tail_bounds(n: int, p: float, k: int) -> BoundReport:
    """Weak Chernoff upper bound and single-term lower bound for P(Bin >= k)."""
    upper = chernoff_upper_log(n, p, k) if k > 0 else 0.0
    vacuous = upper >= 0.0
    upper = min(upper, 0.0)
    lower = binom_point_lower_log(n, p, k)
    return BoundReport(upper, lower, BoundSource.WEAK_CHERNOFF, vacuous)


def warnke_bound_log(mu: float, t: float, C: float) -> float:
    """-phi(t/mu) mu / C."""
    if mu <= 0 or t < 0 or C <= 0:
        raise ValueError("warnke_bound_log needs mu > 0, t >= 0, C > 0")
    return -phi(t / mu) * mu / C


# ---------------------------------------------------------------------------
# quantities used to reduce the degree sequence to i.i.d. binomials
# ---------------------------------------------------------------------------

class ReductionQuantities(NamedTuple):
    delta_n: float
    Delta_n: float
    S: float | None


def star_excess_S(r: int, N: int, nu: float, eps: float) -> float:
    """(floor(x) + {x}^{1/r}) N with x = r! eps nu / N^r."""
    x = math.factorial(r) * eps * nu / N**r
    return (math.floor(x) + frac(x) ** (1.0 / r)) * N


def reduction_quantities(params: StarParams, C: float, eps: float | None = None) -> ReductionQuantities:
    """delta_n, Delta_n of the well-behaved set and (optionally) the statistic S."""
    if C <= 1:
        raise ValueError("C must exceed 1")
    n, p = params.n, params.p
    phin = phi_order(params)
    delta_n = math.sqrt(2.0 * C * phin / (comb_float(n, 2) * p))
    ratio = (math.log(n) + phin) / (n * p)
    if ratio <= 1.0:
        raise ValueError(
            "degenerate Delta_n: (log n + Phi_n)/(np) <= 1, parameters lie outside the sparse regime")
    Delta_n = C * (math.log(n) + phin) / math.log(ratio)
    S = None if eps is None else star_excess_S(params.r, params.N, params.nu, eps)
    return ReductionQuantities(delta_n, Delta_n, S)


__all__ = [
    "EXACT_COMB_LIMIT", "StarParams", "RegimeKind", "RegimeTag", "BoundSource", "BoundReport",
    "RateResult", "ReductionQuantities", "phi", "psi", "entropy_hp", "frac", "phi_order",
    "phi_order_cases", "phi_order_thresholds", "classify_regime", "star_rate_asymptotic",
    "rate_report", "fractional_case_value", "fractional_one_sided", "big_psi",
    "unified_objective", "unified_rate", "chernoff_upper_log", "chernoff_is_vacuous",
    "chernoff_full_upper_log", "binom_point_lower_log", "binomial_tail_bounds",
    "warnke_bound_log", "star_excess_S", "reduction_quantities",
]
