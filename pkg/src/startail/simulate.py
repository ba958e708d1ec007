"""Seeded Monte-Carlo estimators of star-count upper tails.

Three estimators are provided: plain sampling (of G(n, p) or of the i.i.d.
binomial surrogate), exponential tilting of the truncated sum Y', and a
planted-hub lower bound that multiplies an exactly computed planting
probability by a simulated success probability on the residual graph.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._numeric import bisect, comb_table, logsumexp, threshold_count
from .exact import DegreeSequence, DiscreteDistribution, _binomial_log_pmf, binomial_tail_log
from .rate_core import (
    RegimeKind,
    StarParams,
    classify_regime,
    frac,
    phi_order,
    star_rate_asymptotic,
)
from .rng import run_blocks

WILSON_Z = 3.0


class Estimator(str, enum.Enum):
    NAIVE = "Naive"
    TILTED = "Tilted"
    PLANTED = "Planted"


@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    log_estimate: float
    std_error: float
    samples: int
    estimator: Estimator
    seed: int
    params: dict = field(default_factory=dict)
    ci_low: float | None = None
    ci_high: float | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.estimate < 0:
            raise ValueError("estimate must be >= 0")

    def to_dict(self) -> dict:
        return {
            "estimator": Estimator(self.estimator).value,
            "params": dict(self.params),
            "seed": self.seed,
            "samples": self.samples,
            "estimate": self.estimate,
            "log_estimate": self.log_estimate,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "notes": dict(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False, allow_nan=True)


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def wilson_interval(hits: int, total: int, z: float = WILSON_Z) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    ph = hits / total
    denom = 1.0 + z * z / total
    centre = (ph + z * z / (2 * total)) / denom
    half = z * math.sqrt(ph * (1 - ph) / total + z * z / (4 * total * total)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _proportion(hits: int, total: int, estimator: Estimator, seed: int, params: dict,
                notes: dict | None = None) -> TailEstimate:
    est = hits / total
    se = math.sqrt(est * (1.0 - est) / total)
    lo, hi = wilson_interval(hits, total)
    return TailEstimate(est, _safe_log(est), se, total, estimator, seed, params, lo, hi,
                        notes or {})


# ---------------------------------------------------------------------------
# statistics of degree sequences
# ---------------------------------------------------------------------------

def star_count(d, r: int) -> int:
    """sum_i C(d_i, r), exact."""
    degs = d.degrees if isinstance(d, DegreeSequence) else d
    return sum(math.comb(int(x), r) for x in degs)


def split_sum(values: Sequence[int], r: int, R: int) -> tuple[int, int]:
    """(Y', Y''): star terms of values <= R and of values > R."""
    if R < 0:
        raise ValueError("R must be >= 0")
    vals = values.degrees if isinstance(values, DegreeSequence) else values
    low = sum(math.comb(int(x), r) for x in vals if x <= R)
    high = sum(math.comb(int(x), r) for x in vals if x > R)
    return low, high


def _incidence(n: int) -> np.ndarray:
    E = n * (n - 1) // 2
    inc = np.zeros((E, n), dtype=np.float32)
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            inc[k, u] = inc[k, v] = 1.0
            k += 1
    return inc


def _gnp_degree_block(rng: np.random.Generator, count: int, n: int, p: float,
                      inc: np.ndarray) -> np.ndarray:
    bits = (rng.random((count, inc.shape[0])) < p).astype(np.float32)
    return (bits @ inc).astype(np.int64)


def sample_gnp_degrees(n: int, p: float, rng: np.random.Generator,
                       size: int | None = None):
    """Degree sequence(s) of G(n, p); a DegreeSequence, or an array if ``size`` is given."""
    deg = _gnp_degree_block(rng, 1 if size is None else size, n, p, _incidence(n))
    if size is None:
        return DegreeSequence(tuple(int(x) for x in deg[0]))
    return deg


# ---------------------------------------------------------------------------
# naive sampling
# ---------------------------------------------------------------------------

def naive_tail(params: StarParams, eps: float, samples: int, seed: int, mode: str = "gnp",
               workers: int | None = None) -> TailEstimate:
    """Fraction of draws with star count >= (1+eps) mean.

    ``mode="gnp"`` samples G(n, p) (mean mu); ``mode="iid"`` samples
    X_i ~ Bin(N, p) independently (mean nu).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    r, n, p, N = params.r, params.n, params.p, params.N
    if mode == "gnp":
        k = threshold_count((1.0 + eps) * params.mu)
        table = comb_table(n - 1, r)
        inc = _incidence(n)

        def block(rng, count):
            deg = _gnp_degree_block(rng, count, n, p, inc)
            return int(np.count_nonzero(table[deg].sum(axis=1) >= k))

        width = inc.shape[0]
    elif mode == "iid":
        k = threshold_count((1.0 + eps) * params.nu)
        table = comb_table(N, r)

        def block(rng, count):
            x = rng.binomial(N, p, size=(count, n))
            return int(np.count_nonzero(table[x].sum(axis=1) >= k))

        width = n
    else:
        raise ValueError(f"mode must be 'gnp' or 'iid', got {mode!r}")
    hits = sum(run_blocks(block, samples, seed, width=width, workers=workers))
    info = params.to_dict() | {"eps": eps, "mode": mode, "threshold": k}
    return _proportion(hits, samples, Estimator.NAIVE, seed, info)


# ---------------------------------------------------------------------------
# exponential tilting of the truncated sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TiltedBinomial:
    """Law of Z = X 1{X <= R}, X ~ Bin(N, p), and its tilt by exp(h C(Z, r))."""

    N: int
    p: float
    r: int
    h: float
    R: int
    log_zeta: np.ndarray
    log_Lambda: float

    @property
    def zeta(self) -> DiscreteDistribution:
        return DiscreteDistribution.from_dense(self.log_zeta)

    def tilted_log_pmf(self) -> np.ndarray:
        s = comb_table(self.R, self.r)
        return self.log_zeta + self.h * s - self.log_Lambda


def _truncated_log_zeta(N: int, p: float, R: int) -> np.ndarray:
    logpmf = _binomial_log_pmf(N, p)
    lz = logpmf[: R + 1].copy()
    if R < N:
        lz[0] = np.logaddexp(lz[0], logsumexp(logpmf[R + 1:]))
    return lz


def log_mgf(log_zeta: np.ndarray, r: int, h: float) -> float:
    """Lambda(h) = log E exp(h C(Z, r))."""
    s = comb_table(log_zeta.size - 1, r)
    return logsumexp(log_zeta + h * s)


def tilted_binomial(N: int, p: float, r: int, R: int, h: float) -> TiltedBinomial:
    if R < r:
        raise ValueError("cutoff R must be >= r, otherwise Y' is identically zero")
    R = min(R, N)
    lz = _truncated_log_zeta(N, p, R)
    return TiltedBinomial(N, p, r, h, R, lz, log_mgf(lz, r, h))


def lambda_prime(log_zeta: np.ndarray, r: int, h: float) -> float:
    s = comb_table(log_zeta.size - 1, r)
    w = log_zeta + h * s
    w = np.exp(w - w.max())
    return float(np.sum(s * w) / np.sum(w))


def optimal_tilt(log_zeta: np.ndarray, r: int, t: float, h_max: float = 50.0) -> float:
    """Solve Lambda'(h) = t by bisection (Lambda' is increasing)."""
    if lambda_prime(log_zeta, r, 0.0) >= t:
        return 0.0
    hi = 1.0
    while lambda_prime(log_zeta, r, hi) < t:
        hi *= 2.0
        if hi > h_max:
            raise ValueError("t exceeds the largest attainable mean of C(Z, r)")
    return bisect(lambda h: lambda_prime(log_zeta, r, h) - t, 0.0, hi, xtol=1e-12)


def default_cutoff(N: int, p: float, r: int, nu: float, eps: float) -> int:
    """R = ceil(eta M), eta = log(1/p)^-2, M = min((r! eps nu)^{1/r}, N), kept in [r, N]."""
    eta = math.log(1.0 / p) ** -2
    M = min((math.factorial(r) * eps * nu) ** (1.0 / r), N)
    return int(max(r, min(N, math.ceil(eta * M))))


def exp_moment_bound_log(n: int, N: int, p: float, r: int, eps: float, R: int,
                         h: float | None = None) -> float:
    """n (Lambda(h) - h t) with t = (1+eps) C(N,r) p^r; bounds log P(Y' >= n t)."""
    h = math.log1p(eps) if h is None else h
    tb = tilted_binomial(N, p, r, R, h)
    t = (1.0 + eps) * math.comb(N, r) * p**r
    return n * (tb.log_Lambda - h * t)


def tilted_tail(n: int, N: int, p: float, r: int, eps: float, R: int | None = None,
                h: float | None = None, samples: int = 100_000, seed: int = 0,
                optimize_h: bool = False, workers: int | None = None) -> TailEstimate:
    """Importance-sampling estimate of P(Y' >= (1+eps) nu).

    Each Z_i is drawn from the tilted law proportional to exp(h C(j, r)) zeta_j;
    a draw is weighted by exp(n Lambda(h) - h Y'). The default tilt is
    log(1 + eps).
    """
    nu = n * math.comb(N, r) * p**r
    notes = {}
    if R is None:
        R = default_cutoff(N, p, r, nu, eps)
        notes["default_cutoff"] = True
    if R < r:
        raise ValueError("cutoff R must be >= r, otherwise Y' is identically zero")
    t = (1.0 + eps) * math.comb(N, r) * p**r
    if optimize_h:
        h = optimal_tilt(_truncated_log_zeta(N, p, min(R, N)), r, t)
        notes["optimized_h"] = True
    elif h is None:
        h = math.log1p(eps)
    tb = tilted_binomial(N, p, r, R, h)
    k = threshold_count(n * t)
    q = np.exp(tb.tilted_log_pmf())
    cdf = np.cumsum(q)
    cdf /= cdf[-1]
    table = comb_table(tb.R, r).astype(np.float64)
    log_scale = n * tb.log_Lambda

    def block(rng, count):
        z = np.searchsorted(cdf, rng.random((count, n)), side="right")
        z = np.minimum(z, tb.R)
        y = table[z].sum(axis=1)
        w = np.where(y >= k, np.exp(log_scale - h * y), 0.0)
        return math.fsum(w), math.fsum(w * w)

    parts = run_blocks(block, samples, seed, width=n, workers=workers)
    s1 = math.fsum(a for a, _ in parts)
    s2 = math.fsum(b for _, b in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    se = math.sqrt(var / max(samples - 1, 1))
    info = {"n": n, "N": N, "p": p, "r": r, "eps": eps, "R": tb.R, "h": h, "threshold": k}
    notes["log_Lambda"] = tb.log_Lambda
    return TailEstimate(mean, _safe_log(mean), se, samples, Estimator.TILTED, seed, info,
                        max(0.0, mean - WILSON_Z * se), mean + WILSON_Z * se, notes)


# ---------------------------------------------------------------------------
# planted hubs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlantedConfig:
    """a full-degree hubs plus one vertex of degree at least b."""

    a: int
    b: float
    delta: float
    b_case: str = "zero"

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("a must be >= 0")
        if self.b < 0:
            raise ValueError("b must be >= 0")

    @property
    def b_int(self) -> int:
        return int(math.ceil(self.b - 1e-12))


def planted_config(params: StarParams, eps: float, delta: float, b_case: str = "auto",
                   window: float = 4.0) -> PlantedConfig:
    """Hub count a = floor((eps+delta) mu / C(n,r)) and the partial-hub degree b.

    ``b_case`` picks the form of b: "zero" (rho -> 0), "finite" (rho
    constant), "infinite" (rho -> infinity); "auto" chooses by regime.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    r, n = params.r, params.n
    x = (eps + delta) * params.rho
    a = math.floor(x)
    if b_case == "auto":
        kind = classify_regime(params, window).kind
        b_case = {RegimeKind.FRACTIONAL: "finite", RegimeKind.DENSE: "infinite"}.get(kind, "zero")
    if b_case == "zero":
        b = (math.factorial(r) * (eps + delta) * params.mu) ** (1.0 / r)
    elif b_case == "finite":
        b = frac(x) ** (1.0 / r) * (n - 1)
    elif b_case == "infinite":
        b = n - 1
    else:
        raise ValueError(f"unknown b_case {b_case!r}")
    return PlantedConfig(a, min(b, n - 1), delta, b_case)


def planted_factor_log(params: StarParams, cfg: PlantedConfig) -> float:
    """log P(hubs 1..a complete, vertex a+1 has degree >= b), exact."""
    n, p, a = params.n, params.p, cfg.a
    if a + 1 >= n:
        raise ValueError("a + 1 must be smaller than n")
    forced = a * (n - 1) - math.comb(a, 2)
    return forced * math.log(p) + binomial_tail_log(n - 1 - a, p, cfg.b_int - a)


def planted_tail_lower(params: StarParams, eps: float, delta: float, samples: int, seed: int,
                       b_case: str = "auto", residual: str = "mean",
                       window: float = 4.0, workers: int | None = None) -> TailEstimate:
    """Lower-bound estimate P(planting) * P(residual graph succeeds).

    ``residual="mean"`` estimates P(X_hat >= (1 - delta/2) mu_hat) for the
    star count X_hat of the residual graph on n-a-1 vertices; together with
    the planting this forces the tail event only once n is large.
    ``residual="certified"`` instead asks the residual graph for exactly the
    star deficit left after planting, counting the a extra neighbours every
    residual vertex has among the hubs, so the product estimates a
    probability that is at most the true tail for every n.
    """
    r, n, p = params.r, params.n, params.p
    cfg = planted_config(params, eps, delta, b_case, window)
    a = cfg.a
    if a + 1 >= n:
        raise ValueError("a + 1 must be smaller than n")
    log_factor = planted_factor_log(params, cfg)
    m = n - a - 1
    hub_degree = max(cfg.b_int, a)
    planted_stars = a * math.comb(n - 1, r) + math.comb(hub_degree, r)
    mu_hat = m * math.comb(max(m - 1, 0), r) * p**r
    if residual == "certified":
        k = threshold_count((1.0 + eps) * params.mu - planted_stars)
        offset = a
    elif residual == "mean":
        k = threshold_count((1.0 - delta / 2.0) * mu_hat)
        offset = 0
    else:
        raise ValueError(f"residual must be 'mean' or 'certified', got {residual!r}")
    table = comb_table(m - 1 + offset, r)
    if m >= 2:
        inc = _incidence(m)

        def block(rng, count):
            deg = _gnp_degree_block(rng, count, m, p, inc) + offset
            return int(np.count_nonzero(table[deg].sum(axis=1) >= k))

        hits = sum(run_blocks(block, samples, seed, width=inc.shape[0], stream=1,
                              workers=workers))
    else:
        hits = samples if m * math.comb(offset, r) >= k else 0
    q = hits / samples
    q_se = math.sqrt(q * (1 - q) / samples)
    q_lo, q_hi = wilson_interval(hits, samples)
    scale = math.exp(log_factor)
    info = params.to_dict() | {"eps": eps, "delta": delta}
    notes = {"a": a, "b": cfg.b, "b_int": cfg.b_int, "b_case": cfg.b_case,
             "log_factor": log_factor, "residual_mode": residual,
             "residual_estimate": q, "residual_threshold": k, "mu_hat": mu_hat}
    return TailEstimate(scale * q, log_factor + _safe_log(q), scale * q_se, samples,
                        Estimator.PLANTED, seed, info, scale * q_lo, scale * q_hi, notes)


# ---------------------------------------------------------------------------
# negative association, rate comparison
# ---------------------------------------------------------------------------

class NACheck(NamedTuple):
    lhs: float
    rhs: float
    z: float


def na_empirical_check(n: int, N: int, p: float, r: int, R: int, t: float, u: float,
                       samples: int, seed: int, workers: int | None = None) -> NACheck:
    """Empirical P(Y'>=t, Y''>=u) against P(Y'>=t) P(Y''>=u) for i.i.d. Bin(N, p).

    ``z`` is (lhs - rhs) over its delta-method standard error (0 when that
    error vanishes).
    """
    table = comb_table(N, r)
    low_mask = np.arange(N + 1) <= R
    low_table = np.where(low_mask, table, 0)
    high_table = np.where(low_mask, 0, table)

    def block(rng, count):
        x = rng.binomial(N, p, size=(count, n))
        A = low_table[x].sum(axis=1) >= t
        B = high_table[x].sum(axis=1) >= u
        return (int(np.count_nonzero(A & B)), int(np.count_nonzero(A & ~B)),
                int(np.count_nonzero(~A & B)))

    parts = run_blocks(block, samples, seed, width=n, workers=workers)
    n11 = sum(x[0] for x in parts)
    n10 = sum(x[1] for x in parts)
    n01 = sum(x[2] for x in parts)
    S = samples
    a_bar = (n11 + n10) / S
    b_bar = (n11 + n01) / S
    lhs = n11 / S
    rhs = a_bar * b_bar
    # influence function of mean(AB) - mean(A) mean(B)
    vals = {(1, 1): 1 - a_bar - b_bar, (1, 0): -b_bar, (0, 1): -a_bar}
    m1 = (n11 * vals[1, 1] + n10 * vals[1, 0] + n01 * vals[0, 1]) / S
    m2 = (n11 * vals[1, 1] ** 2 + n10 * vals[1, 0] ** 2 + n01 * vals[0, 1] ** 2) / S
    se = math.sqrt(max(m2 - m1 * m1, 0.0) / S)
    z = (lhs - rhs) / se if se > 0 else 0.0
    return NACheck(lhs, rhs, z)


def rate_comparison(params: StarParams, eps: float, estimate: TailEstimate,
                    window: float = 4.0) -> dict:
    """-log(estimate) next to the predicted leading-order rate and Phi_n."""
    if not estimate.estimate > 0:
        raise ValueError("estimate must be positive")
    tag = classify_regime(params, window)
    pred = star_rate_asymptotic(params, eps, tag)
    neg_log = -estimate.log_estimate
    phin = phi_order(params)
    return {
        "params": params.to_dict(),
        "eps": eps,
        "regime": tag.to_dict(),
        "neg_log_estimate": neg_log,
        "prediction": pred,
        "phi_n": phin,
        "ratio_to_prediction": neg_log / pred,
        "ratio_to_phi_n": neg_log / phin,
    }
