"""Exact small-scale ground truth.

Log-space distributions of star-count statistics of i.i.d. binomials, exact
enumeration of G(n, p) and of graphs with a prescribed degree sequence, and
the convex-sum minimization used to bound large-degree contributions.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._numeric import comb_table, log_comb, logsumexp, threshold_count, xlogy

DEFAULT_GRAPH_GUARD = 7
DEFAULT_SUPPORT_GUARD = 10**7
NORMALISATION_TOL = 1e-12


class GuardError(ValueError):
    """A size guard protecting an exhaustive computation was exceeded."""

    def __init__(self, guard: str, limit: int, value: int):
        self.guard, self.limit, self.value = guard, limit, value
        super().__init__(f"guard {guard!r} exceeded: {value} > {limit}")


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteDistribution:
    """A pmf on a strictly increasing integer support, stored as log masses."""

    support: np.ndarray
    log_mass: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.int64)
        lm = np.asarray(self.log_mass, dtype=float)
        if s.ndim != 1 or s.shape != lm.shape:
            raise ValueError("support and log_mass must be 1-D and of equal length")
        if s.size and np.any(np.diff(s) <= 0):
            raise ValueError("support must be strictly increasing")
        total = math.exp(logsumexp(lm))
        if abs(total - 1.0) > NORMALISATION_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "log_mass", lm)

    @classmethod
    def from_dense(cls, dense_log: np.ndarray, offset: int = 0) -> "DiscreteDistribution":
        keep = np.flatnonzero(np.isfinite(dense_log))
        return cls(keep + offset, np.asarray(dense_log)[keep])

    def dense(self) -> np.ndarray:
        """Log masses on 0..max(support), -inf where absent."""
        out = np.full(int(self.support[-1]) + 1, -np.inf)
        out[self.support] = self.log_mass
        return out

    def pmf(self) -> np.ndarray:
        return np.exp(self.log_mass)

    def total_log(self) -> float:
        return logsumexp(self.log_mass)

    def mean(self) -> float:
        return float(np.sum(self.support * self.pmf()))

    def log_prob(self, y: int) -> float:
        i = np.searchsorted(self.support, y)
        if i < self.support.size and self.support[i] == y:
            return float(self.log_mass[i])
        return -math.inf

    def tail_log(self, threshold: float) -> float:
        """log P(Y >= threshold)."""
        k = threshold_count(threshold)
        if k <= 0:
            return 0.0
        return logsumexp(self.log_mass[self.support >= k])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["support", "log_mass"])
        for s, lm in zip(self.support, self.log_mass):
            w.writerow([int(s), format(float(lm), ".17g")])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"support": [int(s) for s in self.support],
                "log_mass": [float(v) for v in self.log_mass]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDistribution":
        d = json.loads(text)
        return cls(np.array(d["support"], dtype=np.int64), np.array(d["log_mass"], dtype=float))


def log_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution of two dense log-mass arrays, computed in log space."""
    if np.count_nonzero(np.isfinite(a)) > np.count_nonzero(np.isfinite(b)):
        a, b = b, a
    out = np.full(a.size + b.size - 1, -np.inf)
    for i in np.flatnonzero(np.isfinite(a)):
        seg = out[i:i + b.size]
        np.logaddexp(seg, a[i] + b, out=seg)
    return out


def log_power(a: np.ndarray, n: int, combine=log_convolve) -> np.ndarray:
    """n-fold self-convolution by repeated squaring."""
    if n < 1:
        raise ValueError("n must be >= 1")
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else combine(result, base)
        n >>= 1
        if n:
            base = combine(base, base)
    return result


def _binomial_log_pmf(N: int, p: float) -> np.ndarray:
    ks = range(N + 1)
    return np.array([log_comb(N, k) + xlogy(k, p) + xlogy(N - k, 1.0 - p) for k in ks])


def exact_binomial_pmf(N: int, p: float) -> DiscreteDistribution:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if int(N) != N or N < 0:
        raise ValueError("N must be a non-negative integer")
    return DiscreteDistribution.from_dense(_binomial_log_pmf(int(N), p))


def binomial_tail_log(N: int, p: float, k: int) -> float:
    """Exact log P(Bin(N, p) >= k)."""
    if k <= 0:
        return 0.0
    if k > N:
        return -math.inf
    return logsumexp(_binomial_log_pmf(N, p)[k:])


def _pushforward(N: int, p: float, r: int, keep) -> np.ndarray:
    """Dense log pmf of keep(x)*C(x, r) with x ~ Bin(N, p)."""
    logpmf = _binomial_log_pmf(N, p)
    vals = [math.comb(x, r) if keep(x) else 0 for x in range(N + 1)]
    out = np.full(max(vals) + 1, -np.inf)
    for v, lm in zip(vals, logpmf):
        out[v] = np.logaddexp(out[v], lm)
    return out


def _keep_rule(cutoff: int | None, part: str):
    if cutoff is None or part == "all":
        return lambda x: True
    if part == "low":
        return lambda x: x <= cutoff
    if part == "high":
        return lambda x: x > cutoff
    raise ValueError(f"part must be 'all', 'low' or 'high', got {part!r}")


def exact_Y_distribution(n: int, N: int, p: float, r: int, cutoff: int | None = None,
                         part: str = "low",
                         support_guard: int = DEFAULT_SUPPORT_GUARD) -> DiscreteDistribution:
    """Exact law of sum_i C(X_i, r), X_i i.i.d. Bin(N, p).

    With ``cutoff`` R the sum is restricted to terms with X_i <= R
    (``part="low"``, the statistic Y') or X_i > R (``part="high"``, Y'').
    """
    size = n * math.comb(N, r) + 1
    if size > support_guard:
        raise GuardError("support", support_guard, size)
    single = _pushforward(N, p, r, _keep_rule(cutoff, part))
    return DiscreteDistribution.from_dense(log_power(single, n))


def iid_threshold(n: int, N: int, p: float, r: int, eps: float) -> float:
    return (1.0 + eps) * n * math.comb(N, r) * p**r


def exact_iid_tail(n: int, N: int, p: float, r: int, eps: float, cutoff: int | None = None,
                   part: str = "low", support_guard: int = DEFAULT_SUPPORT_GUARD) -> float:
    """log P(Y >= (1+eps) nu), nu = n C(N, r) p^r, optionally for Y' or Y''."""
    dist = exact_Y_distribution(n, N, p, r, cutoff, part, support_guard)
    return dist.tail_log(iid_threshold(n, N, p, r, eps))


# ---------------------------------------------------------------------------
# degree sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]

    def __post_init__(self):
        degs = tuple(int(d) for d in self.degrees)
        n = len(degs)
        if any(d < 0 or d > max(n - 1, 0) for d in degs):
            raise ValueError(f"degrees must lie in [0, {n - 1}]")
        object.__setattr__(self, "degrees", degs)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def degree_sum(self) -> int:
        return sum(self.degrees)

    @property
    def even(self) -> bool:
        return self.degree_sum % 2 == 0

    @property
    def m(self) -> int:
        if not self.even:
            raise ValueError("odd degree sum: no edge count")
        return self.degree_sum // 2

    @property
    def lambda_density(self) -> Fraction:
        return Fraction(self.degree_sum, 2 * math.comb(self.n, 2))


def _as_seq(d) -> DegreeSequence:
    return d if isinstance(d, DegreeSequence) else DegreeSequence(tuple(d))


def erdos_gallai(degrees: Sequence[int]) -> bool:
    """Whether a simple graph with these degrees exists."""
    d = sorted((int(x) for x in degrees), reverse=True)
    n = len(d)
    if any(x < 0 or x > n - 1 for x in d) or sum(d) % 2:
        return False
    prefix = 0
    for k in range(1, n + 1):
        prefix += d[k - 1]
        rhs = k * (k - 1) + sum(min(x, k) for x in d[k:])
        if prefix > rhs:
            return False
    return True


@lru_cache(maxsize=None)
def _count_sorted(seq: tuple[int, ...]) -> int:
    # seq is sorted descending; the first vertex picks its neighbours among the rest
    if not seq or seq[0] == 0:
        return 1
    d0, rest = seq[0], seq[1:]
    if d0 > len(rest):
        return 0
    total = 0
    for nbrs in itertools.combinations(range(len(rest)), d0):
        residual = list(rest)
        ok = True
        for j in nbrs:
            if residual[j] == 0:
                ok = False
                break
            residual[j] -= 1
        if not ok or not erdos_gallai(residual):
            continue
        total += _count_sorted(tuple(sorted(residual, reverse=True)))
    return total


def count_graphs_with_degrees(d, guard: int = DEFAULT_GRAPH_GUARD) -> int:
    """Number g(d) of labelled simple graphs with degree sequence d.

    Vertices are processed highest residual degree first; every neighbour
    choice is pruned by the Erdos-Gallai test on the residual sequence, and
    residual sequences are memoized up to relabelling.
    """
    d = _as_seq(d)
    if d.n > guard:
        raise GuardError("graph_n", guard, d.n)
    if not d.even:
        return 0
    return _count_sorted(tuple(sorted(d.degrees, reverse=True)))


class McKayWormald(NamedTuple):
    log_estimate: float
    condition_holds: bool
    degenerate: bool
    gamma_n: float


def mckay_wormald_estimate(d) -> McKayWormald:
    """Log of the asymptotic enumeration formula for g(d).

    ``condition_holds`` reports the finite proxy max_i d_i <= m^{1/4} of its
    hypothesis. Densities 0 and 1 are degenerate and give -inf.
    """
    d = _as_seq(d)
    n = d.n
    pairs = math.comb(n, 2)
    degs = np.array(d.degrees, dtype=float)
    m = d.degree_sum / 2.0
    lam = m / pairs
    dbar = degs.mean()
    gamma = (np.sum(degs**2) - n * dbar**2) / (n - 1) ** 2
    cond = m > 0 and max(d.degrees) <= m**0.25
    if lam <= 0.0 or lam >= 1.0:
        return McKayWormald(-math.inf, cond, True, float(gamma))
    log_est = (
        0.5 * math.log(2.0) + 0.25 - (gamma / (2.0 * lam * (1.0 - lam))) ** 2
        + pairs * (xlogy(lam, lam) + xlogy(1.0 - lam, 1.0 - lam))
        + sum(log_comb(n - 1, k) for k in d.degrees)
    )
    return McKayWormald(float(log_est), cond, False, float(gamma))


def exact_degree_measures(n: int, p: float, d, guard: int = DEFAULT_GRAPH_GUARD) -> tuple[float, float]:
    """(log P_D(d), log P_B(d)): degree sequence of G(n,p) vs i.i.d. Bin(n-1, p)."""
    d = _as_seq(d)
    if d.n != n:
        raise ValueError("sequence length must equal n")
    if n > guard:
        raise GuardError("graph_n", guard, n)
    log_pb = sum(log_comb(n - 1, k) + xlogy(k, p) + xlogy(n - 1 - k, 1.0 - p) for k in d.degrees)
    g = count_graphs_with_degrees(d, guard)
    if g == 0:
        return -math.inf, log_pb
    m = d.m
    log_pd = math.log(g) + xlogy(m, p) + xlogy(math.comb(n, 2) - m, 1.0 - p)
    return log_pd, log_pb


def degree_sequences(n: int) -> Iterable[DegreeSequence]:
    for degs in itertools.product(range(n), repeat=n):
        yield DegreeSequence(degs)


# ---------------------------------------------------------------------------
# convex sums
# ---------------------------------------------------------------------------

def _ceil_root(x: int, r: int) -> int:
    """Smallest integer m >= 0 with m**r >= x."""
    if x <= 0:
        return 0
    m = max(int(round(x ** (1.0 / r))), 0)
    while m**r < x:
        m += 1
    while m > 0 and (m - 1) ** r >= x:
        m -= 1
    return m


def convex_sum_min(r: int, N: int, n: int, t) -> int:
    """Least sum m_1+...+m_n over integers in [0, N] with sum m_i^r >= t.

    Closed form floor(t/N^r) N + min{m : m^r >= {t/N^r} N^r}.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    t = Fraction(t)
    top = N**r
    if t < 0 or t > n * top:
        raise ValueError(f"t must lie in [0, {n * top}]")
    q = math.floor(t / top)
    rem = t - q * top
    b = _ceil_root(math.ceil(rem), r)
    return q * N + b


# ---------------------------------------------------------------------------
# exhaustive G(n, p)
# ---------------------------------------------------------------------------

def _edge_list(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _pattern_degrees(edges: list[tuple[int, int]], n: int) -> np.ndarray:
    """Degree vectors of all 2^len(edges) edge subsets (bit j = edge j)."""
    k = len(edges)
    codes = np.arange(1 << k, dtype=np.int64)
    deg = np.zeros((1 << k, n), dtype=np.int16)
    for j, (u, v) in enumerate(edges):
        bit = ((codes >> j) & 1).astype(np.int16)
        deg[:, u] += bit
        deg[:, v] += bit
    return deg


@lru_cache(maxsize=32)
def star_edge_counts(n: int, r: int) -> np.ndarray:
    """counts[s, m]: number of labelled graphs on n vertices with s r-stars and m edges.

    Graphs are enumerated as (low, high) halves of the edge bitmask; the
    degree vectors of each half are tabulated once and added.
    """
    edges = _edge_list(n)
    E = len(edges)
    low_k = min(E, 14)
    low, high = edges[:low_k], edges[low_k:]
    deg_low = _pattern_degrees(low, n)
    deg_high = _pattern_degrees(high, n)
    m_low = deg_low.sum(axis=1) // 2
    m_high = deg_high.sum(axis=1) // 2
    table = comb_table(n - 1, r)
    smax = n * math.comb(n - 1, r)
    counts = np.zeros((smax + 1) * (E + 1), dtype=np.int64)
    for h in range(deg_high.shape[0]):
        deg = deg_low + deg_high[h]
        stars = table[deg].sum(axis=1)
        key = stars * (E + 1) + (m_low + m_high[h])
        counts += np.bincount(key, minlength=counts.size)
    return counts.reshape(smax + 1, E + 1)


def exact_gnp_star_tail(n: int, p: float, r: int, eps: float,
                        guard: int = DEFAULT_GRAPH_GUARD) -> float:
    """Exact log P(X >= (1+eps) mu) for the r-star count X of G(n, p)."""
    if n > guard:
        raise GuardError("graph_n", guard, n)
    mu = n * math.comb(n - 1, r) * p**r
    k = threshold_count((1.0 + eps) * mu)
    if k <= 0:
        return 0.0
    counts = star_edge_counts(n, r)
    E = counts.shape[1] - 1
    if k >= counts.shape[0]:
        return -math.inf
    by_m = counts[k:].sum(axis=0)
    terms = [math.log(int(c)) + xlogy(m, p) + xlogy(E - m, 1.0 - p)
             for m, c in enumerate(by_m) if c > 0]
    return logsumexp(terms)


def exact_gnp_star_distribution(n: int, p: float, r: int,
                                guard: int = DEFAULT_GRAPH_GUARD) -> DiscreteDistribution:
    if n > guard:
        raise GuardError("graph_n", guard, n)
    counts = star_edge_counts(n, r)
    E = counts.shape[1] - 1
    out = np.full(counts.shape[0], -np.inf)
    for s in range(counts.shape[0]):
        terms = [math.log(int(c)) + xlogy(m, p) + xlogy(E - m, 1.0 - p)
                 for m, c in enumerate(counts[s]) if c > 0]
        if terms:
            out[s] = logsumexp(terms)
    return DiscreteDistribution.from_dense(out)


# ---------------------------------------------------------------------------
# joint law of the split sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Dense joint log pmf of (Y', Y''); rows index Y', columns Y''."""

    log_mass: np.ndarray

    @property
    def ypp_degenerate(self) -> bool:
        return self.log_mass.shape[1] == 1

    @property
    def yp_degenerate(self) -> bool:
        return self.log_mass.shape[0] == 1

    def survival(self) -> np.ndarray:
        """S[t, u] = P(Y' >= t, Y'' >= u) on the dense grid."""
        P = np.exp(self.log_mass)
        return np.flip(np.cumsum(np.cumsum(np.flip(P, (0, 1)), axis=0), axis=1), (0, 1))

    def marginal(self, axis: int) -> DiscreteDistribution:
        dense = np.array([logsumexp(row) for row in (self.log_mass if axis == 0 else self.log_mass.T)])
        return DiscreteDistribution.from_dense(dense)

    def joint_tail(self, t: int, u: int) -> float:
        S = self.survival()
        t, u = max(int(t), 0), max(int(u), 0)
        if t >= S.shape[0] or u >= S.shape[1]:
            return 0.0
        return float(S[t, u])

    def na_violations(self, slack: float = 1e-12) -> list[tuple[int, int, float, float]]:
        """(t, u, lhs, rhs) wherever P(Y'>=t, Y''>=u) > P(Y'>=t) P(Y''>=u) + slack."""
        S = self.survival()
        rhs = np.outer(S[:, 0], S[0, :])
        bad = np.argwhere(S > rhs + slack)
        return [(int(t), int(u), float(S[t, u]), float(rhs[t, u])) for t, u in bad]


def _log_convolve2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.count_nonzero(np.isfinite(a)) > np.count_nonzero(np.isfinite(b)):
        a, b = b, a
    out = np.full((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), -np.inf)
    for i, j in np.argwhere(np.isfinite(a)):
        seg = out[i:i + b.shape[0], j:j + b.shape[1]]
        np.logaddexp(seg, a[i, j] + b, out=seg)
    return out


def exact_joint_YpYpp(n: int, N: int, p: float, r: int, R: int,
                      support_guard: int = DEFAULT_SUPPORT_GUARD) -> JointDistribution:
    """Exact joint law of (Y', Y'') split at cutoff R, X_i i.i.d. Bin(N, p)."""
    low_max = max((math.comb(x, r) for x in range(min(R, N) + 1)), default=0)
    high_max = max((math.comb(x, r) for x in range(R + 1, N + 1)), default=0)
    size = (n * low_max + 1) * (n * high_max + 1)
    if size > support_guard:
        raise GuardError("support", support_guard, size)
    logpmf = _binomial_log_pmf(N, p)
    single = np.full((low_max + 1, high_max + 1), -np.inf)
    for x, lm in enumerate(logpmf):
        v = math.comb(x, r)
        i, j = (v, 0) if x <= R else (0, v)
        single[i, j] = np.logaddexp(single[i, j], lm)
    return JointDistribution(log_power(single, n, combine=_log_convolve2))
