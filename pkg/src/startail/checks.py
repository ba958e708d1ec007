"""Self-check suites run by ``startail verify``.

Each suite returns a list of :class:`CheckResult`; a suite passes when every
entry is ok.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exact import (
    convex_sum_min,
    count_graphs_with_degrees,
    degree_sequences,
    exact_degree_measures,
    exact_joint_YpYpp,
    mckay_wormald_estimate,
    _binomial_log_pmf,
)
from ._numeric import logsumexp
from .rate_core import binom_point_lower_log, chernoff_upper_log, phi
from .variational import alpha1, c_crit, grid_check, solve

C_FACTORS = (0.1, 0.9, 1.0, 1.1, 10.0, 1e4)
EPS_VALUES = (0.25, 0.5, 1.0, 2.0, 5.0)


@dataclass
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "ok": self.ok, "detail": self.detail}


def convex_sum_bruteforce(r: int, N: int, n: int) -> np.ndarray:
    """best[t] = least sum over vectors in [0, N]^n with sum m_i^r >= t."""
    vecs = np.array(list(itertools.product(range(N + 1), repeat=n)), dtype=np.int64)
    sums = vecs.sum(axis=1)
    pows = (vecs**r).sum(axis=1)
    top = n * N**r
    best = np.full(top + 2, np.iinfo(np.int64).max)
    np.minimum.at(best, pows, sums)
    # least sum among vectors reaching at least t: suffix minimum
    return np.minimum.accumulate(best[::-1])[::-1][: top + 1]


def suite_convex_sum(rs=(2, 3), max_N: int = 6, max_n: int = 5) -> list[CheckResult]:
    out = []
    for r in rs:
        for N in range(1, max_N + 1):
            for n in range(1, max_n + 1):
                brute = convex_sum_bruteforce(r, N, n)
                bad = [t for t in range(brute.size) if convex_sum_min(r, N, n, t) != brute[t]]
                out.append(CheckResult("convex_sum", f"r={r},N={N},n={n}", not bad,
                                       {"values": int(brute.size), "mismatches": len(bad)}))
    return out


def suite_bounds(max_n: int = 30, ps=(0.05, 0.1, 0.3)) -> list[CheckResult]:
    out = []
    for p in ps:
        violations = 0
        checked = 0
        for n in range(1, max_n + 1):
            logpmf = _binomial_log_pmf(n, p)
            for t in range(math.floor(math.e * n * p) + 1, n + 1):
                if not t > math.e * n * p:
                    continue
                tail = logsumexp(logpmf[t:])
                checked += 1
                if tail > chernoff_upper_log(n, p, t) + 1e-12:
                    violations += 1
                if tail < binom_point_lower_log(n, p, t) - 1e-12:
                    violations += 1
        out.append(CheckResult("bounds", f"p={p}", violations == 0,
                               {"checked": checked, "violations": violations}))
    return out


def suite_na(ps=(0.1, 0.3, 0.5), n: int = 3, N: int = 4, r: int = 2, R: int = 2,
             slack: float = 1e-12) -> list[CheckResult]:
    out = []
    for p in ps:
        joint = exact_joint_YpYpp(n, N, p, r, R)
        bad = joint.na_violations(slack)
        out.append(CheckResult("na", f"n={n},N={N},p={p},r={r},R={R}", not bad,
                               {"pairs": int(joint.log_mass.size), "violations": len(bad)}))
    return out


def suite_enumeration(max_n: int = 5) -> list[CheckResult]:
    out = []
    expected = {
        (1, 1): 1, (1, 1, 1, 1): 3, (1,) * 6: 15,
        (2, 2, 2): 1, (2,) * 5: 12,
    }
    for d, g in expected.items():
        got = count_graphs_with_degrees(d)
        out.append(CheckResult("enumeration", f"g{d}", got == g, {"expected": g, "got": got}))
    for n in range(2, max_n + 1):
        logs = [exact_degree_measures(n, 0.3, d)[0] for d in degree_sequences(n)]
        total = math.exp(logsumexp(logs))
        out.append(CheckResult("enumeration", f"sum P_D n={n}", abs(total - 1.0) <= 1e-10,
                               {"total": total}))
    errs = []
    for k in (1, 2, 3):
        d = (1,) * (2 * k)
        est = mckay_wormald_estimate(d)
        g = count_graphs_with_degrees(d)
        errs.append(1.0 if est.degenerate else abs(math.exp(est.log_estimate) - g) / g)
    out.append(CheckResult("enumeration", "McKay-Wormald 1-regular trend",
                           all(a > b for a, b in zip(errs, errs[1:])),
                           {"relative_errors": errs, "diagnostic": True}))
    return out


def suite_variational(rs=(2, 3, 4), eps_values=EPS_VALUES, factors=C_FACTORS,
                      points: int = 1_000_000) -> list[CheckResult]:
    out = []
    for r in rs:
        for eps in eps_values:
            cc = c_crit(eps, r)
            for f in factors:
                c = f * cc
                res = grid_check(c, eps, r, points)
                sol = solve(c, eps, r)
                if f < 1.0:
                    shape = sol.minimizers == (0.0,)
                elif f == 1.0:
                    shape = len(sol.minimizers) == 2 and sol.minimizers[0] == 0.0
                else:
                    shape = len(sol.minimizers) == 1 and 0.0 < sol.minimizers[0] < eps
                out.append(CheckResult("variational", f"r={r},eps={eps},c={f}*c_crit",
                                       bool(res["ok"] and shape),
                                       res | {"minimizers": list(sol.minimizers)}))
    return out


def suite_critical(rs=(2, 3), points: int = 20) -> list[CheckResult]:
    out = []
    grid = np.geomspace(0.1, 10.0, points)
    for r in rs:
        a1 = [alpha1(e, r) for e in grid]
        cc = [c_crit(e, r) for e in grid]
        out.append(CheckResult("critical", f"alpha1 increasing r={r}",
                               all(x < y for x, y in zip(a1, a1[1:])), {}))
        out.append(CheckResult("critical", f"c_crit decreasing r={r}",
                               all(x > y for x, y in zip(cc, cc[1:])), {}))
        bad = 0
        for e, c in zip(grid, cc):
            ph = float(phi(e))
            below = solve(c * 0.99, e, r)
            at = solve(c, e, r)
            above = solve(c * 1.1, e, r)
            if below.value != ph or at.value != ph or not above.value < ph - 1e-8:
                bad += 1
            if below.minimizers != (0.0,) or 0.0 not in at.minimizers or 0.0 in above.minimizers:
                bad += 1
        out.append(CheckResult("critical", f"Poisson characterisation r={r}", bad == 0,
                               {"violations": bad}))
    return out


SUITES = {
    "convex_sum": suite_convex_sum,
    "bounds": suite_bounds,
    "na": suite_na,
    "enumeration": suite_enumeration,
    "variational": suite_variational,
    "critical": suite_critical,
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        return [res for fn in SUITES.values() for res in fn()]
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'") from None
    return fn()
