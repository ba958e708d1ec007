import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from startail.rate_core import phi, psi
from startail.variational import (
    CURVE_HEADER,
    alpha0,
    alpha0_point,
    alpha1,
    alpha_of_c,
    big_f,
    c_crit,
    c_of_alpha,
    critical_constants,
    curve_samples,
    curves_csv,
    default_curve_alphas,
    delta_star,
    f_alpha,
    f_alpha_prime,
    grid_check,
    grid_minimize,
    rate_function,
    solve,
    stationary_points,
)

# frozen from the 1e6-point grid oracle below (r=2, eps=1)
ALPHA0_R2_E1 = 0.5948414787545935
C_CRIT_R2_E1 = 2.9333


def test_f_alpha_examples():
    assert f_alpha(0.7, 1.0, 1.0, 2) == pytest.approx(0.7)
    assert f_alpha(1.0, 1.0, 1.0, 2) == 1.0
    assert f_alpha(0.7, 1e-14, 1.0, 2) == pytest.approx(float(phi(1.0)), abs=1e-6)


def test_f_alpha_prime_examples():
    a, eps, r = 0.4, 1.0, 2
    assert f_alpha_prime(a, eps, eps, r) == pytest.approx(a / (r * eps ** 0.5))
    assert f_alpha_prime(a, 1e-12, eps, r) > 1e4
    with pytest.raises(ValueError):
        f_alpha_prime(a, 0.0, eps, r)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_f_alpha_prime_matches_central_differences(r):
    a, eps = 0.3, 1.5
    errs = []
    for h in (1e-3, 5e-4):
        e = max(abs((f_alpha(a, d + h, eps, r) - f_alpha(a, d - h, eps, r)) / (2 * h)
                    - f_alpha_prime(a, d, eps, r)) for d in np.linspace(0.2, 1.3, 12))
        errs.append(e)
    assert errs[0] < 1e-5
    assert errs[1] < errs[0] / 3  # O(h^2)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_f_alpha_prime_strictly_convex(r):
    d = np.linspace(0.01, 0.99, 500)
    v = np.array([f_alpha_prime(0.4, x, 1.0, r) for x in d])
    assert np.all(v[:-2] + v[2:] - 2 * v[1:-1] > 0)


def test_alpha_of_c_examples():
    assert alpha_of_c(1.0, 2) == pytest.approx(0.5 * math.sqrt(2), rel=1e-15)
    cs = np.logspace(-3, 8, 50)
    for r in (2, 3, 4):
        a = [alpha_of_c(c, r) for c in cs]
        assert all(x > y for x, y in zip(a, a[1:]))
        for c in cs:
            assert c_of_alpha(alpha_of_c(c, r), r) == pytest.approx(c, rel=1e-12)


def test_alpha0_grid_oracle():
    d = np.linspace(0, 1, 10**6)
    grid = float(np.max(2 * np.sqrt(d) * np.log(2 - d)))
    assert alpha0(1.0, 2) == pytest.approx(grid, abs=1e-6)
    assert alpha0(1.0, 2) == pytest.approx(ALPHA0_R2_E1, abs=1e-12)
    assert alpha0(1e-4, 2) < 1e-2
    assert alpha0(2.0, 2) > alpha0(1.0, 2)


def test_stationary_points_structure():
    eps, r = 1.0, 2
    a0 = alpha0(eps, r)
    assert stationary_points(a0 * 1.01, eps, r) is None
    dm, dp = stationary_points(a0, eps, r)
    assert abs(dp - dm) < 1e-6
    dm, dp = stationary_points(1e-6, eps, r)
    assert eps - dp < 1e-3
    dm, dp = stationary_points(0.5 * a0, eps, r)
    assert 0 < dm < dp < eps
    assert f_alpha_prime(0.5 * a0, dm, eps, r) == pytest.approx(0, abs=1e-9)
    assert f_alpha_prime(0.5 * a0, dp, eps, r) == pytest.approx(0, abs=1e-9)


def test_big_f_properties():
    eps, r = 1.0, 2
    a0 = alpha0(eps, r)
    alphas = np.linspace(a0 / 100, a0, 100)
    F = [big_f(a, eps, r) for a in alphas]
    assert all(x < y for x, y in zip(F, F[1:]))
    assert big_f(1e-4, eps, r) <= 1e-4 * eps ** 0.5
    assert big_f(a0, eps, r) > phi(eps)
    with pytest.raises(ValueError):
        big_f(1.1 * a0, eps, r)


@pytest.mark.parametrize("r", [2, 3])
@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_alpha1_root(r, eps):
    a1 = alpha1(eps, r)
    assert 0 < a1 < alpha0(eps, r)
    ph = phi(eps)
    assert big_f(a1 * (1 - 1e-6), eps, r) < ph < big_f(a1 * (1 + 1e-6), eps, r)


def test_critical_constants_values():
    cc = critical_constants(1.0, 2)
    assert cc.alpha1 < cc.alpha0
    assert cc.c_crit == pytest.approx(c_of_alpha(cc.alpha1, 2))
    assert cc.c_crit == pytest.approx(C_CRIT_R2_E1, abs=1e-4)
    assert alpha1(2.0, 2) > alpha1(1.0, 2)
    assert c_crit(2.0, 2) < c_crit(1.0, 2)
    d, a0 = alpha0_point(1.0, 2)
    assert a0 == cc.alpha0 and d == cc.delta_touch


def test_solve_c_zero_and_below_crit():
    s = solve(0.0, 1.0, 2)
    assert s.value == phi(1.0) and s.minimizers == (0.0,)
    cc = c_crit(1.0, 2)
    assert solve(0.999 * cc, 1.0, 2).minimizers == (0.0,)
    assert solve(cc, 1.0, 2).minimizers[0] == 0.0
    assert len(solve(cc, 1.0, 2).minimizers) == 2
    assert rate_function(0.99 * cc, 1.0, 2) == phi(1.0)
    assert rate_function(1.01 * cc, 1.0, 2) < phi(1.0)


def test_solution_minimizers_attain_value():
    for c in (0.5, 2.9333, 10, 1e3):
        s = solve(c, 1.0, 3)
        for m in s.minimizers:
            assert abs(s.objective(m) - s.value) <= 1e-9


def test_delta_star():
    eps, r = 1.0, 2
    cc = c_crit(eps, r)
    cs = cc * np.logspace(np.log10(1.01), 6, 60)
    ds = [delta_star(c, eps, r) for c in cs]
    assert all(x < y for x, y in zip(ds, ds[1:]))
    assert all(0 < d < eps for d in ds)
    with pytest.raises(ValueError):
        delta_star(cc, eps, r)
    for c in (1.5 * cc, 100 * cc):
        g_arg, _ = grid_minimize(c, eps, r)
        assert abs(g_arg - delta_star(c, eps, r)) <= 1e-4


def test_grid_check_reports():
    out = grid_check(10.0, 1.0, 2, points=10**5, value_tol=1e-5, delta_tol=1e-3)
    assert out["ok"]


@pytest.mark.parametrize("r", [2, 3, 4])
def test_alpha_orders_on_eps_grid(r):
    eps = np.geomspace(0.1, 10, 15)
    a0 = [alpha0(e, r) for e in eps]
    a1 = [alpha1(e, r) for e in eps]
    cc = [c_crit(e, r) for e in eps]
    assert all(x < y for x, y in zip(a1, a1[1:]))
    assert all(x >= y for x, y in zip(a0, a1))
    assert all(x > y for x, y in zip(cc, cc[1:]))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.floats(0.1, 5.0), st.floats(0.01, 1e4))
def test_solve_matches_grid_property(r, eps, c):
    s = solve(c, eps, r)
    _, g = grid_minimize(c, eps, r, points=2 * 10**5)
    assert s.value <= g + 1e-12
    assert g - s.value <= 1e-5


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.floats(0.1, 5.0), st.floats(0.1, 1e3))
def test_rate_continuous_in_eps(r, eps, c):
    assert abs(rate_function(c, eps + 1e-6, r) - rate_function(c, eps, r)) <= 1e-4


def test_rate_grows_with_eps():
    # grows like sqrt(eps) at fixed c
    v = [rate_function(5.0, e, 2) for e in (1, 10, 100, 1e3, 1e4, 1e5, 1e6)]
    assert all(x < y for x, y in zip(v, v[1:]))
    assert v[-1] > 100


def test_large_c_ratio_below_one():
    for c in (1e2, 1e4, 1e6):
        ratio = rate_function(c, 1.0, 2) / (psi(2, 1.0) * c ** -0.5)
        assert ratio < 1


def test_curves():
    rows = curve_samples(0.4, 1.0, 2, points=1000)
    assert rows.shape == (1000, 4)
    assert rows[-1, 0] == 1.0 and rows[0, 0] > 0
    text = curves_csv(0.4, 1.0, 2, points=10)
    rd = list(csv.reader(io.StringIO(text)))
    assert tuple(rd[0]) == CURVE_HEADER == ("delta", "f", "g", "h")
    assert len(rd) == 11
    a = default_curve_alphas(1.0, 2)
    assert a[1] == alpha1(1.0, 2) and a[2] == alpha0(1.0, 2)


def test_touching_at_alpha0():
    d, a0 = alpha0_point(1.0, 2)
    assert f_alpha_prime(a0, d, 1.0, 2) == pytest.approx(0.0, abs=1e-9)
