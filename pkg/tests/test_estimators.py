import warnings

import numpy as np
import pytest

from expsel import (
    Dataset,
    ModelSubset,
    NonFinite,
    PenaltyConfig,
    RankDeficient,
    SolverOptions,
    compute_adaptive_weights,
    expectile_loss,
    expectile_score,
    fit_adaptive_lasso_expectile,
    fit_expectile,
    fit_lasso_expectile,
    fit_least_squares,
    fit_quantile,
    linear_predictor,
)
from expsel.estimators import FitResult

from conftest import full_subset, make_instance


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def scalar_grid_min(fun, lo=-10.0, hi=10.0, coarse=20001, refine=60):
    """Dense grid + golden-section refinement for 1-d convex objectives."""
    grid = np.linspace(lo, hi, coarse)
    vals = np.array([fun(b) for b in grid])
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, coarse - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(refine):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def grid_min_2d(fun, lo=-5.0, hi=5.0, step=1e-3):
    """Coarse 2-d scan with two local refinement passes."""
    axis = np.arange(lo, hi + 1e-9, 0.05)
    best = None
    for b1 in axis:
        for b2 in axis:
            v = fun(b1, b2)
            if best is None or v < best[0]:
                best = (v, b1, b2)
    _, c1, c2 = best
    for width, st in ((0.06, 1e-3), (2e-3, 5e-5)):
        a1 = np.arange(c1 - width, c1 + width + 1e-12, st)
        a2 = np.arange(c2 - width, c2 + width + 1e-12, st)
        best = None
        for b1 in a1:
            for b2 in a2:
                v = fun(b1, b2)
                if best is None or v < best[0]:
                    best = (v, b1, b2)
        _, c1, c2 = best
    return c1, c2


# ---------------------------------------------------------------------------
# plain expectile / least squares
# ---------------------------------------------------------------------------

def test_intercept_only_symmetric_pair():
    data = Dataset(np.zeros((2, 1)), np.array([-1.0, 1.0]))
    fit = fit_expectile(data, ModelSubset((), 1), 0.5, intercept=True)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.beta.shape == (0,)


def test_half_tau_matches_least_squares():
    data, _ = make_instance(seed=3, n=30, p=4)
    sub = full_subset(4)
    fe = fit_expectile(data, sub, 0.5)
    ls = fit_least_squares(data, sub)
    np.testing.assert_allclose(fe.beta, ls.beta, rtol=1e-8)


def test_least_squares_exact_line():
    x = np.linspace(-2, 3, 9).reshape(-1, 1)
    data = Dataset(x, x.ravel())
    fit = fit_least_squares(data, ModelSubset((1,), 1))
    assert fit.beta[0] == pytest.approx(1.0, abs=1e-12)


def test_least_squares_intercept_only_mean():
    data = Dataset(np.zeros((3, 1)), np.array([1.0, 2.0, 3.0]))
    fit = fit_least_squares(data, ModelSubset((), 1), intercept=True)
    assert fit.intercept == pytest.approx(2.0)


def test_expectile_matches_ls_cross_check():
    data, _ = make_instance(seed=11, n=20, p=3)
    sub = full_subset(3)
    fe = fit_expectile(data, sub, 0.5)
    ls = fit_least_squares(data, sub)
    np.testing.assert_allclose(fe.beta, ls.beta, rtol=1e-8, atol=1e-12)


def test_expectile_1d_against_grid_oracle():
    rng = np.random.default_rng(81)
    x = rng.standard_normal(8)
    y = 1.7 * x + rng.standard_normal(8)
    data = Dataset(x.reshape(-1, 1), y)
    tau = 0.7
    fit = fit_expectile(data, ModelSubset((1,), 1), tau)

    def objective(b):
        return float(np.sum(expectile_loss(y - x * b, tau)))

    oracle = scalar_grid_min(objective)
    assert fit.beta[0] == pytest.approx(oracle, abs=1e-6)


def test_first_order_condition_holds():
    data, _ = make_instance(seed=5, n=50, p=5)
    sub = full_subset(5)
    for tau in (0.2, 0.5, 0.8):
        fit = fit_expectile(data, sub, tau)
        r = data.y - linear_predictor(data.x, sub, fit)
        grad = data.x.T @ expectile_score(r, tau) / data.n
        assert fit.converged
        assert np.abs(grad).max() <= 1e-8


def test_irls_objective_monotone():
    data, _ = make_instance(seed=9, n=60, p=4, sigma=2.0)
    opts = SolverOptions(record_objective=True)
    fit = fit_expectile(data, full_subset(4), 0.85, opts)
    path = np.array(fit.objective_path)
    assert (np.diff(path) <= 1e-12 * (1.0 + path[:-1])).all()


def test_reflection_negated_response():
    data, _ = make_instance(seed=13, n=40, p=3, tau_shift=0.4)
    flipped = Dataset(data.x, -data.y)
    sub = full_subset(3)
    for tau in (0.25, 0.6):
        a = fit_expectile(data, sub, tau)
        b = fit_expectile(flipped, sub, 1 - tau)
        np.testing.assert_allclose(a.beta, -b.beta, atol=1e-10)


def test_intercept_only_monotone_in_tau():
    rng = np.random.default_rng(2)
    data = Dataset(np.zeros((200, 1)), rng.exponential(size=200))
    sub = ModelSubset((), 1)
    levels = [0.05, 0.2, 0.5, 0.8, 0.95]
    fits = [fit_expectile(data, sub, t, intercept=True).intercept for t in levels]
    assert all(a <= b + 1e-12 for a, b in zip(fits, fits[1:]))


def test_rank_deficiency_ridge_and_strict():
    rng = np.random.default_rng(4)
    col = rng.standard_normal((30, 1))
    x = np.hstack([col, col])  # exact duplicate
    data = Dataset(x, col.ravel() + 0.1 * rng.standard_normal(30))
    sub = full_subset(2)
    fit = fit_expectile(data, sub, 0.5)
    assert fit.regularized
    with pytest.raises(RankDeficient):
        fit_expectile(data, sub, 0.5, SolverOptions(ridge_fallback=False))


def test_nonfinite_rejected_at_construction():
    with pytest.raises(NonFinite):
        Dataset(np.array([[1.0], [np.nan]]), np.array([1.0, 2.0]))
    with pytest.raises(NonFinite):
        Dataset(np.ones((2, 1)), np.array([1.0, np.inf]))


# ---------------------------------------------------------------------------
# quantile baseline
# ---------------------------------------------------------------------------

def test_median_intercepts():
    d1 = Dataset(np.zeros((3, 1)), np.array([1.0, 2.0, 100.0]))
    assert fit_quantile(d1, ModelSubset((), 1), 0.5, intercept=True).intercept == pytest.approx(2.0, abs=1e-4)
    d2 = Dataset(np.zeros((4, 1)), np.array([-5.0, 0.0, 0.0, 7.0]))
    assert fit_quantile(d2, ModelSubset((), 1), 0.5, intercept=True).intercept == pytest.approx(0.0, abs=1e-4)


def test_quantile_1d_breakpoint_oracle():
    rng = np.random.default_rng(15)
    x = rng.standard_normal(15)
    y = -0.8 * x + rng.laplace(size=15)
    data = Dataset(x.reshape(-1, 1), y)
    fit = fit_quantile(data, ModelSubset((1,), 1), 0.5)

    # slope-only median regression attains its minimum at a breakpoint y_i/x_i
    def objective(b):
        r = y - x * b
        return float(np.sum(np.where(r < 0, -0.5, 0.5) * r))

    breakpoints = y / x
    oracle = min(breakpoints, key=objective)
    assert fit.beta[0] == pytest.approx(oracle, abs=1e-4)


# ---------------------------------------------------------------------------
# penalized fits
# ---------------------------------------------------------------------------

def test_lasso_zero_penalty_matches_plain():
    data, _ = make_instance(seed=21, n=30, p=3)
    sub = full_subset(3)
    lasso = fit_lasso_expectile(data, sub, 0.7, PenaltyConfig(nu=0.0, standardize=False))
    plain = fit_expectile(data, sub, 0.7)
    np.testing.assert_allclose(lasso.beta, plain.beta, atol=1e-6)


def test_lasso_huge_penalty_all_zero():
    data, _ = make_instance(seed=22, n=30, p=3)
    fit = fit_lasso_expectile(data, full_subset(3), 0.6, PenaltyConfig(nu=1e6))
    assert np.all(fit.beta == 0.0)
    assert fit.active == ()


def test_lasso_2d_against_grid_oracle():
    rng = np.random.default_rng(30)
    x = rng.standard_normal((10, 2))
    y = x @ np.array([1.2, -0.6]) + 0.5 * rng.standard_normal(10)
    data = Dataset(x, y)
    tau, nu = 0.6, 0.1
    fit = fit_lasso_expectile(
        data, full_subset(2), tau, PenaltyConfig(nu=nu, standardize=False)
    )

    def objective(b1, b2):
        r = y - x @ np.array([b1, b2])
        return float(np.mean(expectile_loss(r, tau)) + nu * (abs(b1) + abs(b2)))

    o1, o2 = grid_min_2d(objective)
    assert fit.beta[0] == pytest.approx(o1, abs=1e-4)
    assert fit.beta[1] == pytest.approx(o2, abs=1e-4)


def test_lasso_objective_monotone_across_sweeps():
    data, _ = make_instance(seed=23, n=40, p=4, sigma=2.0)
    opts = SolverOptions(record_objective=True)
    fit = fit_lasso_expectile(
        data, full_subset(4), 0.3, PenaltyConfig(nu=0.05, standardize=False), opts
    )
    path = np.array(fit.objective_path)
    assert (np.diff(path) <= 1e-12 * (1.0 + path[:-1])).all()


def test_adaptive_weights_values():
    def pilot(beta):
        return FitResult(beta=np.asarray(beta), intercept=None, tau=0.5,
                         objective=0.0, iterations=1, converged=True,
                         method="expectile")

    np.testing.assert_allclose(compute_adaptive_weights(pilot([2.0, 0.5]), 1.0), [0.5, 2.0])
    np.testing.assert_allclose(compute_adaptive_weights(pilot([0.01]), 1.0, cap=10.0), [10.0])
    np.testing.assert_allclose(compute_adaptive_weights(pilot([4.0]), 0.5), [0.5])
    # zero pilot hits the floor
    w = compute_adaptive_weights(pilot([0.0]), 1.0, floor=1e-10)
    assert w[0] == pytest.approx(1e10)
    w = compute_adaptive_weights(pilot([0.0]), 1.0, cap=7.0, floor=1e-10)
    assert w[0] == pytest.approx(7.0)


def test_adaptive_zero_lambda_matches_plain():
    data, _ = make_instance(seed=31, n=30, p=3)
    sub = full_subset(3)
    ada = fit_adaptive_lasso_expectile(
        data, sub, 0.6, PenaltyConfig(lam=0.0, standardize=False)
    )
    plain = fit_expectile(data, sub, 0.6)
    np.testing.assert_allclose(ada.beta, plain.beta, atol=1e-6)


def test_adaptive_recovers_sparsity():
    rng = np.random.default_rng(32)
    x = rng.standard_normal((200, 2))
    y = 2.0 * x[:, 0] + 0.05 * rng.standard_normal(200)
    data = Dataset(x, y)
    fit = fit_adaptive_lasso_expectile(
        data, full_subset(2), 0.5, PenaltyConfig(lam=0.1)
    )
    assert fit.beta[1] == 0.0
    assert abs(fit.beta[0] - 2.0) < 0.2
    assert fit.active == (1,)


def test_adaptive_fixed_weights_against_grid_oracle():
    rng = np.random.default_rng(33)
    x = rng.standard_normal((10, 2))
    y = x @ np.array([1.0, 0.8]) + 0.4 * rng.standard_normal(10)
    data = Dataset(x, y)
    lam, w = 0.05, np.array([1.0, 3.0])
    fit = fit_adaptive_lasso_expectile(
        data, full_subset(2), 0.5, PenaltyConfig(lam=lam, standardize=False),
        pilot=w,
    )

    def objective(b1, b2):
        r = y - x @ np.array([b1, b2])
        return float(np.mean(expectile_loss(r, 0.5)) + lam * (w[0] * abs(b1) + w[1] * abs(b2)))

    o1, o2 = grid_min_2d(objective)
    assert fit.beta[0] == pytest.approx(o1, abs=1e-4)
    assert fit.beta[1] == pytest.approx(o2, abs=1e-4)


def test_penalized_kkt_conditions():
    data, _ = make_instance(seed=34, n=80, p=5, sigma=1.0)
    sub = full_subset(5)
    lam, gamma = 0.08, 1.0
    for tau in (0.3, 0.5, 0.8):
        pilot = fit_expectile(data, sub, tau)
        w = compute_adaptive_weights(pilot, gamma)
        fit = fit_adaptive_lasso_expectile(
            data, sub, tau,
            PenaltyConfig(lam=lam, gamma=gamma, standardize=False),
        )
        r = data.y - linear_predictor(data.x, sub, fit)
        grad = data.x.T @ expectile_score(r, tau) / data.n
        for j in range(5):
            if fit.beta[j] != 0.0:
                assert abs(grad[j] - lam * w[j] * np.sign(fit.beta[j])) <= 1e-6
            else:
                assert abs(grad[j]) <= lam * w[j] + 1e-6


def test_standardized_fit_reported_on_original_scale():
    rng = np.random.default_rng(35)
    x = rng.standard_normal((120, 3)) * np.array([1.0, 50.0, 0.02])
    beta = np.array([1.0, 0.04, -30.0])
    y = x @ beta + 0.1 * rng.standard_normal(120) + 5.0
    data = Dataset(x, y)
    fit = fit_adaptive_lasso_expectile(
        data, full_subset(3), 0.5, PenaltyConfig(lam=0.01), intercept=True
    )
    pred = linear_predictor(data.x, full_subset(3), fit)
    assert np.sqrt(np.mean((pred - y) ** 2)) < 0.5
    np.testing.assert_allclose(fit.beta, beta, rtol=0.2)


def test_not_converged_warns_but_returns():
    data, _ = make_instance(seed=36, n=50, p=4, sigma=3.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = fit_expectile(data, full_subset(4), 0.9, SolverOptions(max_iter=1))
    assert not fit.converged
    assert any("IRLS" in str(w.message) for w in caught)
