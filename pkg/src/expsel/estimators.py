"""Coefficient estimation on a fixed design: asymmetric least squares
(expectile) regression fit by iteratively reweighted least squares, its
l1-penalized and adaptively weighted l1-penalized variants fit by exact
cyclic coordinate descent, and ordinary least-squares / median-regression
baselines.

Conventions
-----------
* ``Dataset`` holds the full n-by-p design; a ``ModelSubset`` names the
  1-based columns entering a candidate submodel.
* An intercept, when requested, is an extra unpenalized column handled
  outside the subset; ``FitResult.beta`` always has length ``|subset|``.
* Penalized objectives are normalized per observation:
  ``mean(loss(residuals)) + penalty(beta)``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import NonFinite, RankDeficient, ShapeMismatch
from .losses import check_loss, check_tau, expectile_loss, expectile_score


@dataclass(frozen=True)
class Dataset:
    """An n-by-p design matrix with its response vector.

    Arguments
    ---------
    x : (n, p) array of finite reals, one observation per row.
    y : length-n array of finite responses.
    column_names : optional tuple of p labels, used in reports.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2:
            raise ShapeMismatch(f"design must be 2-d, got shape {x.shape}")
        if x.shape[0] != y.shape[0]:
            raise ShapeMismatch(
                f"design has {x.shape[0]} rows but response has {y.shape[0]}"
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ShapeMismatch("need at least one row and one column")
        if not np.isfinite(x).all():
            raise NonFinite("design matrix contains non-finite entries")
        if not np.isfinite(y).all():
            raise NonFinite("response contains non-finite entries")
        names = self.column_names
        if names is not None:
            names = tuple(str(c) for c in names)
            if len(names) != x.shape[1]:
                raise ShapeMismatch(
                    f"{len(names)} column names for {x.shape[1]} columns"
                )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def rows(self, indices):
        """Dataset restricted to the given row indices (order preserved)."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.x[idx], self.y[idx], self.column_names)


@dataclass(frozen=True, order=True)
class ModelSubset:
    """A candidate submodel: strictly increasing 1-based column indices.

    The empty subset is legal only when an intercept is in force.
    """

    indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        p = int(self.p)
        if p < 1:
            raise ValueError("ambient dimension must be >= 1")
        if any(i < 1 or i > p for i in idx):
            raise ValueError(f"indices must lie in [1, {p}], got {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "p", p)

    @property
    def size(self):
        return len(self.indices)

    def columns(self):
        """0-based column positions for array indexing."""
        return np.asarray([i - 1 for i in self.indices], dtype=int)

    def label(self):
        return "+".join(str(i) for i in self.indices) if self.indices else "(empty)"


@dataclass(frozen=True)
class SolverOptions:
    """Numerical knobs shared by all fitting routines.

    tol : termination threshold on the max absolute coefficient change.
    max_iter : iteration / sweep cap.
    grad_tol : stationarity threshold checked at convergence.
    ridge_fallback : on a singular subset design, add a diagonal jitter of
        ``1e-10 * trace(X'X) / k`` and flag the fit as regularized instead of
        raising ``RankDeficient``.
    record_objective : keep the per-iteration objective path on the result
        (used by monotonicity checks).
    """

    tol: float = 1e-10
    max_iter: int = 200
    grad_tol: float = 1e-8
    ridge_fallback: bool = True
    record_objective: bool = False


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty settings for the l1 and adaptively weighted l1 fits.

    lam : weighted-l1 penalty level; ``None`` selects
        ``sqrt(log(max(p, 2)) / n)`` from the training sample.
    gamma : adaptive-weight exponent in (0, 1].
    nu : plain-l1 level for the pilot initializer; ``None`` mirrors ``lam``.
    cap_weights : cap adaptive weights at ``sqrt(n)``; ``None`` engages the
        cap automatically when the subset is large relative to ``sqrt(n)``.
    weight_floor : pilot magnitudes below this behave as exact zeros, giving
        weight ``weight_floor**(-gamma)`` (or the cap when capping).
    pilot : "expectile", "lasso", or "auto" (plain fit in the small-subset
        regime, l1 fit otherwise).
    standardize : center/scale columns before penalizing, report
        coefficients on the original scale.
    lambda_grid : try ``lam * 2**k`` for k in -4..4 and keep the value
        minimizing ``n*log(mean loss) + n_active*log(n)`` on the training set.
    """

    lam: float = None
    gamma: float = 1.0
    nu: float = None
    cap_weights: bool = None
    weight_floor: float = 1e-10
    pilot: str = "auto"
    standardize: bool = True
    lambda_grid: bool = False

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.nu is not None and self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.pilot not in ("auto", "expectile", "lasso"):
            raise ValueError(f"unknown pilot kind {self.pilot!r}")


@dataclass(frozen=True)
class FitResult:
    """A fitted coefficient vector with solver diagnostics.

    beta : coefficients on the subset's columns (length ``|subset|``).
    intercept : unpenalized intercept, or ``None`` when absent.
    tau : asymmetry level (quantile level for the median baseline, 0.5 for
        least squares).
    objective : final mean per-observation training objective, penalty
        included for penalized fits.
    """

    beta: np.ndarray
    intercept: float
    tau: float
    objective: float
    iterations: int
    converged: bool
    method: str
    regularized: bool = False
    grad_inf: float = None
    active: tuple = None
    weights: tuple = None
    objective_path: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))

    def predict(self, x, subset):
        """Fitted values for the rows of a full-width design matrix."""
        return linear_predictor(x, subset, self)


def linear_predictor(x, subset, fit):
    """Evaluate ``x[:, subset] @ beta (+ intercept)`` on a full design."""
    x = np.asarray(x, dtype=float)
    if fit.beta.shape[0] != subset.size:
        raise ShapeMismatch(
            f"fit has {fit.beta.shape[0]} coefficients for a subset of size {subset.size}"
        )
    yhat = x[:, subset.columns()] @ fit.beta if subset.size else np.zeros(x.shape[0])
    if fit.intercept is not None:
        yhat = yhat + fit.intercept
    return yhat


class NotConvergedWarning(UserWarning):
    """A solver hit its iteration cap before meeting its tolerance."""


# ---------------------------------------------------------------------------
# design assembly and weighted least squares
# ---------------------------------------------------------------------------


def _assemble(data, subset, intercept):
    cols = subset.columns()
    blocks = []
    if intercept:
        blocks.append(np.ones((data.n, 1)))
    if cols.size:
        blocks.append(data.x[:, cols])
    if not blocks:
        raise ValueError("empty model requires an intercept")
    return np.hstack(blocks) if len(blocks) > 1 else blocks[0]


def _rank_jitter(X, k_model, n, opts, what):
    """Return the ridge jitter to apply, raising in strict mode.

    A subset design is treated as deficient when the scaled Gram matrix has
    a relative eigenvalue below ~1e-10, or when there are more columns than
    rows.
    """
    k = X.shape[1]
    gram = X.T @ X
    trace = float(np.trace(gram))
    if trace <= 0.0:
        deficient = True
    else:
        eigs = np.linalg.eigvalsh(gram)
        deficient = X.shape[0] < k or eigs[0] <= 1e-10 * eigs[-1]
    if not deficient:
        return 0.0
    if not opts.ridge_fallback:
        raise RankDeficient(f"singular design for {what} (k={k_model}, n={n})")
    return 1e-10 * max(trace, 1.0) / k


def _wls(X, y, w, jitter):
    Xw = X * w[:, None]
    gram = Xw.T @ X
    if jitter:
        gram = gram + jitter * np.eye(X.shape[1])
    rhs = Xw.T @ y
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        sw = np.sqrt(w)
        return np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]


def _split_coef(coef, intercept):
    if intercept:
        return coef[1:], float(coef[0])
    return coef, None


def _grad_inf(X, r, tau):
    return float(np.abs(X.T @ expectile_score(r, tau)).max() / X.shape[0])


# ---------------------------------------------------------------------------
# unpenalized fits
# ---------------------------------------------------------------------------


def fit_least_squares(data, subset, opts=None, intercept=False):
    """Closed-form least squares on the subset's columns."""
    opts = opts or SolverOptions()
    X = _assemble(data, subset, intercept)
    jitter = _rank_jitter(X, subset.size, data.n, opts, "least squares")
    if jitter:
        coef = _wls(X, data.y, np.ones(data.n), jitter)
    else:
        coef = np.linalg.lstsq(X, data.y, rcond=None)[0]
    r = data.y - X @ coef
    beta, b0 = _split_coef(coef, intercept)
    return FitResult(
        beta=beta,
        intercept=b0,
        tau=0.5,
        objective=float(np.mean(expectile_loss(r, 0.5))),
        iterations=1,
        converged=True,
        method="least_squares",
        regularized=bool(jitter),
        grad_inf=_grad_inf(X, r, 0.5),
    )


def fit_expectile(data, subset, tau, opts=None, intercept=False):
    """Asymmetric least squares by IRLS.

    Repeatedly solves weighted least squares with weights ``tau`` on
    nonnegative residuals and ``1 - tau`` below zero.  Each reweighted
    solution is a Newton step on the convex piecewise-quadratic objective;
    a halving line search keeps the objective non-increasing.  Stops when
    the max coefficient change drops below ``opts.tol``.
    """
    t = check_tau(tau)
    opts = opts or SolverOptions()
    X = _assemble(data, subset, intercept)
    y = data.y
    n = X.shape[0]
    jitter = _rank_jitter(X, subset.size, n, opts, "expectile fit")

    coef = _wls(X, y, np.ones(n), jitter)
    r = y - X @ coef
    obj = float(np.mean(expectile_loss(r, t)))
    path = [obj]
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        w = np.where(r < 0, 1.0 - t, t)
        step = _wls(X, y, w, jitter) - coef
        if not np.isfinite(step).all():
            break
        if np.abs(step).max() < opts.tol:
            converged = True
            break
        # the reweighted solution is a Newton step on a convex objective;
        # halve it if needed so the objective never increases
        scale, accepted = 1.0, False
        while scale >= 2.0 ** -30:
            cand = coef + scale * step
            r_cand = y - X @ cand
            obj_cand = float(np.mean(expectile_loss(r_cand, t)))
            if obj_cand <= obj * (1.0 + 1e-15) + 1e-300:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break
        coef, r, obj = cand, r_cand, obj_cand
        path.append(obj)
        if np.abs(scale * step).max() < opts.tol:
            converged = True
            break

    ginf = _grad_inf(X, r, t)
    converged = converged and ginf <= opts.grad_tol
    if not converged:
        warnings.warn(
            f"expectile IRLS stopped after {iterations} iterations "
            f"(max gradient {ginf:.2e})",
            NotConvergedWarning,
            stacklevel=2,
        )
    beta, b0 = _split_coef(coef, intercept)
    return FitResult(
        beta=beta,
        intercept=b0,
        tau=t,
        objective=obj,
        iterations=iterations,
        converged=converged,
        method="expectile",
        regularized=bool(jitter),
        grad_inf=ginf,
        objective_path=tuple(path) if opts.record_objective else None,
    )


def fit_quantile(data, subset, level=0.5, opts=None, intercept=False):
    """Median / quantile regression by IRLS on a smoothed check loss.

    The loss ``|level - 1(x<0)| * |x|`` is approximated by reweighted least
    squares with weights ``|level - 1(r<0)| / max(|r|, eps)``, and the
    smoothing ``eps`` is decreased geometrically from 1e-2 to 1e-8.
    """
    if not 0.0 < float(level) < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {level!r}")
    q = float(level)
    opts = opts or SolverOptions()
    X = _assemble(data, subset, intercept)
    y = data.y
    jitter = _rank_jitter(X, subset.size, data.n, opts, "quantile fit")

    coef = _wls(X, y, np.ones(data.n), jitter)
    total = 0
    converged = True
    for eps in 10.0 ** np.arange(-2.0, -8.5, -0.5):
        level_tol = max(opts.tol, eps * 1e-4)
        for _ in range(opts.max_iter):
            r = y - X @ coef
            w = np.where(r < 0, 1.0 - q, q) / np.maximum(np.abs(r), eps)
            new = _wls(X, y, w, jitter)
            total += 1
            delta = np.abs(new - coef).max()
            coef = new
            if delta < level_tol:
                break
        else:
            converged = False
    r = y - X @ coef
    if not converged:
        warnings.warn(
            f"smoothed-check IRLS stopped after {total} iterations",
            NotConvergedWarning,
            stacklevel=2,
        )
    beta, b0 = _split_coef(coef, intercept)
    return FitResult(
        beta=beta,
        intercept=b0,
        tau=q,
        objective=float(np.mean(check_loss(r, q))),
        iterations=total,
        converged=converged,
        method="quantile",
        regularized=bool(jitter),
    )


# ---------------------------------------------------------------------------
# exact 1-d coordinate minimization for penalized fits
# ---------------------------------------------------------------------------


def _coordinate_min_expectile(c, x, tau, kappa):
    """Exact minimizer of ``b -> sum_i rho_tau(c_i - x_i*b) + kappa*|b|``.

    The smooth part has a continuous, piecewise-linear, nondecreasing
    derivative with kinks at the residual crossings ``t_i = c_i / x_i``;
    within each inter-kink interval the root has a closed form, so the
    minimizer is found by scanning intervals with cumulative weight flips.
    """
    nz = x != 0.0
    if not nz.any():
        return 0.0
    xs = x[nz]
    cs = c[nz]
    d0 = -2.0 * float(np.sum(np.where(cs < 0, 1.0 - tau, tau) * cs * xs))
    if abs(d0) <= kappa:
        return 0.0
    side = 1.0
    if d0 > kappa:  # descent direction is b < 0; mirror onto b > 0
        side = -1.0
        xs = -xs

    t = cs / xs
    sgn_pos = xs > 0
    # weight while the residual sign is +sign(x): tau if x > 0 else 1-tau;
    # after b passes the crossing the sign flips and so does the weight.
    w_before = np.where(sgn_pos, tau, 1.0 - tau)
    w_after = np.where(sgn_pos, 1.0 - tau, tau)

    varying = t > 0
    w0 = np.where(varying, w_before, w_after)
    s1 = float(np.sum(w0 * xs * cs))
    s2 = float(np.sum(w0 * xs * xs))

    tv = t[varying]
    order = np.argsort(tv, kind="stable")
    tv = tv[order]
    dw = (w_after - w_before)[varying][order]
    xv = xs[varying][order]
    cv = cs[varying][order]

    # cumulative sums give the (s1, s2) pair on every interval between kinks
    d1 = np.concatenate(([0.0], np.cumsum(dw * xv * cv)))
    d2 = np.concatenate(([0.0], np.cumsum(dw * xv * xv)))
    s1_all = s1 + d1
    s2_all = s2 + d2
    lo = np.concatenate(([0.0], tv))
    hi = np.concatenate((tv, [np.inf]))
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = (2.0 * s1_all - kappa) / (2.0 * s2_all)
    ok = (s2_all > 0.0) & (roots > lo) & (roots <= hi)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        # numerical fallback: last interval with positive curvature
        idx = np.flatnonzero(s2_all > 0.0)
        if idx.size == 0:
            return 0.0
        return side * max(float(roots[idx[-1]]), 0.0)
    return side * float(roots[idx[0]])


def _cd_weighted_l1_expectile(X, y, tau, kappa, beta0, opts):
    """Cyclic coordinate descent on ``mean(rho_tau(y - X b)) + sum_j kappa_j |b_j| / n``.

    ``kappa`` is on the unnormalized scale (already multiplied by n); each
    coordinate subproblem is solved exactly, so the objective is
    non-increasing across sweeps.
    """
    n, k = X.shape
    beta = np.asarray(beta0, dtype=float).copy()
    r = y - X @ beta
    cols = [np.ascontiguousarray(X[:, j]) for j in range(k)]

    def objective():
        return float(
            np.mean(expectile_loss(r, tau)) + np.dot(kappa, np.abs(beta)) / n
        )

    path = [objective()]
    iterations = 0
    converged = False
    for iterations in range(1, opts.max_iter + 1):
        delta = 0.0
        for j in range(k):
            xj = cols[j]
            bj = beta[j]
            if bj == 0.0:
                # cheap stationarity check before the full interval scan
                d0 = -float(xj @ expectile_score(r, tau))
                if abs(d0) <= kappa[j]:
                    continue
                c = r
            else:
                c = r + xj * bj
            bnew = _coordinate_min_expectile(c, xj, tau, kappa[j])
            if bnew != bj:
                r = c - xj * bnew
                beta[j] = bnew
                delta = max(delta, abs(bnew - bj))
        if opts.record_objective:
            path.append(objective())
        if delta < opts.tol:
            converged = True
            break
    return beta, r, iterations, converged, path


def _standardize(data, subset, intercept):
    """Column centers/scales for the penalized fits (scale-only without intercept)."""
    cols = subset.columns()
    xs = data.x[:, cols] if cols.size else np.zeros((data.n, 0))
    center = xs.mean(axis=0) if intercept else np.zeros(xs.shape[1])
    scale = xs.std(axis=0)
    scale[scale == 0.0] = 1.0
    return (xs - center) / scale, center, scale


def default_lambda(n, p):
    """Penalty level ``sqrt(log(max(p, 2)) / n)`` used when none is given."""
    return float(np.sqrt(np.log(max(p, 2)) / n))


def compute_adaptive_weights(pilot, gamma, cap=None, floor=1e-10):
    """Per-coefficient penalty weights ``|pilot_j| ** (-gamma)``.

    Pilot magnitudes below ``floor`` count as exact zeros; with a ``cap``
    every weight is truncated at the cap (zero pilots then receive the cap
    itself).
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    mag = np.maximum(np.abs(np.asarray(pilot.beta, dtype=float)), floor)
    w = mag ** (-gamma)
    if cap is not None:
        w = np.minimum(w, float(cap))
    return w


def _fit_penalized(data, subset, tau, kappa_per_coef, penalty, opts, intercept,
                   method, weights=None):
    """Shared driver: standardize, run coordinate descent, back-transform."""
    y = data.y
    n = data.n
    k = subset.size
    if k == 0 and not intercept:
        raise ValueError("empty model requires an intercept")

    if penalty.standardize:
        xs, center, scale = _standardize(data, subset, intercept)
    else:
        xs = data.x[:, subset.columns()] if k else np.zeros((n, 0))
        center = np.zeros(k)
        scale = np.ones(k)
    X = np.hstack([np.ones((n, 1)), xs]) if intercept else xs
    kappa = np.concatenate([[0.0], kappa_per_coef]) if intercept else kappa_per_coef

    beta0 = np.zeros(X.shape[1])
    if intercept:
        beta0[0] = float(np.mean(y))
    beta_std, r, iterations, converged, path = _cd_weighted_l1_expectile(
        X, y, tau, kappa, beta0, opts
    )
    if not converged:
        warnings.warn(
            f"coordinate descent stopped after {iterations} sweeps",
            NotConvergedWarning,
            stacklevel=3,
        )

    if intercept:
        b0_std, b_std = float(beta_std[0]), beta_std[1:]
    else:
        b0_std, b_std = None, beta_std
    beta = b_std / scale
    b0 = b0_std - float(center @ (b_std / scale)) if intercept else None

    active = tuple(
        idx for idx, b in zip(subset.indices, b_std) if b != 0.0
    )
    objective = float(
        np.mean(expectile_loss(r, tau)) + np.dot(kappa, np.abs(beta_std)) / n
    )
    return FitResult(
        beta=beta,
        intercept=b0,
        tau=tau,
        objective=objective,
        iterations=iterations,
        converged=converged,
        method=method,
        grad_inf=_grad_inf(X, r, tau),
        active=active,
        weights=tuple(float(w) for w in weights) if weights is not None else None,
        objective_path=tuple(path) if opts.record_objective else None,
    )


def fit_lasso_expectile(data, subset, tau, penalty=None, opts=None, intercept=False):
    """l1-penalized asymmetric least squares:
    ``mean(rho_tau(y - X_M b)) + nu * ||b||_1`` minimized by exact cyclic
    coordinate descent.  ``nu = 0`` recovers the unpenalized fit.
    """
    t = check_tau(tau)
    penalty = penalty or PenaltyConfig()
    opts = opts or SolverOptions()
    nu = penalty.nu
    if nu is None:
        nu = penalty.lam if penalty.lam is not None else default_lambda(data.n, subset.p)
    kappa = np.full(subset.size, nu * data.n)
    return _fit_penalized(
        data, subset, t, kappa, penalty, opts, intercept, "lasso_expectile"
    )


def fit_adaptive_lasso_expectile(data, subset, tau, penalty=None, opts=None,
                                 intercept=False, pilot=None):
    """Adaptively weighted l1 asymmetric least squares.

    Minimizes ``mean(rho_tau(y - X_M b)) + lam * sum_j w_j |b_j|`` with
    weights ``w_j = |pilot_j| ** (-gamma)`` from a pilot fit on the same
    training rows: the plain expectile fit when the subset is small relative
    to ``sqrt(n)``, the l1 fit with capped weights otherwise.  A precomputed
    ``pilot`` (a ``FitResult`` or a ready-made weight vector over the
    subset's columns) overrides that choice.
    """
    t = check_tau(tau)
    penalty = penalty or PenaltyConfig()
    opts = opts or SolverOptions()
    n = data.n
    lam = penalty.lam if penalty.lam is not None else default_lambda(n, subset.p)

    small_regime = subset.size < np.sqrt(n)
    cap_on = penalty.cap_weights
    if cap_on is None:
        cap_on = not small_regime
    cap = np.sqrt(n) if cap_on else None

    if pilot is None:
        kind = penalty.pilot
        if kind == "auto":
            kind = "expectile" if small_regime else "lasso"
        if kind == "expectile":
            pilot = fit_expectile(data, subset, t, opts, intercept=intercept)
        else:
            pilot = fit_lasso_expectile(
                data, subset, t, penalty, opts, intercept=intercept
            )
    if isinstance(pilot, FitResult):
        w = compute_adaptive_weights(pilot, penalty.gamma, cap, penalty.weight_floor)
    else:
        w = np.asarray(pilot, dtype=float)
        if w.shape != (subset.size,):
            raise ShapeMismatch(
                f"weight vector of length {w.shape} for subset of size {subset.size}"
            )

    lam_values = [lam]
    if penalty.lambda_grid and lam > 0:
        lam_values = [lam * 2.0 ** k for k in range(-4, 5)]

    best = None
    for lv in lam_values:
        fit = _fit_penalized(
            data, subset, t, lv * w * n, penalty, opts, intercept,
            "adaptive_lasso_expectile", weights=w,
        )
        if len(lam_values) == 1:
            return fit
        r = data.y - linear_predictor(data.x, subset, fit)
        resid_loss = max(float(np.mean(expectile_loss(r, t))), 1e-300)
        crit = n * np.log(resid_loss) + len(fit.active) * np.log(n)
        if best is None or crit < best[0]:
            best = (crit, fit)
    return best[1]


def fit_adaptive_lasso_quantile(data, subset, level, penalty=None, opts=None,
                                intercept=False, pilot=None):
    """Adaptively weighted l1 quantile regression baseline.

    Works on the smoothed check loss: alternates residual-driven weight
    updates with weighted-l2 coordinate descent (soft thresholding), the
    smoothing decreasing geometrically as in the unpenalized solver.
    """
    if not 0.0 < float(level) < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {level!r}")
    q = float(level)
    penalty = penalty or PenaltyConfig()
    opts = opts or SolverOptions()
    n = data.n
    lam = penalty.lam if penalty.lam is not None else default_lambda(n, subset.p)

    if pilot is None:
        pilot = fit_quantile(data, subset, q, opts, intercept=intercept)
    small_regime = subset.size < np.sqrt(n)
    cap = None if (penalty.cap_weights is False or
                   (penalty.cap_weights is None and small_regime)) else np.sqrt(n)
    w = compute_adaptive_weights(pilot, penalty.gamma, cap, penalty.weight_floor)

    if penalty.standardize:
        xs, center, scale = _standardize(data, subset, intercept)
    else:
        xs = data.x[:, subset.columns()] if subset.size else np.zeros((n, 0))
        center = np.zeros(subset.size)
        scale = np.ones(subset.size)
    X = np.hstack([np.ones((n, 1)), xs]) if intercept else xs
    kappa = lam * w
    if intercept:
        kappa = np.concatenate([[0.0], kappa])

    coef = np.zeros(X.shape[1])
    if intercept:
        coef[0] = float(np.quantile(data.y, q))
    total = 0
    for eps in 10.0 ** np.arange(-2.0, -8.5, -0.5):
        for _ in range(opts.max_iter):
            r = data.y - X @ coef
            wq = np.where(r < 0, 1.0 - q, q) / np.maximum(np.abs(r), eps)
            # one CD pass on the local weighted-quadratic + l1 surrogate
            delta = 0.0
            for j in range(X.shape[1]):
                xj = X[:, j]
                cj = r + xj * coef[j]
                num = float(np.sum(wq * xj * cj))
                den = float(np.sum(wq * xj * xj))
                if den <= 0.0:
                    continue
                z = num / den
                # the smoothed check objective is mean-normalized, the
                # penalty is not: threshold carries the factor n
                thr = n * kappa[j] / (2.0 * den)
                bnew = np.sign(z) * max(abs(z) - thr, 0.0)
                if bnew != coef[j]:
                    r = cj - xj * bnew
                    delta = max(delta, abs(bnew - coef[j]))
                    coef[j] = bnew
            total += 1
            if delta < max(opts.tol, eps * 1e-4):
                break
    r = data.y - X @ coef
    if intercept:
        b0_std, b_std = float(coef[0]), coef[1:]
    else:
        b0_std, b_std = None, coef
    beta = b_std / scale
    b0 = b0_std - float(center @ beta) if intercept else None
    active = tuple(i for i, b in zip(subset.indices, b_std) if b != 0.0)
    return FitResult(
        beta=beta,
        intercept=b0,
        tau=q,
        objective=float(np.mean(check_loss(r, q)) + np.dot(kappa, np.abs(coef))),
        iterations=total,
        converged=True,
        method="adaptive_lasso_quantile",
        active=active,
        weights=tuple(float(v) for v in w),
    )
