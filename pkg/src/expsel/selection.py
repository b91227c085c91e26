"""Train/validation splitting, candidate-subset enumeration, and model
choice by the minimum cross-validation mean score.

For every candidate subset the coefficients are fit on the training rows
and the mean loss of the resulting predictions is taken over the validation
rows; the reported model is the score argmin, ties broken toward the
smallest subset (then lexicographically).  The validation set is meant to
dominate the training set; a warning is emitted when it does not.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .exceptions import (
    AllSubsetsFailed,
    ComputationError,
    DataError,
    DegenerateSplit,
    ShapeMismatch,
    TooManySubsets,
)
from .estimators import (
    ModelSubset,
    PenaltyConfig,
    SolverOptions,
    compute_adaptive_weights,
    fit_adaptive_lasso_expectile,
    fit_adaptive_lasso_quantile,
    fit_expectile,
    fit_lasso_expectile,
    fit_least_squares,
    fit_quantile,
    linear_predictor,
)
from .losses import check_loss, check_tau, expectile_loss

METHODS = ("expectile", "least_squares", "quantile")


class SplitRatioWarning(UserWarning):
    """The validation set does not dominate the training set."""


@dataclass(frozen=True)
class CvSplit:
    """A random partition of row indices into training and validation sets.

    Indices are 0-based row positions; both sides are sorted, disjoint and
    jointly exhaustive.
    """

    train_indices: tuple
    validation_indices: tuple
    seed: int

    def __post_init__(self):
        tr = tuple(int(i) for i in self.train_indices)
        va = tuple(int(i) for i in self.validation_indices)
        if not tr or not va:
            raise DegenerateSplit("both split sides must be nonempty")
        if set(tr) & set(va):
            raise ValueError("training and validation indices overlap")
        n = len(tr) + len(va)
        if set(tr) | set(va) != set(range(n)):
            raise ValueError("split must partition 0..n-1")
        object.__setattr__(self, "train_indices", tuple(sorted(tr)))
        object.__setattr__(self, "validation_indices", tuple(sorted(va)))

    @property
    def n(self):
        return len(self.train_indices) + len(self.validation_indices)

    @property
    def n_train(self):
        return len(self.train_indices)

    @property
    def n_validation(self):
        return len(self.validation_indices)


def round_half_up(x):
    return int(math.floor(x + 0.5))


def make_split(n, s, seed):
    """Uniformly random split with a validation share of ``round(s * n)`` rows.

    Rounding is half-up.  Deterministic given ``seed``.  Warns (without
    failing) when the validation side does not outnumber the training side,
    since the selection guarantees assume a dominating validation set.
    """
    n = int(n)
    if n < 2:
        raise DegenerateSplit(f"need at least 2 rows to split, got {n}")
    if not 0.0 < float(s) < 1.0:
        raise ValueError(f"validation fraction must lie in (0, 1), got {s}")
    n_val = round_half_up(float(s) * n)
    if n_val < 1 or n - n_val < 1:
        raise DegenerateSplit(
            f"s={s} on n={n} leaves an empty side (n_val={n_val})"
        )
    perm = np.random.default_rng(seed).permutation(n)
    split = CvSplit(
        train_indices=tuple(sorted(perm[n_val:].tolist())),
        validation_indices=tuple(sorted(perm[:n_val].tolist())),
        seed=int(seed),
    )
    if split.n_validation <= split.n_train:
        warnings.warn(
            f"validation set ({split.n_validation}) does not dominate the "
            f"training set ({split.n_train}); selection consistency assumes "
            "it does",
            SplitRatioWarning,
            stacklevel=2,
        )
    return split


def cv_score(data, split, subset, tau, fit, loss=None):
    """Mean validation loss of a training-set fit.

    ``loss`` picks the scoring rule: "expectile" applies the asymmetric
    squared loss at ``tau``, "check" the quantile loss at the fit's level.
    By default each method is scored under its own loss: quantile fits with
    the check loss, everything else with the asymmetric squared loss
    (least squares counts as tau = 0.5).
    """
    if fit.beta.shape[0] != subset.size:
        raise ShapeMismatch(
            f"fit carries {fit.beta.shape[0]} coefficients for subset "
            f"{subset.label()} of size {subset.size}"
        )
    if loss is None:
        loss = "check" if fit.method in ("quantile", "adaptive_lasso_quantile") else "expectile"
    rows = np.asarray(split.validation_indices, dtype=int)
    resid = data.y[rows] - linear_predictor(data.x[rows], subset, fit)
    if loss == "expectile":
        t = 0.5 if fit.method in ("least_squares", "adaptive_lasso_least_squares") else check_tau(tau)
        return float(np.mean(expectile_loss(resid, t)))
    if loss == "check":
        return float(np.mean(check_loss(resid, fit.tau)))
    raise ValueError(f"unknown scoring loss {loss!r}")


@dataclass(frozen=True)
class EnumConfig:
    """Controls candidate-subset enumeration.

    max_exhaustive_p : refuse exhaustive enumeration beyond this many
        columns unless an explicit candidate list is given.
    force_in / force_out : 1-based columns every candidate must include /
        must not include.
    candidates : explicit candidate subsets (tuples of 1-based indices);
        bypasses the exhaustive cap.
    include_empty : put the empty subset first (legal only with an
        intercept).
    """

    max_exhaustive_p: int = 20
    force_in: tuple = ()
    force_out: tuple = ()
    candidates: tuple = None
    include_empty: bool = False


def enumerate_subsets(p, config=None):
    """All candidate subsets of {1..p} in size-then-lexicographic order.

    With ``config.candidates`` the given list is validated, filtered by the
    force masks, and returned in the given order (duplicates dropped).
    """
    p = int(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    config = config or EnumConfig()
    force_in = tuple(sorted(set(int(i) for i in config.force_in)))
    force_out = set(int(i) for i in config.force_out)
    for i in list(force_in) + list(force_out):
        if not 1 <= i <= p:
            raise ValueError(f"forced column {i} outside [1, {p}]")
    if set(force_in) & force_out:
        raise ValueError("a column cannot be both forced in and forced out")

    if config.candidates is not None:
        out = []
        seen = set()
        for cand in config.candidates:
            sub = cand if isinstance(cand, ModelSubset) else ModelSubset(tuple(sorted(set(cand))), p)
            if sub.p != p:
                raise ValueError(f"candidate {sub.label()} has ambient dimension {sub.p} != {p}")
            if not set(force_in) <= set(sub.indices):
                continue
            if force_out & set(sub.indices):
                continue
            if sub.indices in seen:
                continue
            if not sub.indices and not config.include_empty:
                continue
            seen.add(sub.indices)
            out.append(sub)
        return out

    if p > config.max_exhaustive_p:
        raise TooManySubsets(
            f"p={p} exceeds the exhaustive cap {config.max_exhaustive_p}; "
            "pass an explicit candidate list or raise max_exhaustive_p"
        )
    free = [i for i in range(1, p + 1) if i not in force_out and i not in force_in]
    subsets = []
    for k in range(len(free) + 1):
        for combo in combinations(free, k):
            indices = tuple(sorted(force_in + combo))
            if not indices and not config.include_empty:
                continue
            subsets.append(ModelSubset(indices, p))
    return subsets


@dataclass(frozen=True)
class SelectConfig:
    """End-to-end settings for a selection run."""

    enum: EnumConfig = field(default_factory=EnumConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)
    intercept: bool = True
    quantile_level: float = 0.5
    score_loss: str = "per-method"  # or "expectile": score every method under rho_tau
    tie_abs: float = 1e-12
    tie_rel: float = 1e-9


@dataclass(frozen=True)
class SelectionReport:
    """Scores and fits for every candidate subset, plus the chosen argmin.

    ``scores`` preserves enumeration order; ``ties`` lists every subset
    whose score is within the tie tolerance of the minimum, and ``chosen``
    is the smallest of them (by size, then lexicographically).  Subsets
    whose fit failed appear in ``skipped`` with the error message.
    """

    scores: dict
    chosen: ModelSubset
    fits: dict
    criterion: str
    split: CvSplit
    ties: tuple
    method: str
    tau: float
    skipped: dict = field(default_factory=dict)

    def score_of(self, subset):
        return self.scores[subset]


def _argmin_with_ties(scores, tie_abs, tie_rel):
    best = min(scores.values())
    tol = tie_abs + tie_rel * max(best, 0.0)
    ties = [m for m, v in scores.items() if v <= best + tol]
    ties.sort(key=lambda m: (m.size, m.indices))
    return ties[0], tuple(ties)


def _fit_one(train, subset, tau, method, config, penalty=None, pilot_weights=None):
    if penalty is None:
        if method == "expectile":
            return fit_expectile(train, subset, tau, config.solver, intercept=config.intercept)
        if method == "least_squares":
            return fit_least_squares(train, subset, config.solver, intercept=config.intercept)
        if method == "quantile":
            return fit_quantile(train, subset, config.quantile_level, config.solver,
                                intercept=config.intercept)
        raise ValueError(f"unknown method {method!r}")
    pilot = None
    if pilot_weights is not None:
        pilot = pilot_weights[subset.columns()] if subset.size else np.zeros(0)
    if method == "expectile":
        return fit_adaptive_lasso_expectile(
            train, subset, tau, penalty, config.solver,
            intercept=config.intercept, pilot=pilot,
        )
    if method == "least_squares":
        fit = fit_adaptive_lasso_expectile(
            train, subset, 0.5, penalty, config.solver,
            intercept=config.intercept, pilot=pilot,
        )
        return replace(fit, method="adaptive_lasso_least_squares")
    if method == "quantile":
        return fit_adaptive_lasso_quantile(
            train, subset, config.quantile_level, penalty, config.solver,
            intercept=config.intercept,
        )
    raise ValueError(f"unknown method {method!r}")


def _run_selection(data, split, tau, method, config, criterion, penalty=None,
                   pilot_weights=None):
    t = check_tau(tau)
    enum = config.enum
    if config.intercept and enum.candidates is None and not enum.include_empty:
        enum = replace(enum, include_empty=True)
    subsets = enumerate_subsets(data.p, enum)
    if not subsets:
        raise AllSubsetsFailed("enumeration produced no candidate subsets")

    train = data.rows(split.train_indices)
    loss = None if config.score_loss == "per-method" else "expectile"
    scores = {}
    fits = {}
    skipped = {}
    for subset in subsets:
        try:
            fit = _fit_one(train, subset, t, method, config, penalty, pilot_weights)
            scores[subset] = cv_score(data, split, subset, t, fit, loss=loss)
            fits[subset] = fit
        except (ComputationError, DataError, ValueError, np.linalg.LinAlgError) as exc:
            skipped[subset] = f"{type(exc).__name__}: {exc}"
    if not scores:
        raise AllSubsetsFailed(
            f"all {len(subsets)} candidate subsets failed to fit "
            f"(first error: {next(iter(skipped.values()))})"
        )
    chosen, ties = _argmin_with_ties(scores, config.tie_abs, config.tie_rel)
    return SelectionReport(
        scores=scores,
        chosen=chosen,
        fits=fits,
        criterion=criterion,
        split=split,
        ties=ties,
        method=method,
        tau=t,
        skipped=skipped,
    )


def select_model(data, split, tau, method="expectile", config=None):
    """Choose the subset minimizing the validation mean score of plain fits.

    Every candidate subset is fit on the training rows with the requested
    method (expectile / least squares / quantile) and scored by the mean
    validation loss; the argmin is returned with all scores retained.
    Per-subset fit failures are recorded as skips rather than aborting.
    """
    config = config or SelectConfig()
    return _run_selection(data, split, tau, method, config, "cvs")


def select_model_penalized(data, split, tau, method="expectile", penalty=None,
                           config=None, shared_pilot=False):
    """Same flow with adaptively weighted l1 fits per subset.

    With ``shared_pilot`` the adaptive weights come from one pilot fit on
    the full column set (computed once per split) rather than per subset;
    per-subset pilots leave near-identical supersets of the truth separated
    only by pilot noise, so the shared pilot markedly improves the
    irrelevant-variable detection rate.
    """
    config = config or SelectConfig()
    penalty = penalty or PenaltyConfig()
    pilot_weights = None
    if shared_pilot and method in ("expectile", "least_squares"):
        t = 0.5 if method == "least_squares" else check_tau(tau)
        train = data.rows(split.train_indices)
        full = ModelSubset(tuple(range(1, data.p + 1)), data.p)
        small = full.size < np.sqrt(train.n)
        cap_on = penalty.cap_weights if penalty.cap_weights is not None else not small
        kind = penalty.pilot
        if kind == "auto":
            kind = "expectile" if small else "lasso"
        if kind == "expectile":
            base = fit_expectile(train, full, t, config.solver, intercept=config.intercept)
        else:
            base = fit_lasso_expectile(train, full, t, penalty, config.solver,
                                       intercept=config.intercept)
        pilot_weights = compute_adaptive_weights(
            base, penalty.gamma,
            cap=np.sqrt(train.n) if cap_on else None,
            floor=penalty.weight_floor,
        )
    return _run_selection(
        data, split, tau, method, config, "acvs", penalty=penalty,
        pilot_weights=pilot_weights,
    )


def selected_coefficients(report):
    """Expand the chosen subset's fit to a full-length coefficient vector.

    Positions outside the chosen subset are exactly zero; the intercept (if
    any) stays on ``report.fits[report.chosen].intercept``.
    """
    fit = report.fits[report.chosen]
    full = np.zeros(report.chosen.p)
    if report.chosen.size:
        full[report.chosen.columns()] = fit.beta
    return full
