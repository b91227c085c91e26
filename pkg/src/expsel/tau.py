"""Estimating the asymmetry level from data.

When the errors themselves are observable (simulations), the level is the
ratio of the negative-part residual mass to the total one-sided mass.  On
real data the errors are latent, so a two-step scheme is used: start from
the residuals around the response median, fit an asymmetric regression at
that provisional level on all rows, and re-estimate from its residuals.
"""

from dataclasses import dataclass

import numpy as np

from .distributions import true_tau_of  # noqa: F401  (re-exported)
from .estimators import ModelSubset, fit_expectile, linear_predictor
from .exceptions import DegenerateResiduals

CLAMP_LO = 0.01
CLAMP_HI = 0.99


@dataclass(frozen=True)
class TauEstimate:
    """An estimated asymmetry level.

    stage : "from_errors" for a direct residual estimate, "step0" /
        "step1" for the two-step scheme's stages.
    tau_raw : the ratio before clamping to [0.01, 0.99].
    tau_initial : the provisional step-0 level, kept for diagnostics.
    """

    tau: float
    stage: str
    n_used: int
    tau_raw: float = None
    tau_initial: float = None


def tau_from_residuals(e, stage="from_errors"):
    """Level estimate ``sum(e-) / (sum(e-) + sum(e+))`` from raw residuals.

    Entries exactly equal to zero contribute to neither sum.  Raises
    ``DegenerateResiduals`` when every entry is zero (no sign information);
    one-sided residual sets yield 0 or 1 and are clamped into [0.01, 0.99].
    """
    e = np.asarray(e, dtype=float).ravel()
    if e.size == 0:
        raise DegenerateResiduals("empty residual vector")
    if not np.isfinite(e).all():
        raise DegenerateResiduals("residuals contain non-finite values")
    neg = float(e[e < 0].sum())
    pos = float(e[e > 0].sum())
    denom = neg - pos
    if denom == 0.0:
        raise DegenerateResiduals(
            "all residuals are exactly zero; the asymmetry level is undefined"
        )
    raw = neg / denom
    return TauEstimate(
        tau=float(min(max(raw, CLAMP_LO), CLAMP_HI)),
        stage=stage,
        n_used=int(e.size),
        tau_raw=raw,
    )


def tau_two_step(data, subset=None, opts=None, intercept=True):
    """Two-step level estimate for data with unobservable errors.

    Step 0 estimates a provisional level from ``y - median(y)``.  Step 1
    fits an asymmetric regression at that level on all rows of the given
    submodel (the full model by default), and the returned level is the
    residual estimate of that fit.
    """
    if subset is None:
        subset = ModelSubset(tuple(range(1, data.p + 1)), data.p)
    step0 = tau_from_residuals(data.y - float(np.median(data.y)), stage="step0")
    fit = fit_expectile(data, subset, step0.tau, opts, intercept=intercept)
    resid = data.y - linear_predictor(data.x, subset, fit)
    step1 = tau_from_residuals(resid, stage="step1")
    return TauEstimate(
        tau=step1.tau,
        stage="step1",
        n_used=data.n,
        tau_raw=step1.tau_raw,
        tau_initial=step0.tau,
    )
