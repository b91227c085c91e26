"""Asymmetric squared (expectile) loss, its derivatives, and the check loss.

All functions are vectorized over ``x`` and total on the reals.  The sign
convention at zero follows the derivative formulas: the ``x >= 0`` branch
applies, so the weight at a zero residual is ``2 * tau``.
"""

import numbers

import numpy as np


class ExpectileIndex(float):
    """Asymmetry level in the open interval (0, 1).

    Behaves as a plain float; construction rejects values outside (0, 1).
    """

    def __new__(cls, value):
        v = float(value)
        if not np.isfinite(v) or not 0.0 < v < 1.0:
            raise ValueError(f"expectile index must lie in (0, 1), got {value!r}")
        return super().__new__(cls, v)

    def __repr__(self):
        return f"ExpectileIndex({float(self)!r})"


def check_tau(tau):
    """Validate an asymmetry level and return it as a plain float."""
    return float(ExpectileIndex(tau))


def _apply(fn, x):
    x = np.asarray(x, dtype=float)
    out = fn(x)
    return float(out) if out.ndim == 0 else out


def expectile_loss(x, tau):
    """Asymmetric squared loss: ``tau * x**2`` for x >= 0, ``(1-tau) * x**2`` below."""
    t = check_tau(tau)
    return _apply(lambda v: np.where(v < 0, 1.0 - t, t) * v * v, x)


def expectile_score(x, tau):
    """Derivative of the asymmetric squared loss: ``2*tau*x`` for x >= 0, ``2*(1-tau)*x`` below."""
    t = check_tau(tau)
    return _apply(lambda v: 2.0 * np.where(v < 0, 1.0 - t, t) * v, x)


def expectile_weight(x, tau):
    """Second derivative ``2*tau`` for x >= 0 and ``2*(1-tau)`` below; the IRLS weight up to the factor 2."""
    t = check_tau(tau)
    return _apply(lambda v: 2.0 * np.where(v < 0, 1.0 - t, t), x)


def check_loss(x, tau):
    """Piecewise-linear quantile loss: ``tau * x`` for x >= 0, ``(tau - 1) * x`` below."""
    if not isinstance(tau, numbers.Real) or not 0.0 < float(tau) < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {tau!r}")
    t = float(tau)
    return _apply(lambda v: np.where(v < 0, t - 1.0, t) * v, x)
