"""Regret-exponent fitting and closed-form exponents."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, FitError

GAMMA_GRID = np.round(np.arange(101) * 0.01, 2)
AGREEMENT_TOL = 0.01


@dataclass
class FitReport:
    gamma_grid: float
    gamma_loglog: float
    xi: float
    sse: float
    theoretical_gamma: float | None = None

    @property
    def disagreement(self):
        return abs(self.gamma_grid - self.gamma_loglog)

    def to_dict(self):
        d = asdict(self)
        d["disagreement"] = self.disagreement
        return d


def _curve_arrays(curve):
    if hasattr(curve, "points"):
        T, R = curve.horizons, curve.regrets
    else:
        T, R = (np.asarray(a, dtype=float) for a in zip(*curve))
    if len(T) < 2:
        raise FitError(f"need at least 2 curve points, got {len(T)}")
    if np.any(R <= 0) or np.any(T <= 0):
        raise FitError("regrets and horizons must be positive to fit an exponent")
    return T, R


def fit_exponent_grid(curve):
    """Grid search over ``gamma`` in ``{0, 0.01, ..., 1}``.

    For each candidate the scale is pinned at the largest horizon,
    ``xi = R(T_max) / T_max**gamma``, and the squared error of
    ``xi * T**gamma`` against the curve is computed. Returns
    ``(gamma, xi, sse)`` for the smallest minimizing ``gamma``.

    ``curve`` is a :class:`~blmab.engine.RegretCurve` or an iterable of
    ``(T, regret)`` pairs.
    """
    T, R = _curve_arrays(curve)
    i_max = int(np.argmax(T))
    xi = R[i_max] / T[i_max] ** GAMMA_GRID
    sse = ((R[None, :] - xi[:, None] * T[None, :] ** GAMMA_GRID[:, None]) ** 2).sum(axis=1)
    best = int(np.argmin(sse))
    return float(GAMMA_GRID[best]), float(xi[best]), float(sse[best])


def fit_exponent_loglog(curve):
    """OLS slope of ``log R`` on ``log T``."""
    T, R = _curve_arrays(curve)
    x, y = np.log(T), np.log(R)
    x = x - x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))


def fit_report(curve, theoretical_gamma=None):
    gamma, xi, sse = fit_exponent_grid(curve)
    return FitReport(gamma, fit_exponent_loglog(curve), xi, sse, theoretical_gamma)


def theoretical_exponent_subpareto(beta):
    """Regret exponent ``(1 + beta) / (1 + 2 beta)`` at ``c = 1/2``."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.5
    return (1.0 + beta) / (1.0 + 2.0 * beta)


def learned_exponent_subexp(lam, mu):
    """T-exponent with a learned rate: ``(1 + mu lam) / 2`` when ``mu lam < 1``,
    else 1/2 (log factors dropped)."""
    if not (lam > 0 and mu >= 0):
        raise DomainError("lam must be positive and mu non-negative")
    return (1.0 + mu * lam) / 2.0 if mu * lam < 1 else 0.5


def learned_exponent_subpareto(beta, mu, overestimate):
    """T-exponent with a learned ``beta_hat``; ``overestimate`` selects the
    ``beta_hat > beta`` case."""
    if not beta > 0 or mu < 0:
        raise DomainError("beta must be positive and mu non-negative")
    if overestimate:
        return 1.0 - beta * (1.0 - mu * beta + mu) / (1.0 + 2.0 * beta - 3.0 * mu * beta + 3.0 * mu)
    return (1.0 + beta + 2.0 * mu * (beta - 1.0)) / (1.0 + 2.0 * beta + 3.0 * mu * (beta - 1.0))


def cpu_subexp(lam, mu, horizon):
    """Cost of parametric uncertainty for a learned rate (a ratio, not an exponent)."""
    if not (lam > 0 and mu > 0):
        raise DomainError("lam and mu must be positive")
    if horizon < 3:
        raise DomainError("horizon must be >= 3")
    if mu * lam >= 1:
        return 1.0
    return math.sqrt(horizon / math.log(horizon)) ** (mu * lam)


def cpu_subpareto(beta, mu, overestimate):
    """T-exponent of the cost of parametric uncertainty for a learned ``beta``.

    ``overestimate`` is True for the ``beta_hat > beta`` case, which needs
    ``mu < 1 / (beta - 1)``.
    """
    if not beta >= 1:
        raise DomainError(f"beta must be > 1, got {beta}")
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    b1 = beta - 1.0
    denom_head = 1.0 + 2.0 * beta
    if overestimate:
        if b1 > 0 and not mu < 1.0 / b1:
            raise DomainError(f"need mu < 1/(beta - 1) = {1.0 / b1}, got {mu}")
        return 2.0 * mu * beta * b1 / (denom_head * (denom_head - 3.0 * mu * b1))
    return mu * b1 * b1 / (denom_head * (denom_head + 3.0 * mu * b1))
