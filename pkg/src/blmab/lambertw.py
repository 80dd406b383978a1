"""Principal-branch Lambert W on the non-negative reals and the admission
fractions derived from it."""

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

DEFAULT_C = 0.5
FEASIBILITY_LIMIT = 1.0 / 36.0


@dataclass(frozen=True)
class WEvalConfig:
    """Halley iteration controls.

    ``tolerance`` bounds the relative residual ``|w e^w - x| / x``; an
    absolute bound is unreachable in float64 once ``x`` is large.
    """

    tolerance: float = 1e-12
    max_iterations: int = 50

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise DomainError(f"max_iterations must be >= 1, got {self.max_iterations}")


_DEFAULT_CFG = WEvalConfig()


def lambert_w0(x, cfg=_DEFAULT_CFG):
    """Solve ``w * exp(w) = x`` for ``w >= 0``.

    Parameters
    ----------
    x : float
        Non-negative, finite argument.
    cfg : WEvalConfig, optional
        Tolerance and iteration cap.

    Returns
    -------
    float
        The principal branch value ``W(x)``.

    Raises
    ------
    DomainError
        If ``x`` is negative or not finite.
    ConvergenceError
        If Halley's method has not met the tolerance after
        ``cfg.max_iterations`` steps.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"lambert_w0 needs a finite x >= 0, got {x}")
    if x == 0.0:
        return 0.0

    if x < math.e:
        w = math.log1p(x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)

    scale = x
    residual = math.inf
    for _ in range(cfg.max_iterations):
        ew = math.exp(w)
        f = w * ew - x
        residual = abs(f)
        if residual <= cfg.tolerance * scale:
            return w
        wp1 = w + 1.0
        w = w - f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        if w < 0.0:
            w = 0.0
    ew = math.exp(w)
    residual = abs(w * ew - x)
    if residual <= cfg.tolerance * scale:
        return w
    raise ConvergenceError(
        f"lambert_w0({x}) did not converge in {cfg.max_iterations} iterations "
        f"(last residual {residual:.3e})",
        residual=residual,
    )


@dataclass(frozen=True)
class AlphaParams:
    """Inputs to the admission fraction: horizon, exactly one tail parameter
    and the exponent constant ``c``."""

    horizon: int
    lam: float | None = None
    beta: float | None = None
    c: float = DEFAULT_C

    def __post_init__(self):
        if (self.lam is None) == (self.beta is None):
            raise DomainError("exactly one of lam, beta must be set")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if not self.c > 0:
            raise DomainError(f"c must be positive, got {self.c}")
        param = self.lam if self.lam is not None else self.beta
        if not (param > 0 and math.isfinite(param)):
            raise DomainError(f"tail parameter must be positive and finite, got {param}")

    def alpha(self):
        return alpha_subexp(self) if self.lam is not None else alpha_subpareto(self)


def alpha_subexp(p):
    """``W(x)/x`` with ``x = lam*T/c``, clamped to at most 1."""
    if p.lam is None:
        raise DomainError("alpha_subexp needs lam")
    x = p.lam * p.horizon / p.c
    return min(1.0, lambert_w0(x) / x)


def alpha_subpareto(p):
    """``T ** (-beta / (beta + c))``."""
    if p.beta is None:
        raise DomainError("alpha_subpareto needs beta")
    return min(1.0, float(p.horizon) ** (-p.beta / (p.beta + p.c)))


def admitted_arms(alpha, horizon):
    """``ceil(alpha * T)``, never below 1 nor above ``T``."""
    return max(1, min(int(horizon), math.ceil(alpha * horizon)))


def min_horizon_subexp(lam, c=DEFAULT_C):
    """Horizon above which the sub-exponential fraction drops below 1/36."""
    if not (lam > 0 and c > 0):
        raise DomainError("lam and c must be positive")
    return 36.0 * c * math.log(36.0) / lam


def min_horizon_subpareto(beta, c=DEFAULT_C):
    """Horizon above which the sub-Pareto fraction drops below 1/36."""
    if not (beta > 0 and c > 0):
        raise DomainError("beta and c must be positive")
    return 36.0 ** ((c + beta) / beta)
