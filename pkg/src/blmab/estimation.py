"""Tail-parameter estimation from arrival samples and event-time files."""

import io
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError, EstimationError, ParseError


@dataclass(frozen=True)
class LearnedTail:
    """A fitted tail parameter.

    ``method`` is ``"mean"`` (inverse of the sample mean for the rate, or the
    inverted Pareto mean for beta) or ``"mle"`` (Pareto maximum likelihood).
    """

    kind: str
    estimate: float
    n_samples: int
    method: str = "mean"
    mu: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if not self.estimate > 0:
            raise EstimationError(f"estimate must be positive, got {self.estimate}")
        if self.kind == "subpareto" and self.method == "mean" and not self.estimate > 1:
            raise EstimationError(f"mean-based beta estimate must exceed 1, got {self.estimate}")

    def to_dict(self):
        return asdict(self)


def required_samples(horizon, mu, delta):
    """Hoeffding sample count ``ceil(T^2 ln(2/delta) / (2 mu^2))`` for samples in [0, T]."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not (mu > 0 and horizon >= 1):
        raise DomainError("mu must be positive and horizon >= 1")
    return math.ceil(horizon * horizon * math.log(2.0 / delta) / (2.0 * mu * mu))


def _as_samples(samples):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("no samples")
    return x


def estimate_lambda(samples):
    """Rate estimate ``1 / mean``; truncation at the horizon is ignored."""
    m = float(np.mean(_as_samples(samples)))
    if not m > 0:
        raise DomainError(f"sample mean must be positive, got {m}")
    return 1.0 / m


def beta_from_mean(m):
    """Invert the Pareto mean ``m = beta / (beta - 1)``."""
    if not m > 1:
        raise EstimationError(f"mean {m} <= 1: the Pareto mean estimator is undefined")
    return m / (m - 1.0)


def estimate_beta(samples):
    return beta_from_mean(float(np.mean(_as_samples(samples))))


def estimate_beta_mle(samples):
    """Pareto (scale 1) maximum likelihood ``n / sum(log x)``."""
    x = _as_samples(samples)
    if np.any(x < 1):
        raise DomainError("Pareto MLE needs every sample >= 1")
    s = float(np.log(x).sum())
    if not s > 0:
        raise EstimationError("all samples equal 1: Pareto MLE diverges")
    return x.size / s


def read_event_times(source):
    """Parse one positive decimal per line; a single non-numeric header is allowed.

    ``source`` is a path or a text stream. Blank lines are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_event_times(fh)
    values = []
    seen_row = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            if not seen_row and lineno == 1:
                seen_row = True
                continue
            raise ParseError(f"not a number: {line!r}", line=lineno) from None
        seen_row = True
        if not (math.isfinite(v) and v > 0):
            raise ParseError(f"event time must be positive and finite, got {line!r}", line=lineno)
        values.append(v)
    if len(values) < 2:
        raise DataError(f"need at least 2 event times, got {len(values)}")
    return np.array(values)


@dataclass(frozen=True)
class EventTimeFit:
    rate: LearnedTail
    beta_mle: LearnedTail | None
    beta_mean: LearnedTail | None
    notes: tuple = ()

    def to_dict(self):
        return {
            "subexp": self.rate.to_dict(),
            "subpareto_mle": self.beta_mle.to_dict() if self.beta_mle else None,
            "subpareto_mean": self.beta_mean.to_dict() if self.beta_mean else None,
            "notes": list(self.notes),
        }


def fit_from_event_times(source, mu=None, delta=None):
    """Fit both tail families to an event-time file or stream."""
    if isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    times = read_event_times(source)
    n = int(times.size)
    rate = LearnedTail("subexp", estimate_lambda(times), n, "mean", mu, delta)
    notes = []
    beta_mle = beta_mean = None
    if np.all(times >= 1):
        try:
            beta_mle = LearnedTail("subpareto", estimate_beta_mle(times), n, "mle", mu, delta)
        except EstimationError as exc:
            notes.append(f"subpareto_mle: {exc}")
        try:
            beta_mean = LearnedTail("subpareto", estimate_beta(times), n, "mean", mu, delta)
        except EstimationError as exc:
            notes.append(f"subpareto_mean: {exc}")
    else:
        notes.append("some event times are below 1: Pareto fits skipped")
    return EventTimeFit(rate, beta_mle, beta_mean, tuple(notes))


def sample_truncated_exponential(lam, horizon, n, rng, chunk=10_000_000):
    """Yield chunks of Exp(lam) draws conditioned on ``X <= horizon``."""
    scale = -math.expm1(-lam * horizon)
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        yield -np.log1p(-rng.random(m) * scale) / lam
        remaining -= m


def sample_truncated_pareto(beta, horizon, n, rng, chunk=10_000_000):
    """Yield chunks of Pareto(beta, scale 1) draws conditioned on ``X <= horizon``."""
    scale = 1.0 - float(horizon) ** (-beta)
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        yield (1.0 - rng.random(m) * scale) ** (-1.0 / beta)
        remaining -= m


def learn_from_draws(kind, param, horizon, n, rng, mu=None, delta=None):
    """Estimate ``param`` from ``n`` truncated draws, streaming the mean."""
    sampler = sample_truncated_exponential if kind == "subexp" else sample_truncated_pareto
    total = 0.0
    for block in sampler(param, horizon, n, rng):
        total += float(block.sum())
    m = total / n
    if kind == "subexp":
        return LearnedTail("subexp", 1.0 / m, n, "mean", mu, delta)
    return LearnedTail("subpareto", beta_from_mean(m), n, "mean", mu, delta)


def blmoss_with_learned(cfg, learned, horizons, progress=None):
    """BL-Moss curve with the admission fraction set from ``learned`` while
    instances keep the true tail of ``cfg``."""
    from .engine import sweep

    if learned.kind != cfg.tail:
        raise DomainError(f"learned {learned.kind} parameter for a {cfg.tail} tail")
    run = replace(cfg, policy="blmoss", alpha=None, alpha_tail=cfg.tail, alpha_param=learned.estimate)
    return sweep(run, horizons, progress=progress)
