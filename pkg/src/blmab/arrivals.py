"""Best-arm arrival laws and BL-MAB instance construction."""

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

TAIL_KINDS = ("subexp", "subpareto", "uniform")


@dataclass(frozen=True)
class TailModel:
    """Arrival law of the best arm, truncated to rounds ``1..horizon``.

    ``kind`` is one of ``"subexp"`` (rate ``param`` = lambda),
    ``"subpareto"`` (``param`` = beta) or ``"uniform"`` (no parameter).
    """

    kind: str
    horizon: int
    param: float | None = None

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise DomainError(f"unknown tail kind {self.kind!r}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise DomainError(f"horizon must be a positive integer, got {self.horizon}")
        if self.kind == "uniform":
            if self.param is not None:
                raise DomainError("uniform tail takes no parameter")
        elif self.param is None or not (self.param > 0 and math.isfinite(self.param)):
            raise DomainError(f"{self.kind} tail needs a positive parameter, got {self.param}")

    def raw_cdf(self, t):
        """Untruncated CDF evaluated at (array of) rounds ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "subexp":
            return -np.expm1(-self.param * t)
        if self.kind == "subpareto":
            return 1.0 - (t + 1.0) ** (-self.param)
        return t / self.horizon

    def cdf_table(self):
        """Truncated CDF at ``t = 0..T``; entry 0 is 0 and entry T is 1."""
        return _cdf_table(self)

    def _compute_cdf_table(self):
        t = np.arange(self.horizon + 1, dtype=float)
        table = self.raw_cdf(t) / self.raw_cdf(self.horizon)
        table[0] = 0.0
        table[-1] = 1.0
        return table

    def pmf(self):
        """Probability that the best arm arrives at round ``t``, ``t = 1..T``."""
        return np.diff(self.cdf_table())


@functools.lru_cache(maxsize=32)
def _cdf_table(model):
    table = model._compute_cdf_table()
    table.flags.writeable = False
    return table


def truncated_cdf(model, t):
    if not (1 <= t <= model.horizon) or int(t) != t:
        raise DomainError(f"t must be an integer in [1, {model.horizon}], got {t}")
    if t == model.horizon:
        return 1.0
    return float(model.raw_cdf(t) / model.raw_cdf(model.horizon))


def arrival_from_quantile(model, u):
    """Round ``t`` with ``F(t-1) <= u < F(t)`` for ``u`` in [0, 1)."""
    # first t with F(t) > u; table[0] = 0 so the result is in 1..T
    t = np.searchsorted(model.cdf_table(), u, side="right")
    return np.minimum(t, model.horizon)


def sample_best_arrival(model, rng, size=None):
    """Inverse-CDF draw of the best arm's arrival round."""
    t = arrival_from_quantile(model, rng.random(size))
    return int(t) if size is None else t.astype(np.int64)


@dataclass
class BanditInstance:
    """Arrival rounds and Bernoulli means of every arm that ever arrives.

    Arms are indexed in arrival order.
    """

    horizon: int
    arrival: np.ndarray
    quality: np.ndarray
    best_arm: int
    epsilon: float | None = field(default=None, repr=False)
    iid: bool = field(default=False, repr=False)

    @property
    def n_arms(self):
        return len(self.arrival)

    def validate(self):
        a = self.arrival
        if len(a) != len(self.quality) or len(a) == 0:
            raise DomainError("arrival and quality must be non-empty and of equal length")
        if a[0] < 1 or a[-1] > self.horizon or np.any(np.diff(a) < 1):
            raise DomainError("arrival rounds must be strictly increasing inside [1, T]")
        q = self.quality
        if np.any(q < 0) or np.any(q > 1):
            raise DomainError("qualities must lie in [0, 1]")
        if q[self.best_arm] != q.max():
            raise DomainError("best_arm does not carry the maximal quality")
        return self


def draw_qualities(n_arms, best_arm, rng):
    """Best arm ~ U(0, 1); every other arm ~ U(0, q_best) independently."""
    q_best = rng.random()
    q = rng.random(n_arms) * q_best
    q[best_arm] = q_best
    return q


def epsilon_qualities(n_arms, best_arm, epsilon):
    """Lower-bound instance: best arm at 1/2 + epsilon, all others at 1/2."""
    q = np.full(n_arms, 0.5)
    q[best_arm] = 0.5 + epsilon
    return q


def build_instance(model, rng, epsilon=None, quantile=None):
    """One arm per round; the best arm's round follows ``model``.

    ``quantile`` fixes the uniform fed to the inverse CDF (stratified runs);
    by default it is drawn from ``rng``.
    """
    T = model.horizon
    if quantile is None:
        best = sample_best_arrival(model, rng) - 1
    else:
        best = int(arrival_from_quantile(model, quantile)) - 1
    if epsilon is None:
        quality = draw_qualities(T, best, rng)
    else:
        quality = epsilon_qualities(T, best, epsilon)
    return BanditInstance(T, np.arange(1, T + 1, dtype=np.int64), quality, best, epsilon)


def resample_qualities(instance, rng):
    """Same arrivals and best arm, fresh independent qualities.

    Instances from :func:`build_rate_instance` redraw i.i.d. qualities
    instead, so their best arm moves with the draw.
    """
    if instance.iid:
        quality = rng.random(instance.n_arms)
        return BanditInstance(
            instance.horizon, instance.arrival, quality, int(np.argmax(quality)), iid=True
        )
    if instance.epsilon is None:
        quality = draw_qualities(instance.n_arms, instance.best_arm, rng)
    else:
        quality = epsilon_qualities(instance.n_arms, instance.best_arm, instance.epsilon)
    return BanditInstance(
        instance.horizon, instance.arrival, quality, instance.best_arm, instance.epsilon
    )


@dataclass(frozen=True)
class ArrivalRateProcess:
    """Fraction of the ``n_arms`` arms that have arrived by each round.

    ``fraction[t]`` for ``t = 0..T``; must be non-decreasing from 0 to 1.
    """

    fraction: np.ndarray
    n_arms: int

    @property
    def horizon(self):
        return len(self.fraction) - 1

    @classmethod
    def from_function(cls, f, horizon, n_arms):
        return cls(np.array([f(t) for t in range(horizon + 1)], dtype=float), n_arms)

    def arrival_rounds(self):
        """Arrival round of each arm, after rounding ``M * f(t)`` to integers."""
        f = np.asarray(self.fraction, dtype=float)
        if self.n_arms < 1:
            raise DomainError("n_arms must be >= 1")
        if len(f) < 2:
            raise DomainError("horizon must be >= 1")
        if f[0] != 0 or f[-1] != 1:
            raise DomainError("arrival fraction must start at 0 and end at 1")
        if np.any(np.diff(f) < 0):
            raise DomainError("arrival fraction must be non-decreasing")
        counts = np.rint(self.n_arms * f).astype(np.int64)
        steps = np.diff(counts)
        if np.any(steps > 1):
            t = int(np.argmax(steps > 1)) + 1
            raise DomainError(f"more than one arm arrives in round {t}")
        return np.flatnonzero(steps) + 1


def build_rate_instance(proc, rng):
    """Arms arrive per ``proc``; qualities i.i.d. U(0, 1)."""
    arrival = proc.arrival_rounds().astype(np.int64)
    quality = rng.random(len(arrival))
    return BanditInstance(proc.horizon, arrival, quality, int(np.argmax(quality)), iid=True)
