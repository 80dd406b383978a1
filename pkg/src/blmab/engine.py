"""Monte-Carlo regret engine.

Randomness is organized as a tree of 64-bit seeds: instance ``i`` of a run
uses ``split_seed(master_seed, i)`` and its sub-instance ``j`` uses
``split_seed(instance_seed, j)``. Results therefore do not depend on how
instances are scheduled across threads.
"""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels
from .arrivals import (
    ArrivalRateProcess,
    TailModel,
    build_instance,
    build_rate_instance,
    resample_qualities,
    truncated_cdf,
)
from .errors import ConfigError
from .lambertw import DEFAULT_C, AlphaParams, admitted_arms
from .policies import K_MODES, POLICY_KINDS, make_policy, select, update

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def split_seed(seed, index):
    """SplitMix64 finalizer applied to ``seed + (index + 1) * golden gamma``."""
    z = (int(seed) + (int(index) + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimulationConfig:
    """One sweep point of the experiment protocol.

    ``alpha_tail``/``alpha_param`` set BL-Moss's admission fraction and
    default to the instance tail; they differ when running with a learned
    parameter or on uniform-arrival instances. ``alpha`` overrides both.
    ``epsilon`` switches to the lower-bound quality assignment.
    ``stratified`` draws instance ``i``'s best-arm arrival quantile from
    ``[i/n, (i+1)/n)`` instead of ``[0, 1)``.
    """

    horizon: int
    policy: str = "blmoss"
    tail: str = "subexp"
    param: float | None = None
    c: float = DEFAULT_C
    n_instances: int = 200
    n_sub: int = 20
    master_seed: int = 0
    alpha: float | None = None
    alpha_tail: str | None = None
    alpha_param: float | None = None
    k_mode: str = "cap"
    epsilon: float | None = None
    stratified: bool = False
    rate: ArrivalRateProcess | None = field(default=None, compare=False, repr=False)
    threads: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ConfigError(f"unknown policy {self.policy!r}", key="policy")
        if self.k_mode not in K_MODES:
            raise ConfigError(f"unknown k_mode {self.k_mode!r}", key="k_mode")
        if self.n_instances < 1:
            raise ConfigError("n_instances must be >= 1", key="n_instances")
        if self.n_sub < 1:
            raise ConfigError("n_sub must be >= 1", key="n_sub")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1", key="horizon")
        if not self.c > 0:
            raise ConfigError("c must be positive", key="c")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError("seed must be a 64-bit unsigned integer", key="seed")
        if self.epsilon is not None and not 0 <= self.epsilon <= 0.5:
            raise ConfigError("epsilon must lie in [0, 1/2]", key="epsilon")
        if self.rate is not None and self.rate.horizon != self.horizon:
            raise ConfigError("rate process horizon differs from horizon", key="horizon")
        if self.rate is None:
            self.tail_model()

    def tail_model(self):
        try:
            return TailModel(self.tail, self.horizon, self.param)
        except ValueError as exc:
            raise ConfigError(str(exc), key="param") from exc

    def policy_alpha(self):
        if self.alpha is not None:
            if not 0 < self.alpha <= 1:
                raise ConfigError("alpha must lie in (0, 1]", key="alpha")
            return self.alpha
        tail = self.alpha_tail or self.tail
        param = self.alpha_param if self.alpha_param is not None else self.param
        if tail == "subexp":
            return AlphaParams(self.horizon, lam=param, c=self.c).alpha()
        if tail == "subpareto":
            return AlphaParams(self.horizon, beta=param, c=self.c).alpha()
        raise ConfigError(
            "BL-Moss on uniform arrivals needs alpha or alpha_tail/alpha_param", key="alpha_tail"
        )

    def cap(self):
        return admitted_arms(self.policy_alpha(), self.horizon)

    def fresh_policy(self, n_arms):
        alpha = self.policy_alpha() if self.policy == "blmoss" else None
        return make_policy(self.policy, self.horizon, alpha=alpha, n_arms=n_arms, k_mode=self.k_mode)


_EMPTY = np.empty(0)


@functools.lru_cache(maxsize=16)
def _bonus_table(horizon, k):
    table = kernels.moss_bonus_table(horizon, k)
    table.flags.writeable = False
    return table


def run_episode(instance, policy, rng, pulls=None):
    """Play one episode; return total regret against the best arrived arm.

    ``policy`` is a fresh :class:`~blmab.policies.PolicyState`; only its kind
    and parameters are used. Reward uniforms are drawn from ``rng``.
    """
    T = instance.horizon
    if policy.horizon != T:
        raise ConfigError(
            f"policy horizon {policy.horizon} differs from instance horizon {T}", key="horizon"
        )
    reward_u = rng.random(T)
    if pulls is None:
        pulls = np.empty(T, dtype=np.int64)
    arrival = np.ascontiguousarray(instance.arrival, dtype=np.int64)
    quality = np.ascontiguousarray(instance.quality, dtype=np.float64)
    if policy.kind in ("blmoss", "moss"):
        cap = policy.cap if policy.cap is not None else instance.n_arms
        cap = min(cap, instance.n_arms)
        k = policy.k if policy.k is not None else cap
        dynamic = policy.k_mode == "arrived"
        bonus = _EMPTY if dynamic else _bonus_table(T, k)
        regret = kernels.capped_moss(arrival, quality, reward_u, T, cap, k, dynamic, pulls, bonus)
    elif policy.kind == "ucb1":
        regret = kernels.ucb1(arrival, quality, reward_u, T, pulls)
    else:
        regret = kernels.thompson_episode(arrival, quality, reward_u, T, pulls, rng)
    return float(regret)


def run_episode_stepwise(instance, policy, rng):
    """Same episode as :func:`run_episode` through the per-round policy API.

    Slow; returns ``(regret, pulls)`` for cross-checking the kernels.
    """
    T = instance.horizon
    reward_u = rng.random(T)
    pulls = np.full(T, -1, dtype=np.int64)
    best_q = -math.inf
    regret = 0.0
    arrivals = {int(t): arm for arm, t in enumerate(instance.arrival)}
    for t in range(1, T + 1):
        new = arrivals.get(t)
        if new is not None:
            best_q = max(best_q, instance.quality[new])
        if new is None and not policy.arms:
            continue
        arm = select(policy, t, new, rng)
        update(policy, arm, int(reward_u[t - 1] < instance.quality[arm]))
        pulls[t - 1] = arm
        regret += best_q - instance.quality[arm]
    return regret, pulls


def make_instance(cfg, instance_seed, index=0):
    rng = make_rng(instance_seed)
    if cfg.rate is not None:
        return build_rate_instance(cfg.rate, rng)
    quantile = (index + rng.random()) / cfg.n_instances if cfg.stratified else None
    return build_instance(cfg.tail_model(), rng, epsilon=cfg.epsilon, quantile=quantile)


def worst_case_regret(instance, cfg, n_sub, seed):
    """Max total regret over ``n_sub`` independent quality resamples of
    ``instance``, each with a fresh policy and fresh reward noise."""
    worst = -math.inf
    for j in range(n_sub):
        rng = make_rng(split_seed(seed, j))
        sub = resample_qualities(instance, rng)
        worst = max(worst, run_episode(sub, cfg.fresh_policy(sub.n_arms), rng))
    return worst


def _instance_value(cfg, i):
    seed = split_seed(cfg.master_seed, i)
    instance = make_instance(cfg, seed, i)
    return worst_case_regret(instance, cfg, cfg.n_sub, seed)


def instance_values(cfg):
    """Worst-case regret of every instance, in instance-index order."""
    if cfg.threads > 1 and cfg.n_instances > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            values = list(pool.map(lambda i: _instance_value(cfg, i), range(cfg.n_instances)))
    else:
        values = [_instance_value(cfg, i) for i in range(cfg.n_instances)]
    return np.array(values, dtype=float)


def expected_regret(cfg):
    """Mean and standard error of the per-instance worst-case regret."""
    values = instance_values(cfg)
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


@dataclass(frozen=True)
class CurvePoint:
    horizon: int
    mean_regret: float
    std_error: float
    n_instances: int
    alpha: float | None = None
    cap: int | None = None


@dataclass
class RegretCurve:
    """Expected regret against horizon for one policy/tail/parameter."""

    policy: str
    tail: str
    param: float | None
    c: float
    n_sub: int
    seed: int
    points: list = field(default_factory=list)

    @property
    def horizons(self):
        return np.array([p.horizon for p in self.points], dtype=float)

    @property
    def regrets(self):
        return np.array([p.mean_regret for p in self.points], dtype=float)

    def to_dict(self):
        return asdict(self)


def sweep(cfg, horizons, progress=None):
    """Run ``cfg`` at each horizon (strictly increasing) into a curve."""
    horizons = [int(T) for T in horizons]
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ConfigError("horizons must be strictly increasing", key="horizons")
    curve = RegretCurve(cfg.policy, cfg.tail, cfg.param, cfg.c, cfg.n_sub, cfg.master_seed)
    for T in horizons:
        point_cfg = replace(cfg, horizon=T)
        mean, se = expected_regret(point_cfg)
        alpha = cap = None
        if cfg.policy == "blmoss":
            alpha = point_cfg.policy_alpha()
            cap = point_cfg.cap()
        curve.points.append(CurvePoint(T, mean, se, cfg.n_instances, alpha, cap))
        log.info("%s %s param=%s T=%d regret=%.4g se=%.3g", cfg.policy, cfg.tail, cfg.param, T, mean, se)
        if progress is not None:
            progress(T, mean, se)
    return curve


def lemma1_bound(alpha, f_at_cap, horizon):
    """Regret upper bound ``T (1 - (1 - 6 sqrt(alpha)) F)``; vacuous (>= T)
    once ``alpha >= 1/36``."""
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]", key="alpha")
    return horizon * (1.0 - (1.0 - 6.0 * math.sqrt(alpha)) * f_at_cap)


def moss_bound(k, horizon):
    return 6.0 * math.sqrt(k * horizon)


def lemma1_check(curve, slack_sigmas=3.0):
    """Evaluate the bound at every point of a BL-Moss curve.

    A point passes when ``mean + slack_sigmas * std_error <= bound``.
    """
    rows = []
    for p in curve.points:
        model = TailModel(curve.tail, p.horizon, curve.param)
        f = truncated_cdf(model, p.cap)
        bound = lemma1_bound(p.alpha, f, p.horizon)
        rows.append(
            {
                "T": p.horizon,
                "alpha": p.alpha,
                "cap": p.cap,
                "F_at_cap": f,
                "lemma1_bound": bound,
                "vacuous": bound >= p.horizon,
                "mean_regret": p.mean_regret,
                "std_err": p.std_error,
                "ok": p.mean_regret + slack_sigmas * p.std_error <= bound,
            }
        )
    return rows
