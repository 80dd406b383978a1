"""Arm-selection policies with an explicit per-round state.

This is the step-by-step interface (one call per round); the engine runs
whole episodes through the equivalent kernels in :mod:`blmab.kernels`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, StateError
from .kernels import moss_index, ucb1_index
from .lambertw import admitted_arms

POLICY_KINDS = ("blmoss", "moss", "ucb1", "thompson")
K_MODES = ("cap", "arrived")


@dataclass
class ArmStats:
    pulls: int = 0
    reward_sum: int = 0

    @property
    def mean(self):
        return self.reward_sum / self.pulls if self.pulls else math.nan

    @property
    def posterior(self):
        """Beta posterior ``(successes + 1, failures + 1)`` under a uniform prior."""
        return self.reward_sum + 1, self.pulls - self.reward_sum + 1


@dataclass
class PolicyState:
    """Bookkeeping for one policy over one episode.

    ``arms`` maps tracked arm ids to their statistics in admission order.
    ``cap`` is the admission limit (``ceil(alpha T)`` for BL-Moss, unbounded
    otherwise) and ``k`` the arm count inside the MOSS index.
    """

    kind: str
    horizon: int
    cap: int | None = None
    k: int | None = None
    alpha: float | None = None
    k_mode: str = "cap"
    arms: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy {self.kind!r}", key="policy")
        if self.k_mode not in K_MODES:
            raise ConfigError(f"unknown k_mode {self.k_mode!r}", key="k_mode")

    @property
    def admitted(self):
        return len(self.arms)

    def admit(self, arm):
        if arm is None:
            return False
        if arm in self.arms:
            raise StateError(f"arm {arm} arrived twice")
        if self.cap is not None and self.admitted >= self.cap:
            return False
        self.arms[arm] = ArmStats()
        return True

    def moss_k(self):
        if self.k_mode == "arrived":
            return max(1, self.admitted)
        return self.k


def make_policy(kind, horizon, alpha=None, n_arms=None, k_mode="cap"):
    """Fresh state for ``kind``.

    BL-Moss needs ``alpha``; plain MOSS needs the total arm count ``n_arms``
    for its index normalization.
    """
    if kind == "blmoss":
        if alpha is None or not 0 < alpha <= 1:
            raise ConfigError(f"blmoss needs alpha in (0, 1], got {alpha}", key="alpha")
        cap = admitted_arms(alpha, horizon)
        return PolicyState(kind, horizon, cap=cap, k=cap, alpha=alpha, k_mode=k_mode)
    if kind == "moss":
        if n_arms is None:
            raise ConfigError("moss needs n_arms", key="n_arms")
        return PolicyState(kind, horizon, k=n_arms, k_mode=k_mode)
    return PolicyState(kind, horizon)


def _argmax_first(values):
    best, best_v = None, -math.inf
    for arm, v in values:
        if best is None or v > best_v:
            best, best_v = arm, v
    return best


def _moss_select(state):
    k = state.moss_k()
    return _argmax_first(
        (arm, moss_index(s.reward_sum / s.pulls if s.pulls else 0.0, s.pulls, state.horizon, k))
        for arm, s in state.arms.items()
    )


def blmoss_step(state, t, newly_arrived=None, rng=None):
    """Admit ``newly_arrived`` while under the cap, then pull the admitted arm
    with the largest MOSS index (earliest arrival on ties)."""
    if not 1 <= t <= state.horizon:
        raise StateError(f"round {t} outside [1, {state.horizon}]")
    state.admit(newly_arrived)
    if not state.arms:
        raise StateError("no admitted arm to pull")
    return _moss_select(state)


def thompson_select(state, rng):
    arms = list(state.arms)
    if not arms:
        raise StateError("no arm to pull")
    post = np.array([state.arms[a].posterior for a in arms])
    theta = rng.beta(post[:, 0], post[:, 1])
    return arms[int(np.argmax(theta))]


def select(state, t, newly_arrived=None, rng=None):
    """One round of any policy kind."""
    if state.kind == "blmoss":
        return blmoss_step(state, t, newly_arrived, rng)
    state.admit(newly_arrived)
    if not state.arms:
        raise StateError("no arm to pull")
    if state.kind == "moss":
        return _moss_select(state)
    if state.kind == "ucb1":
        return _argmax_first(
            (arm, ucb1_index(s.reward_sum / s.pulls if s.pulls else 0.0, s.pulls, t))
            for arm, s in state.arms.items()
        )
    return thompson_select(state, rng)


def update(state, arm, reward):
    if arm not in state.arms:
        raise StateError(f"arm {arm} is not tracked by this policy")
    if reward not in (0, 1):
        raise StateError(f"reward must be 0 or 1, got {reward}")
    stats = state.arms[arm]
    stats.pulls += 1
    stats.reward_sum += int(reward)
    return state
