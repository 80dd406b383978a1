"""Episode kernels.

Each kernel plays one BL-MAB episode given pre-drawn randomness: arm
arrival rounds, arm qualities and one uniform per round (the pulled arm pays
1 iff its uniform is below its quality). It returns the total regret against
the best arrived arm and writes the pulled arm of every round into
``pulls`` (-1 for a round with no arm available).

The ``*_jit`` kernels are compiled with numba; the ``*_numpy`` kernels are
the plain NumPy fallback used when ``BLMAB_DISABLE_NUMBA`` is set. Both make
identical choices, including tie-breaks (lowest arm index wins).
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

NEG_INF = -np.inf
POS_INF = np.inf


@njit
def moss_index(mean, pulls, horizon, k):
    if pulls == 0:
        return POS_INF
    bonus = math.log(horizon / (k * pulls))
    if bonus < 0.0:
        bonus = 0.0
    return mean + math.sqrt(bonus / pulls)


@njit
def ucb1_index(mean, pulls, t):
    if pulls == 0:
        return POS_INF
    return mean + math.sqrt(2.0 * math.log(t) / pulls)


@njit
def moss_bonus_table(horizon, k):
    """Exploration bonus of the MOSS index for ``pulls = 0..horizon``."""
    table = np.empty(horizon + 1)
    table[0] = POS_INF
    for n in range(1, horizon + 1):
        b = math.log(horizon / (k * n))
        if b < 0.0:
            b = 0.0
        table[n] = math.sqrt(b / n)
    return table


@njit
def _tree_fix(val, arg, pos):
    while pos >= 1:
        left = 2 * pos
        right = left + 1
        if val[left] >= val[right]:
            val[pos] = val[left]
            arg[pos] = arg[left]
        else:
            val[pos] = val[right]
            arg[pos] = arg[right]
        pos //= 2


@njit
def _tree_rebuild(val, arg, size):
    for pos in range(size - 1, 0, -1):
        left = 2 * pos
        right = left + 1
        if val[left] >= val[right]:
            val[pos] = val[left]
            arg[pos] = arg[left]
        else:
            val[pos] = val[right]
            arg[pos] = arg[right]


@njit
def capped_moss_jit(arrival, quality, reward_u, horizon, cap, k, k_dynamic, pulls, bonus):
    # Max-tournament tree over admitted slots: a pull changes a single MOSS
    # index, so each round costs O(log cap) instead of O(cap).
    # bonus: moss_bonus_table(horizon, k), ignored when k_dynamic.
    size = 1
    while size < cap:
        size *= 2
    val = np.full(2 * size, NEG_INF)
    arg = np.zeros(2 * size, dtype=np.int64)
    for i in range(size):
        arg[size + i] = i
    _tree_rebuild(val, arg, size)

    n_pulls = np.zeros(cap, dtype=np.int64)
    rewards = np.zeros(cap, dtype=np.int64)
    n_arms = arrival.shape[0]
    next_arm = 0
    admitted = 0
    best_q = NEG_INF
    regret = 0.0
    kk = k
    for t in range(1, horizon + 1):
        while next_arm < n_arms and arrival[next_arm] == t:
            q = quality[next_arm]
            if q > best_q:
                best_q = q
            if admitted < cap:
                val[size + admitted] = POS_INF
                _tree_fix(val, arg, (size + admitted) // 2)
                admitted += 1
                if k_dynamic:
                    kk = admitted
                    for j in range(admitted):
                        if n_pulls[j] > 0:
                            val[size + j] = moss_index(
                                rewards[j] / n_pulls[j], n_pulls[j], horizon, kk
                            )
                    _tree_rebuild(val, arg, size)
            next_arm += 1
        if admitted == 0:
            pulls[t - 1] = -1
            continue
        a = arg[1]
        pulls[t - 1] = a
        if reward_u[t - 1] < quality[a]:
            rewards[a] += 1
        n_pulls[a] += 1
        if k_dynamic:
            val[size + a] = moss_index(rewards[a] / n_pulls[a], n_pulls[a], horizon, kk)
        else:
            val[size + a] = rewards[a] / n_pulls[a] + bonus[n_pulls[a]]
        _tree_fix(val, arg, (size + a) // 2)
        regret += best_q - quality[a]
    return regret


def capped_moss_numpy(arrival, quality, reward_u, horizon, cap, k, k_dynamic, pulls, bonus=None):
    index = np.full(cap, NEG_INF)
    n_pulls = np.zeros(cap, dtype=np.int64)
    rewards = np.zeros(cap, dtype=np.int64)
    n_arms = len(arrival)
    next_arm = 0
    admitted = 0
    best_q = NEG_INF
    regret = 0.0
    kk = k
    for t in range(1, horizon + 1):
        while next_arm < n_arms and arrival[next_arm] == t:
            best_q = max(best_q, float(quality[next_arm]))
            if admitted < cap:
                index[admitted] = POS_INF
                admitted += 1
                if k_dynamic:
                    kk = admitted
                    for j in np.flatnonzero(n_pulls[:admitted]):
                        index[j] = moss_index(
                            int(rewards[j]) / int(n_pulls[j]), int(n_pulls[j]), horizon, kk
                        )
            next_arm += 1
        if admitted == 0:
            pulls[t - 1] = -1
            continue
        a = int(np.argmax(index))
        pulls[t - 1] = a
        if reward_u[t - 1] < quality[a]:
            rewards[a] += 1
        n_pulls[a] += 1
        index[a] = moss_index(int(rewards[a]) / int(n_pulls[a]), int(n_pulls[a]), horizon, kk)
        regret += best_q - float(quality[a])
    return regret


@njit
def ucb1_jit(arrival, quality, reward_u, horizon, pulls):
    n_arms = arrival.shape[0]
    n_pulls = np.zeros(n_arms, dtype=np.int64)
    rewards = np.zeros(n_arms, dtype=np.int64)
    next_arm = 0
    unpulled = 0  # arms are first pulled in arrival order, so unpulled arms are a suffix
    best_q = NEG_INF
    regret = 0.0
    for t in range(1, horizon + 1):
        while next_arm < n_arms and arrival[next_arm] == t:
            if quality[next_arm] > best_q:
                best_q = quality[next_arm]
            next_arm += 1
        if next_arm == 0:
            pulls[t - 1] = -1
            continue
        if unpulled < next_arm:
            a = unpulled
            unpulled += 1
        else:
            a = 0
            best_idx = NEG_INF
            for j in range(next_arm):
                v = ucb1_index(rewards[j] / n_pulls[j], n_pulls[j], t)
                if v > best_idx:
                    best_idx = v
                    a = j
        pulls[t - 1] = a
        if reward_u[t - 1] < quality[a]:
            rewards[a] += 1
        n_pulls[a] += 1
        regret += best_q - quality[a]
    return regret


def ucb1_numpy(arrival, quality, reward_u, horizon, pulls):
    n_arms = len(arrival)
    n_pulls = np.zeros(n_arms, dtype=np.int64)
    rewards = np.zeros(n_arms, dtype=np.int64)
    next_arm = 0
    best_q = NEG_INF
    regret = 0.0
    for t in range(1, horizon + 1):
        while next_arm < n_arms and arrival[next_arm] == t:
            best_q = max(best_q, float(quality[next_arm]))
            next_arm += 1
        if next_arm == 0:
            pulls[t - 1] = -1
            continue
        n = n_pulls[:next_arm]
        fresh = np.flatnonzero(n == 0)
        if len(fresh):
            a = int(fresh[0])
        else:
            index = rewards[:next_arm] / n + np.sqrt(2.0 * math.log(t) / n)
            a = int(np.argmax(index))
        pulls[t - 1] = a
        if reward_u[t - 1] < quality[a]:
            rewards[a] += 1
        n_pulls[a] += 1
        regret += best_q - float(quality[a])
    return regret


def thompson_episode(arrival, quality, reward_u, horizon, pulls, rng):
    """Beta-Bernoulli Thompson sampling over every arrived arm (no numba path)."""
    n_arms = len(arrival)
    successes = np.zeros(n_arms, dtype=np.int64)
    failures = np.zeros(n_arms, dtype=np.int64)
    next_arm = 0
    best_q = -np.inf
    regret = 0.0
    for t in range(1, horizon + 1):
        while next_arm < n_arms and arrival[next_arm] == t:
            best_q = max(best_q, float(quality[next_arm]))
            next_arm += 1
        if next_arm == 0:
            pulls[t - 1] = -1
            continue
        theta = rng.beta(successes[:next_arm] + 1, failures[:next_arm] + 1)
        a = int(np.argmax(theta))
        pulls[t - 1] = a
        if reward_u[t - 1] < quality[a]:
            successes[a] += 1
        else:
            failures[a] += 1
        regret += best_q - float(quality[a])
    return regret


if USE_NUMBA:
    capped_moss = capped_moss_jit
    ucb1 = ucb1_jit
else:
    capped_moss = capped_moss_numpy
    ucb1 = ucb1_numpy
