"""Expected attacker rewards per Markov state and in total.

``f0``/``f_state`` give the expected reward of a canonicalised attacker block
mined in a given state, split into block, linear and Bernoulli components.
Combining them with the stationary law gives the reward per block-creation
event; dividing by the mean event spacing ``1 - lam`` turns that into reward
per unit time, which is what the honest benchmark is measured in.

Two engines are provided: closed forms for C + a t + one Bernoulli bonus, and
a generic quadrature engine that integrates exponential/Erlang densities
against the atom decomposition of any supported spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import markov, quadrature
from .markov import AttackerParams, Equilibrium, solve_equilibrium, stationary
from .rewards import COMPONENTS, RewardSpec, censored_components, component_means, crossing_times, terms

TAIL_TOL = 1e-13


@dataclass(frozen=True)
class RewardBreakdown:
    block: float = 0.0
    linear: float = 0.0
    bernoulli: float = 0.0

    @property
    def total(self) -> float:
        return self.block + self.linear + self.bernoulli

    @classmethod
    def from_array(cls, values) -> "RewardBreakdown":
        b, l, e = (float(v) for v in values)
        return cls(b, l, e)

    def as_array(self) -> np.ndarray:
        return np.array([self.block, self.linear, self.bernoulli])

    def __add__(self, other: "RewardBreakdown") -> "RewardBreakdown":
        return RewardBreakdown(self.block + other.block, self.linear + other.linear, self.bernoulli + other.bernoulli)

    def scale(self, k: float) -> "RewardBreakdown":
        return RewardBreakdown(self.block * k, self.linear * k, self.bernoulli * k)

    def masked(self, components) -> float:
        """Sum of the named components (a subset of block/linear/bernoulli)."""
        return sum(getattr(self, c) for c in components)

    def as_dict(self) -> dict:
        return {"block": self.block, "linear": self.linear, "bernoulli": self.bernoulli, "total": self.total}


ZERO = RewardBreakdown()


@dataclass(frozen=True)
class StateZeroRewards:
    """The three ways an attacker block found in state 0 can end up canonical."""

    case_i: RewardBreakdown
    case_ii: RewardBreakdown
    case_iii: RewardBreakdown

    @property
    def total(self) -> RewardBreakdown:
        return self.case_i + self.case_ii + self.case_iii


@dataclass(frozen=True)
class PerStateRewards:
    f0: StateZeroRewards
    f1: RewardBreakdown
    # alpha * sum_{i>=2} f_i (alpha/(1-alpha))^{i-2}; multiply by p1 for the tail contribution
    tail_closed_form: RewardBreakdown
    tail_terms: int = 0


@dataclass(frozen=True)
class AttackerReward:
    """Attacker reward per unit time, with the equilibrium it was evaluated at."""

    breakdown: RewardBreakdown
    per_event: RewardBreakdown
    equilibrium: Equilibrium
    per_state: PerStateRewards | None = field(default=None, repr=False)

    @property
    def total(self) -> float:
        return self.breakdown.total


def _check(alpha, lam):
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"orphan rate must lie in [0, 1), got {lam}")


def _single_bernoulli(tm):
    if tm.bernoullis:
        return tm.bernoullis[0].p, tm.bernoullis[0].e
    return 0.0, 0.0


def _pick(spec, method):
    return markov._pick(spec, method)


# -- closed forms ---------------------------------------------------------------------
# All of these broadcast over numpy arrays of alpha, beta and mu.


def closed_f_state(constant, rate, mean_bonus, i, alpha, mu):
    """Components of f_i for a reward with mean ``constant + mean_bonus + rate t``."""
    miss = (1.0 - alpha) ** i
    lin = rate * mu * (1.0 - (1.0 + i * alpha) * miss) / alpha
    return np.stack(np.broadcast_arrays(constant * (1.0 - miss), lin, mean_bonus * (1.0 - miss)))


def closed_tail(constant, rate, mean_bonus, alpha, mu):
    """alpha * sum_{i>=2} f_i r^{i-2} with r = alpha/(1-alpha), summed exactly."""
    geo = 2.0 * alpha**2 * (1.0 - alpha) / (1.0 - 2.0 * alpha)
    lin = rate * mu * alpha**2 * (3.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha)
    return np.stack(np.broadcast_arrays(constant * geo, lin, mean_bonus * geo))


def closed_f0_parts(constant, rate, p, e, beta, mu):
    """E[component; published] and E[component; hidden] for a state-0 block.

    Each is a ``(3, ...)`` array over (block, linear, bernoulli).
    """
    x0, x1, t0, t1 = markov.publish_fractions(constant, rate, p, e, beta, mu)
    mu = np.broadcast_to(mu, np.shape(x0))
    above = np.stack(
        [
            constant * ((1.0 - p) * x0 + p * x1),
            rate * ((1.0 - p) * t0 + p * t1),
            p * e * x1,
        ]
    )
    below = np.stack(
        [
            constant * ((1.0 - p) * (1.0 - x0) + p * (1.0 - x1)),
            rate * ((1.0 - p) * (mu - t0) + p * (mu - t1)),
            p * e * (1.0 - x1),
        ]
    )
    return above, below


def tie_weight(alpha, gamma):
    """Probability weight of case iii: a race the attacker's fork goes on to win."""
    return alpha * (1.0 - alpha) * (alpha + gamma * (1.0 - alpha))


def closed_grid(spec: RewardSpec, alpha: float, gamma: float, betas) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised equilibrium and per-unit-time breakdown over an array of cutoffs.

    Returns ``(lam, rewards)`` with ``rewards`` of shape ``(3, len(betas))``.
    Only valid for specs with at most one Bernoulli term.
    """
    if not markov.is_closed_form(spec):
        raise ValueError("closed form needs at most one Bernoulli component")
    betas = np.asarray(betas, dtype=float)
    if alpha == 0.0:
        return np.zeros_like(betas), np.zeros((3,) + betas.shape)
    tm = terms(spec)
    p, e = _single_bernoulli(tm)
    c, a = tm.constant, tm.rate

    def hide(lam):
        x0, x1, _, _ = markov.publish_fractions(c, a, p, e, betas, 1.0 - lam)
        return (1.0 - p) * (1.0 - x0) + p * (1.0 - x1)

    lam, h, _ = markov.iterate_lambda(hide, alpha, shape=betas.shape)
    per_event = _closed_per_event(c, a, p, e, alpha, gamma, betas, lam, h)
    return lam, per_event / (1.0 - lam)


def _closed_per_event(c, a, p, e, alpha, gamma, beta, lam, h):
    mu = 1.0 - lam
    p1 = markov._p1(alpha, h)
    safe_h = np.where(h > 0.0, h, 1.0)
    p0 = np.where(h > 0.0, p1 / (alpha * safe_h), 1.0)
    above, below = closed_f0_parts(c, a, p, e, beta, mu)
    f0 = alpha * above + (alpha**2 + tie_weight(alpha, gamma)) * below
    f1 = closed_f_state(c, a, p * e, 2, alpha, mu)
    tail = closed_tail(c, a, p * e, alpha, mu)
    return p0 * f0 + p1 * (f1 + tail)


# -- generic quadrature engine ----------------------------------------------------------


def _exp_censored(spec, beta, mu):
    """Integrals of the exponential density times censored component means."""

    def integrand(t):
        _, below, above = censored_components(spec, t, beta)
        return np.exp(-t / mu) / mu * np.concatenate([above, below])

    tm = terms(spec)
    scale = 1.0 + tm.constant + tm.mean_bonus + tm.rate * mu
    out = quadrature.simpson(
        integrand, 0.0, quadrature.exp_tail_cutoff(mu), tol=1e-13 * scale, points=crossing_times(spec, beta)
    )
    return out[:3], out[3:]


def erlang_means(spec: RewardSpec, mu: float, count: int) -> np.ndarray:
    """``I_j = integral Erlang_{j+1}(t; mean mu) E[R(t)] dt`` for j < count, shape (count, 3).

    All orders share one adaptive pass with a vector-valued integrand.
    """
    tm = terms(spec)
    shapes = np.arange(1, count + 1)
    log_norm = np.array([math.lgamma(k) for k in shapes]) + shapes * math.log(mu)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        pos = t > 0
        logt = np.log(np.where(pos, t, 1.0))
        logp = (shapes[:, None] - 1) * logt[None, :] - t[None, :] / mu - log_norm[:, None]
        dens = np.where(pos[None, :], np.exp(logp), 0.0)
        dens[0, ~pos] = 1.0 / mu
        means = component_means(spec, t)
        return (dens[:, None, :] * means[None, :, :]).reshape(count * 3, -1)

    scale = 1.0 + tm.constant + tm.mean_bonus + tm.rate * mu * count
    out = quadrature.simpson(integrand, 0.0, quadrature.erlang_cutoff(count, mu), tol=1e-12 * scale)
    return out.reshape(count, 3)


def _quad_f_state(spec, i, alpha, mu):
    moments = erlang_means(spec, mu, i)
    w = alpha * (1.0 - alpha) ** np.arange(i)
    return w @ moments


def tail_terms_needed(spec: RewardSpec, alpha: float, mu: float, tol: float = TAIL_TOL) -> int:
    """Smallest N such that the states i > N contribute less than ``tol`` to the tail.

    Uses f_i <= C' + a mu i, which is affine in i, so the geometric majorant is
    summed in closed form.
    """
    tm = terms(spec)
    m0 = tm.constant + tm.mean_bonus
    r = alpha / (1.0 - alpha)
    n = 2
    while True:
        rest = r ** (n - 1) * ((m0 + tm.rate * mu * (n + 1)) / (1.0 - r) + tm.rate * mu * r / (1.0 - r) ** 2)
        if alpha * rest < tol:
            return n
        n += 1


def _quad_tail(spec, alpha, mu, n_terms=None):
    n = tail_terms_needed(spec, alpha, mu) if n_terms is None else n_terms
    moments = erlang_means(spec, mu, n)
    r = alpha / (1.0 - alpha)
    # state i (2..n) weighs alpha r^{i-2}; path j appears in every state i >= j+1
    state_w = alpha * r ** np.arange(n - 1)  # index i-2
    suffix = np.cumsum(state_w[::-1])[::-1]  # sum over i >= index+2
    j = np.arange(n)
    start = np.maximum(j - 1, 0)  # first state index (i-2) containing path j
    weights = alpha * (1.0 - alpha) ** j * suffix[start]
    return weights @ moments, n


# -- public operations -----------------------------------------------------------------


def f_state(spec: RewardSpec, i: int, alpha: float, lam: float, method: str = "auto") -> RewardBreakdown:
    """Expected reward of a canonical attacker block mined with a lead of ``i``.

    ``i = 1`` is evaluated as the two-path (A, HA) case, identical to i = 2.
    """
    if i < 1 or int(i) != i:
        raise ValueError(f"state index must be an integer >= 1, got {i}")
    _check(alpha, lam)
    i = max(int(i), 2)
    mu = 1.0 - lam
    if _pick(spec, method) == "closed":
        tm = terms(spec)
        return RewardBreakdown.from_array(closed_f_state(tm.constant, tm.rate, tm.mean_bonus, i, alpha, mu))
    return RewardBreakdown.from_array(_quad_f_state(spec, i, alpha, mu))


def f0(spec: RewardSpec, params: AttackerParams, lam: float, method: str = "auto") -> StateZeroRewards:
    alpha = params.alpha
    _check(alpha, lam)
    mu = 1.0 - lam
    if _pick(spec, method) == "closed":
        tm = terms(spec)
        p, e = _single_bernoulli(tm)
        above, below = closed_f0_parts(tm.constant, tm.rate, p, e, params.beta, mu)
    else:
        above, below = _exp_censored(spec, params.beta, mu)
    return StateZeroRewards(
        case_i=RewardBreakdown.from_array(alpha * above),
        case_ii=RewardBreakdown.from_array(alpha**2 * below),
        case_iii=RewardBreakdown.from_array(tie_weight(alpha, params.gamma) * below),
    )


def per_state_rewards(spec: RewardSpec, params: AttackerParams, lam: float, method: str = "auto") -> PerStateRewards:
    alpha = params.alpha
    _check(alpha, lam)
    mu = 1.0 - lam
    method = _pick(spec, method)
    zero = f0(spec, params, lam, method)
    if method == "closed":
        tm = terms(spec)
        f1 = closed_f_state(tm.constant, tm.rate, tm.mean_bonus, 2, alpha, mu)
        tail, n = closed_tail(tm.constant, tm.rate, tm.mean_bonus, alpha, mu), 0
    else:
        f1 = _quad_f_state(spec, 2, alpha, mu)
        tail, n = _quad_tail(spec, alpha, mu)
    return PerStateRewards(zero, RewardBreakdown.from_array(f1), RewardBreakdown.from_array(tail), n)


def reward_per_event(
    spec: RewardSpec, params: AttackerParams, lam: float, method: str = "auto", h: float | None = None
) -> RewardBreakdown:
    """f0 p0 + f1 p1 + alpha sum_{i>=2} f_i p_{i-1}, at a given (possibly exogenous) orphan rate.

    This is the expected attacker reward per block-creation event.
    """
    if params.alpha == 0.0:
        return ZERO
    method = _pick(spec, method)
    if h is None:
        h = markov.hide_probability(spec, params, lam, method)
    dist = stationary(params.alpha, min(max(h, 0.0), 1.0))
    if dist.p1 == 0.0 and dist.p0 == 1.0:
        # nobody hides: only case i contributes
        return f0(spec, params, lam, method).case_i
    rewards = per_state_rewards(spec, params, lam, method)
    return rewards.f0.total.scale(dist.p0) + (rewards.f1 + rewards.tail_closed_form).scale(dist.p1)


def attacker_reward(spec: RewardSpec, params: AttackerParams, method: str = "auto") -> AttackerReward:
    """Attacker reward per unit time at the difficulty-adjusted equilibrium."""
    eq = solve_equilibrium(spec, params, method)
    if params.alpha == 0.0:
        return AttackerReward(ZERO, ZERO, eq)
    per_event = reward_per_event(spec, params, eq.lam, method, h=eq.h)
    return AttackerReward(per_event.scale(1.0 / (1.0 - eq.lam)), per_event, eq)


def honest_benchmark(spec: RewardSpec, alpha: float) -> RewardBreakdown:
    """Reward of an honest miner: a share ``alpha`` of one block per unit time plus its fees."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    tm = terms(spec)
    return RewardBreakdown(alpha * tm.constant, alpha * tm.rate, alpha * tm.mean_bonus)


# -- reference formulas for the two single-source special cases -------------------------


def block_only_formula(alpha: float, gamma: float, lam: float, c: float = 1.0) -> float:
    """Per-event reward of always-hide selfish mining with a constant reward ``c``.

    With an infinite cutoff no state-0 block is published outright, so only
    the two hidden cases of state 0 contribute.
    """
    p1 = 1.0 / (1.0 / alpha + 1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha))
    p0 = p1 / alpha
    f0 = c * alpha**2 + c * tie_weight(alpha, gamma)
    f1 = c * (alpha + alpha * (1.0 - alpha))
    return f0 * p0 + f1 * p1 + p1 * c * 2.0 * alpha**2 * (1.0 - alpha) / (1.0 - 2.0 * alpha)


def selfish_block_only(alpha: float, gamma: float) -> float:
    """Per-unit-time reward of always-hide selfish mining with C = 1."""
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    p1 = 1.0 / (1.0 / alpha + 1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha))
    lam = markov.orphan_rate(alpha, p1)
    return block_only_formula(alpha, gamma, lam) / (1.0 - lam)


def linear_only_formula(alpha: float, gamma: float, beta: float, lam: float) -> float:
    """Per-event reward for R(t) = t at orphan rate ``lam``, written out term by term."""
    mu = 1.0 - lam
    h = 1.0 - math.exp(-beta / mu) if math.isfinite(beta) else 1.0
    if h == 0.0:
        return alpha * mu
    p1 = 1.0 / (1.0 / (alpha * h) + 1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha))
    p0 = p1 / (alpha * h)
    ex = math.exp(-beta / mu) if math.isfinite(beta) else 0.0
    published = (beta + mu) * ex if math.isfinite(beta) else 0.0
    case1 = alpha * published
    case2 = alpha**2 * (mu - published)
    case3 = tie_weight(alpha, gamma) * (mu - published)
    f1 = mu * (alpha + 2.0 * alpha * (1.0 - alpha))
    return (case1 + case2 + case3) * p0 + f1 * p1 + p1 * mu * alpha**2 * (3.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha)


__all__ = [
    "COMPONENTS",
    "RewardBreakdown",
    "StateZeroRewards",
    "PerStateRewards",
    "AttackerReward",
    "f_state",
    "f0",
    "per_state_rewards",
    "reward_per_event",
    "attacker_reward",
    "honest_benchmark",
    "closed_grid",
    "selfish_block_only",
    "block_only_formula",
    "linear_only_formula",
    "erlang_means",
    "tail_terms_needed",
]
