"""The beta-cutoff selfish-mining Markov chain and its difficulty fixed point.

States: 0 (no private chain), 0' (race between two length-1 forks), 0'' (the
block right after the attacker reveals a lead-2 chain) and i >= 1 (private
lead of i blocks). Events occur at rate 1/(1 - lam), where ``lam`` is the
orphan rate; difficulty adjustment makes ``lam`` the solution of a fixed-point
problem because the hiding probability itself depends on block times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .rewards import RewardSpec, censored_components, crossing_times, terms

FIXED_POINT_TOL = 1e-12
MAX_ITERATIONS = 200


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AttackerParams:
    alpha: float
    gamma: float = 0.0
    beta: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(f"alpha must lie in [0, 0.5), got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.beta >= 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


@dataclass(frozen=True)
class StationaryDistribution:
    p0: float
    p0_prime: float
    p0_dprime: float
    p1: float
    tail_ratio: float

    def p(self, i: int) -> float:
        """Mass of the lead-``i`` state, i >= 1."""
        if i < 1:
            raise ValueError("lead states start at 1")
        return self.p1 * self.tail_ratio ** (i - 1)

    @property
    def total(self) -> float:
        return self.p0 + self.p0_prime + self.p0_dprime + self.p1 / (1.0 - self.tail_ratio)


@dataclass(frozen=True)
class Equilibrium:
    lam: float
    h: float
    stationary: StationaryDistribution
    iterations: int

    @property
    def block_interval(self) -> float:
        """Mean time between block-creation events, 1 - lam."""
        return 1.0 - self.lam


def _check_lambda(lam):
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"orphan rate must lie in [0, 1), got {lam}")


def is_closed_form(spec: RewardSpec) -> bool:
    """True for C + a t + (at most one) Bernoulli bonus, the family with closed forms."""
    return len(terms(spec).bernoullis) <= 1


# -- hiding probability ------------------------------------------------------------


def publish_fractions(constant, rate, p, e, beta, mu):
    """Closed-form pieces for R(t) = C + a t + E 1[X=1] with t ~ Exp(mean ``mu``).

    Returns ``(x_fail, x_succ, t_fail, t_succ)``: the probability that the block
    is published (reward >= beta) when the trial fails / succeeds, and
    E[t; published] in each case. Vectorised over ``beta`` and ``mu``.
    """
    beta = np.asarray(beta, dtype=float)
    mu = np.asarray(mu, dtype=float)
    x0, t0 = _published(constant, rate, beta, mu)
    x1, t1 = _published(constant + e, rate, beta, mu)
    if p == 0.0:
        x1, t1 = np.zeros_like(x1), np.zeros_like(t1)
    return x0, x1, t0, t1


def _published(level, rate, beta, mu):
    # block published iff level + rate * t >= beta
    beta, mu = np.broadcast_arrays(beta, mu)
    if rate == 0.0:
        x = np.where(beta <= level, 1.0, 0.0)
        return x, x * mu
    with np.errstate(over="ignore"):  # tiny rates push tau to inf, handled below
        tau = np.maximum((beta - level) / rate, 0.0)
    finite = np.isfinite(tau)
    tau_f = np.where(finite, tau, 0.0)
    x = np.where(finite, np.exp(-tau_f / mu), 0.0)
    return x, np.where(finite, (mu + tau_f) * x, 0.0)


def _closed_hide(spec, beta, mu):
    tm = terms(spec)
    p, e = (tm.bernoullis[0].p, tm.bernoullis[0].e) if tm.bernoullis else (0.0, 0.0)
    x0, x1, _, _ = publish_fractions(tm.constant, tm.rate, p, e, beta, mu)
    return (1.0 - p) * (1.0 - x0) + p * (1.0 - x1)


def _quadrature_hide(spec, beta, mu):
    def integrand(t):
        below_prob, _, _ = censored_components(spec, t, beta)
        return np.exp(-t / mu) / mu * below_prob

    upper = quadrature.exp_tail_cutoff(mu)
    return float(quadrature.simpson(integrand, 0.0, upper, tol=1e-14, points=crossing_times(spec, beta)))


def hide_probability(spec: RewardSpec, params: AttackerParams, lam: float, method: str = "auto") -> float:
    """Probability that a block found in state 0 is withheld, before the alpha factor.

    Integrates the exponential block-time density against Pr[R(t) < beta].
    ``method`` is "closed", "quadrature" or "auto" (closed form when available).
    """
    _check_lambda(lam)
    mu = 1.0 - lam
    method = _pick(spec, method)
    if method == "closed":
        return float(_closed_hide(spec, params.beta, mu))
    return _quadrature_hide(spec, params.beta, mu)


def _pick(spec, method):
    if method == "auto":
        return "closed" if is_closed_form(spec) else "quadrature"
    if method == "closed" and not is_closed_form(spec):
        raise ValueError("closed form needs at most one Bernoulli component")
    if method not in ("closed", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    return method


# -- stationary law and orphan rate ------------------------------------------------


def stationary(alpha: float, h: float) -> StationaryDistribution:
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"h must lie in [0, 1], got {h}")
    ratio = alpha / (1.0 - alpha)
    if h == 0.0:
        return StationaryDistribution(1.0, 0.0, 0.0, 0.0, ratio)
    # written without 1/(alpha h) so that subnormal h cannot overflow
    ah = alpha * h
    scale = 1.0 + ah * (1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha))
    p1 = ah / scale
    return StationaryDistribution(
        p0=1.0 / scale,
        p0_prime=p1 * (1.0 - alpha),
        p0_dprime=p1 * alpha,
        p1=p1,
        tail_ratio=ratio,
    )


def orphan_rate(alpha, p1):
    """Fraction of created blocks that end up orphaned.

    One block is lost per visit to the race state, and every honest block found
    while the attacker leads by two or more is abandoned.
    """
    return p1 * (1.0 - alpha) * (1.0 + alpha / (1.0 - 2.0 * alpha))


def _p1(alpha, h):
    h = np.asarray(h, dtype=float)
    ah = alpha * h
    return ah / (1.0 + ah * (1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha)))


def iterate_lambda(hide, alpha, shape=(), tol=FIXED_POINT_TOL, max_iter=MAX_ITERATIONS):
    """Plain fixed-point iteration lam <- orphan_rate(alpha, p1(hide(lam))) from lam = 0.

    ``hide`` maps an array of orphan rates to hiding probabilities. Returns
    ``(lam, h, iterations)``.
    """
    lam = np.zeros(shape)
    for it in range(1, max_iter + 1):
        h = hide(lam)
        new = orphan_rate(alpha, _p1(alpha, h))
        step = np.max(np.abs(new - lam)) if np.size(new) else 0.0
        lam = new
        if step < tol:
            return lam, hide(lam), it
    raise ConvergenceError(f"orphan-rate fixed point did not converge in {max_iter} iterations (alpha={alpha})")


def solve_equilibrium(spec: RewardSpec, params: AttackerParams, method: str = "auto") -> Equilibrium:
    alpha = params.alpha
    if alpha == 0.0:
        return Equilibrium(0.0, 0.0, StationaryDistribution(1.0, 0.0, 0.0, 0.0, 0.0), 0)
    method = _pick(spec, method)
    if method == "closed":
        lam, h, its = iterate_lambda(lambda l: _closed_hide(spec, params.beta, 1.0 - l), alpha)
    else:
        lam, h, its = iterate_lambda(lambda l: _quadrature_hide(spec, params.beta, 1.0 - float(l)), alpha)
    lam, h = float(lam), float(h)
    return Equilibrium(lam, h, stationary(alpha, min(max(h, 0.0), 1.0)), its)
