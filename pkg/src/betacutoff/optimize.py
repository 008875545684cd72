"""Choosing the cutoff beta and locating profitability thresholds in alpha."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import markov
from .calculus import COMPONENTS, RewardBreakdown, attacker_reward, closed_grid, honest_benchmark
from .markov import AttackerParams
from .rewards import RewardSpec, terms

GRID_POINTS = 400
SEARCH_SPAN = 30.0
GOLDEN_TOL = 1e-6
PROFIT_MARGIN = 1e-9
THRESHOLD_TOL = 1e-4
ALPHA_STEP = 0.01
ALPHA_MAX = 0.5
TIE_TOL = 1e-13


@dataclass(frozen=True)
class Objective:
    """Which reward components an attacker tries to maximise."""

    components: tuple

    def __post_init__(self):
        comps = tuple(c for c in COMPONENTS if c in self.components)
        if not comps:
            raise ValueError("objective needs at least one component")
        unknown = set(self.components) - set(COMPONENTS)
        if unknown:
            raise ValueError(f"unknown reward components {sorted(unknown)}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, text: str) -> "Objective":
        """``total``, a single component name, or names joined by ``+`` or ``,``."""
        text = text.strip().lower()
        if text in ("total", "all"):
            return cls(COMPONENTS)
        names = [t.strip() for t in text.replace(",", "+").split("+") if t.strip()]
        return cls(tuple(names))

    @property
    def name(self) -> str:
        return "total" if self.components == COMPONENTS else "+".join(self.components)

    def mask(self) -> np.ndarray:
        return np.array([c in self.components for c in COMPONENTS], dtype=float)

    def __call__(self, breakdown: RewardBreakdown) -> float:
        return breakdown.masked(self.components)


TOTAL = Objective(COMPONENTS)
BLOCK = Objective(("block",))
LINEAR = Objective(("linear",))
BERNOULLI = Objective(("bernoulli",))


@dataclass(frozen=True)
class OptimizationResult:
    alpha: float
    gamma: float
    objective: Objective
    beta_star: float
    objective_value: float
    full_breakdown: RewardBreakdown
    honest_value: float
    lam: float

    @property
    def profitable(self) -> bool:
        return self.objective_value > self.honest_value + PROFIT_MARGIN


class _Evaluator:
    """Masked per-unit-time reward as a function of beta, batched when possible."""

    def __init__(self, spec, alpha, gamma, objective):
        self.spec, self.alpha, self.gamma = spec, alpha, gamma
        self.mask = objective.mask()
        self.closed = markov.is_closed_form(spec)

    def breakdowns(self, betas):
        betas = np.atleast_1d(np.asarray(betas, dtype=float))
        if self.closed:
            return closed_grid(self.spec, self.alpha, self.gamma, betas)
        lams, rows = [], []
        for b in betas:
            res = attacker_reward(self.spec, AttackerParams(self.alpha, self.gamma, float(b)))
            lams.append(res.equilibrium.lam)
            rows.append(res.breakdown.as_array())
        return np.array(lams), np.array(rows).T

    def values(self, betas):
        _, comps = self.breakdowns(betas)
        return self.mask @ comps

    def scalar(self, beta):
        return float(self.values([beta])[0])


def search_grid(spec: RewardSpec, alpha: float, points: int = GRID_POINTS) -> np.ndarray:
    """Finite cutoffs in [C, C + max bonus + 30 mean block intervals of fees]."""
    tm = terms(spec)
    # mean event spacing under full hiding, the shortest it gets
    lam_bar = markov.orphan_rate(alpha, markov._p1(alpha, 1.0)) if alpha > 0 else 0.0
    per_interval = tm.rate if tm.rate > 0 else 1.0
    upper = tm.constant + tm.max_bonus + SEARCH_SPAN * per_interval * (1.0 - float(lam_bar))
    return np.linspace(tm.constant, upper, points)


def golden_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_beta(spec: RewardSpec, alpha: float, gamma: float, objective: Objective = TOTAL) -> OptimizationResult:
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha}")
    AttackerParams(alpha, gamma)  # validates gamma
    ev = _Evaluator(spec, alpha, gamma, objective)
    grid = search_grid(spec, alpha)
    vals = ev.values(grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    honest_beta = float(terms(spec).constant)
    # the two named strategies come first so they win numerical ties
    candidates = [(honest_beta, ev.scalar(honest_beta)), (math.inf, ev.scalar(math.inf))]
    candidates.append((float(grid[k]), float(vals[k])))
    if hi > lo:
        candidates.append(golden_max(ev.scalar, float(lo), float(hi)))
    best = max(v for _, v in candidates)
    beta_star, value = next(bv for bv in candidates if bv[1] >= best - TIE_TOL * max(1.0, abs(best)))
    lam, comps = ev.breakdowns([beta_star])
    return OptimizationResult(
        alpha=alpha,
        gamma=gamma,
        objective=objective,
        beta_star=beta_star,
        objective_value=value,
        full_breakdown=RewardBreakdown.from_array(comps[:, 0]),
        honest_value=objective(honest_benchmark(spec, alpha)),
        lam=float(lam[0]),
    )


def is_profitable(spec, alpha, gamma, objective) -> bool:
    return optimize_beta(spec, alpha, gamma, objective).profitable


def profitability_threshold(
    spec: RewardSpec, gamma: float, objective: Objective = TOTAL, step: float = ALPHA_STEP, tol: float = THRESHOLD_TOL
) -> float | None:
    """Smallest alpha at which the optimised masked reward beats the masked honest benchmark.

    Scans alpha on a coarse grid, then bisects the first bracket. Returns None
    when no alpha below one half is profitable.
    """
    prev = 0.0
    alpha = step
    while alpha < ALPHA_MAX - 1e-12:
        if is_profitable(spec, alpha, gamma, objective):
            lo, hi = prev, alpha
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if is_profitable(spec, mid, gamma, objective):
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        prev = alpha
        alpha = round(alpha + step, 12)
    return None


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    objective: str
    result: OptimizationResult


def sweep(spec: RewardSpec, alphas, gamma: float, objectives=(TOTAL,)) -> list[SweepRow]:
    """One optimisation per (alpha, objective), in the order given."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("alpha grid is empty")
    rows = []
    for a in alphas:
        for obj in objectives:
            rows.append(SweepRow(a, obj.name, optimize_beta(spec, a, gamma, obj)))
    return rows
