"""Data tables behind each figure: one x column and one column per curve."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import calculus, optimize, simulation
from .markov import AttackerParams
from .optimize import BERNOULLI, BLOCK, LINEAR, TOTAL
from .rewards import Composite, Constant, Linear, RewardSpec, combined, terms, to_dict

FIGURES = ("interpolation", "threshold-alphas", "bernoulli", "rew-comp", "sims", "linear-only", "block-only")
ALPHAS = tuple(round(0.01 * k, 2) for k in range(5, 46))


@dataclass
class FigureData:
    name: str
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows], dtype=float)


def _spec_parts(spec):
    tm = terms(spec)
    p, e = (tm.bernoullis[0].p, tm.bernoullis[0].e) if tm.bernoullis else (0.0, 0.0)
    return tm.constant, tm.rate, p, e


def interpolation(spec: RewardSpec | None = None, alphas=ALPHAS, gamma: float = 0.0) -> FigureData:
    """Share of each reward source an attacker collects.

    ``selfish`` is the block share under always-hide, ``linear`` the fee share
    with beta tuned for fees alone, ``linear_block`` the share of the summed
    block + fee reward with beta tuned for that sum.
    """
    c, a, _, _ = _spec_parts(spec or Composite([Constant(1.0), Linear(1.0)]))
    both = Composite([Constant(c), Linear(a)])
    rows = []
    for al in alphas:
        selfish = calculus.attacker_reward(Constant(c), AttackerParams(al, gamma)).breakdown.block / c
        lin = optimize.optimize_beta(Linear(a), al, gamma, LINEAR).objective_value / a
        lb = optimize.optimize_beta(both, al, gamma, TOTAL).objective_value / (c + a)
        rows.append([al, al, selfish, lin, lb])
    return FigureData("interpolation", ["alpha", "honest", "selfish", "linear", "linear_block"], rows,
                      {"block_reward": c, "linear_rate": a, "gamma": gamma})


THRESHOLD_STRATEGIES = {
    "block": (lambda c, a, p, e: Constant(c), BLOCK),
    "linear": (lambda c, a, p, e: Linear(a), LINEAR),
    "linear_block": (lambda c, a, p, e: Composite([Constant(c), Linear(a)]), TOTAL),
    "total": (lambda c, a, p, e: combined(c, a, p, e), TOTAL),
}


def threshold_alphas(spec: RewardSpec | None = None, gammas=tuple(round(0.1 * k, 1) for k in range(11))) -> FigureData:
    parts = _spec_parts(spec or combined())
    rows = []
    for g in gammas:
        row = [g]
        for build, obj in THRESHOLD_STRATEGIES.values():
            t = optimize.profitability_threshold(build(*parts), g, obj)
            row.append(math.nan if t is None else t)
        rows.append(row)
    return FigureData("threshold-alphas", ["gamma", *THRESHOLD_STRATEGIES], rows, {"reward": dict(zip("cape", parts))})


def bernoulli(spec: RewardSpec | None = None, alphas=ALPHAS, gamma: float = 0.0) -> FigureData:
    """Shares when tuning beta for Bernoulli bonuses alone versus for the full reward."""
    spec = spec or combined()
    c, a, p, e = _spec_parts(spec)
    rows = []
    for al in alphas:
        selfish = calculus.attacker_reward(Constant(c), AttackerParams(al, gamma)).breakdown.block / c
        bern = optimize.optimize_beta(spec, al, gamma, BERNOULLI).objective_value / (p * e)
        total = optimize.optimize_beta(spec, al, gamma, TOTAL).objective_value / (c + a + p * e)
        rows.append([al, al, selfish, bern, total])
    return FigureData("bernoulli", ["alpha", "honest", "selfish", "bernoulli", "total"], rows,
                      {"reward": to_dict(spec), "gamma": gamma})


def rew_comp(spec: RewardSpec | None = None, alphas=ALPHAS, gamma: float = 0.0) -> FigureData:
    """Total reward of strategies tuned for different subsets, all scored on the full reward."""
    spec = spec or combined()
    rows = []
    for al in alphas:
        honest = calculus.honest_benchmark(spec, al).total
        selfish = calculus.attacker_reward(spec, AttackerParams(al, gamma)).total
        row = [al, honest, selfish]
        for obj in (BLOCK, LINEAR, BERNOULLI, TOTAL):
            row.append(optimize.optimize_beta(spec, al, gamma, obj).full_breakdown.total)
        rows.append(row)
    return FigureData("rew-comp", ["alpha", "honest", "selfish", "block", "linear", "bernoulli", "total"], rows,
                      {"reward": to_dict(spec), "gamma": gamma})


SIM_ALPHAS = (0.1, 0.2, 0.3, 0.4)
SIM_BETAS = (1.5, 3.0, 5.0)


def sims(spec: RewardSpec | None = None, alphas=SIM_ALPHAS, betas=SIM_BETAS, gamma: float = 0.0,
         events: int = 1_000_000, seed: int = 0, replicas: int = 1, lambda_mode="analytic") -> FigureData:
    """Analytic versus simulated per-component rewards and orphan rate."""
    spec = spec or combined()
    cols = ["alpha", "beta"]
    for comp in ("block", "linear", "bernoulli", "lambda"):
        cols += [f"{comp}_analytic", f"{comp}_sim", f"{comp}_se"]
    rows = []
    seeds = np.random.SeedSequence(seed).generate_state(len(alphas) * len(betas), dtype=np.uint64)
    k = 0
    for al in alphas:
        for b in betas:
            params = AttackerParams(al, gamma, b)
            ana = calculus.attacker_reward(spec, params)
            cfg = simulation.SimConfig(spec, params, lambda_mode, events, int(seeds[k]), replicas)
            k += 1
            res = simulation.simulate(cfg)
            row = [al, b]
            for comp in ("block", "linear", "bernoulli"):
                row += [getattr(ana.breakdown, comp), getattr(res.attacker, comp), getattr(res.attacker_se, comp)]
            row += [ana.equilibrium.lam, res.empirical_orphan_rate, res.orphan_rate_se]
            rows.append(row)
    return FigureData("sims", cols, rows, {"reward": to_dict(spec), "gamma": gamma, "events": events,
                                           "seed": seed, "replicas": replicas, "lambda_mode": lambda_mode})


def linear_only(alphas=(0.2, 0.3, 0.4), lams=(0.0, 0.5), betas=tuple(0.5 * k for k in range(0, 21)),
                gamma: float = 0.0) -> FigureData:
    """Per-event reward for R(t) = t: generic engine next to the written-out formula."""
    rows = []
    for al in alphas:
        for lam in lams:
            for b in betas:
                params = AttackerParams(al, gamma, b)
                engine = calculus.reward_per_event(Linear(1.0), params, lam, method="quadrature").total
                rows.append([al, lam, b, engine, calculus.linear_only_formula(al, gamma, b, lam)])
    return FigureData("linear-only", ["alpha", "lambda", "beta", "engine", "formula"], rows, {"gamma": gamma})


def block_only(alphas=tuple(round(0.01 * k, 2) for k in range(1, 50)), gammas=(0.0, 0.25, 0.5)) -> FigureData:
    rows = []
    for al in alphas:
        rows.append([al, al, *(calculus.selfish_block_only(al, g) for g in gammas)])
    return FigureData("block-only", ["alpha", "honest", *(f"gamma_{g:g}" for g in gammas)], rows, {})


def build(name: str, **kw) -> FigureData:
    spec = kw.get("spec")
    gamma = kw.get("gamma", 0.0)
    if name == "interpolation":
        return interpolation(spec, gamma=gamma)
    if name == "threshold-alphas":
        return threshold_alphas(spec)
    if name == "bernoulli":
        return bernoulli(spec, gamma=gamma)
    if name == "rew-comp":
        return rew_comp(spec, gamma=gamma)
    if name == "sims":
        return sims(spec, gamma=gamma, events=kw.get("events", 1_000_000), seed=kw.get("seed", 0),
                    replicas=kw.get("replicas", 1), lambda_mode=kw.get("lambda_mode", "analytic"))
    if name == "linear-only":
        return linear_only(gamma=gamma)
    if name == "block-only":
        return block_only()
    raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")


__all__ = ["FIGURES", "FigureData", "build"]
