import math

import numpy as np
import pytest

from betacutoff import calculus as K
from betacutoff import markov as M
from betacutoff import optimize as O
from betacutoff import rewards as R

RHAT = R.combined(1, 1, 0.25, 4)
LB = R.Composite([R.Constant(1), R.Linear(1)])


def test_objective_parsing():
    assert O.Objective.parse("total") == O.TOTAL
    assert O.Objective.parse("linear+block").components == ("block", "linear")
    assert O.Objective.parse("bernoulli").name == "bernoulli"
    with pytest.raises(ValueError):
        O.Objective.parse("fees")
    with pytest.raises(ValueError):
        O.Objective(())


def test_golden_section_finds_peak():
    x, fx = O.golden_max(lambda v: -(v - 1.234) ** 2, 0.0, 3.0)
    assert x == pytest.approx(1.234, abs=1e-6)


def test_honest_optimal_in_flat_region():
    res = O.optimize_beta(LB, 0.2, 0.0, O.TOTAL)
    assert res.objective_value == pytest.approx(0.4, abs=1e-12)
    assert res.beta_star == 1.0


def test_pure_selfish_at_high_alpha():
    res = O.optimize_beta(R.Constant(1), 0.4, 0.0, O.BLOCK)
    assert res.beta_star == math.inf
    assert res.objective_value == pytest.approx(K.selfish_block_only(0.4, 0.0), abs=1e-14)


def test_total_objective_dominates_single_objectives():
    best = O.optimize_beta(RHAT, 0.3, 0.0, O.TOTAL).full_breakdown.total
    for obj in (O.LINEAR, O.BERNOULLI, O.BLOCK):
        assert best >= O.optimize_beta(RHAT, 0.3, 0.0, obj).full_breakdown.total - 1e-12


def test_optimum_beats_every_grid_point():
    for obj in (O.TOTAL, O.LINEAR, O.BERNOULLI):
        res = O.optimize_beta(RHAT, 0.33, 0.2, obj)
        grid = O.search_grid(RHAT, 0.33)
        _, comps = K.closed_grid(RHAT, 0.33, 0.2, grid)
        assert res.objective_value >= (obj.mask() @ comps).max() - 1e-12
        assert res.objective_value >= res.honest_value - 1e-12


def test_generic_spec_evaluator():
    spec = R.Composite([R.Constant(1), R.Linear(1), R.Bernoulli(0.5, 1), R.Bernoulli(0.25, 2)])
    ev = O._Evaluator(spec, 0.35, 0.0, O.TOTAL)
    assert not ev.closed
    lam, comps = ev.breakdowns([1.0, 3.0, math.inf])
    assert comps.shape == (3, 3)
    assert lam[0] == 0.0
    assert comps[:, 0].sum() == pytest.approx(K.honest_benchmark(spec, 0.35).total, abs=1e-10)


@pytest.mark.parametrize("gamma,expected", [(0.0, 1 / 3), (0.25, 0.30), (0.5, 0.25)])
def test_block_thresholds(gamma, expected):
    assert O.profitability_threshold(R.Constant(1), gamma, O.BLOCK) == pytest.approx(expected, abs=0.005)


def test_no_threshold_sentinel():
    # a block-reward-only chain pays no fees, so a fee objective never beats honest
    assert O.profitability_threshold(R.Constant(1), 0.0, O.LINEAR) is None


def test_threshold_monotone_in_gamma_for_blocks():
    ts = [O.profitability_threshold(R.Constant(1), g, O.BLOCK) for g in (0.0, 0.3, 0.6, 0.9)]
    assert all(a >= b - 1e-4 for a, b in zip(ts, ts[1:]))


def test_sweep_rows():
    rows = O.sweep(RHAT, [0.1, 0.2, 0.3], 0.0, (O.TOTAL, O.LINEAR))
    assert [(r.alpha, r.objective) for r in rows] == [(a, o) for a in (0.1, 0.2, 0.3) for o in ("total", "linear")]
    single = O.sweep(RHAT, [0.25], 0.0)[0].result
    assert single == O.optimize_beta(RHAT, 0.25, 0.0)
    with pytest.raises(ValueError):
        O.sweep(RHAT, [], 0.0)


def test_total_curve_dominates_selfish():
    for a in np.arange(0.05, 0.46, 0.05):
        opt = O.optimize_beta(RHAT, float(a), 0.0, O.TOTAL).full_breakdown.total
        selfish = K.attacker_reward(RHAT, M.AttackerParams(float(a), 0.0)).total
        assert opt >= selfish - 1e-12
