"""Randomised checks of the invariants, 1000 seeded cases each (see conftest)."""

import io
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import reference_sim
from betacutoff import _kernel as KN
from betacutoff import calculus as K
from betacutoff import markov as M
from betacutoff import optimize as O
from betacutoff import rewards as R
from betacutoff import simulation as S
from betacutoff.cli import run

finite = dict(allow_nan=False, allow_infinity=False)
alphas = st.floats(0.01, 0.49, **finite)
gammas = st.floats(0.0, 1.0, **finite)
lams = st.floats(0.0, 0.6, **finite)
times = st.sampled_from([round(0.1 * k, 1) for k in range(101)])


@st.composite
def specs(draw, max_bernoullis=3):
    parts = []
    if draw(st.booleans()):
        parts.append(R.Constant(draw(st.floats(0.0, 5.0, **finite))))
    if draw(st.booleans()):
        parts.append(R.Linear(draw(st.floats(0.0, 3.0, **finite))))
    for _ in range(draw(st.integers(0, max_bernoullis))):
        parts.append(R.Bernoulli(draw(st.floats(0.0, 1.0, **finite)), draw(st.floats(0.0, 6.0, **finite))))
    if not parts:
        parts.append(R.Constant(1.0))
    if len(parts) > 1 and draw(st.booleans()):
        # nest part of the list to exercise flattening
        return R.Composite([R.Composite(parts[:1]), *parts[1:]])
    return parts[0] if len(parts) == 1 else R.Composite(parts)


@st.composite
def rhat(draw):
    """C + a t + one Bernoulli bonus, the closed-form family."""
    c = draw(st.floats(0.1, 3.0, **finite))
    a = draw(st.floats(0.1, 3.0, **finite))
    p = draw(st.floats(0.0, 1.0, **finite))
    e = draw(st.floats(0.0, 6.0, **finite))
    return R.combined(c, a, p, e), c, a, p, e


# -- reward model --------------------------------------------------------------------------


@given(specs(), times)
def test_atom_probabilities_sum_to_one(spec, t):
    atoms = R.atoms_at(spec, t)
    assert abs(atoms.probs.sum() - 1.0) < 1e-12
    assert np.all(atoms.values >= 0) and np.all(np.isfinite(atoms.values))
    assert len(atoms) <= 2 ** len(R.terms(spec).bernoullis)


@given(specs(), times, st.lists(st.floats(-1.0, 30.0, **finite), min_size=2, max_size=8))
def test_cdf_monotone_and_bounded(spec, t, xs):
    xs = sorted(xs)
    vals = [R.cdf_at(spec, t, x) for x in xs]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    atoms = R.atoms_at(spec, t)
    assert R.cdf_at(spec, t, atoms.values.min() - 1e-9) == 0.0
    assert R.cdf_at(spec, t, atoms.values.max()) == pytest.approx(1.0, abs=1e-12)


@given(specs(), times, st.lists(st.floats(0.0, 30.0, **finite), min_size=2, max_size=8))
def test_censored_mean_monotone_in_beta(spec, t, betas):
    betas = sorted(betas)
    vals = [R.censored_mean_below(spec, t, b) for b in betas]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert R.censored_mean_below(spec, t, math.inf) == pytest.approx(R.mean_at(spec, t), abs=1e-12)
    for b in betas:
        assert R.censored_mean_below(spec, t, b) + R.censored_mean_above(spec, t, b) == pytest.approx(
            R.mean_at(spec, t), abs=1e-12)


@given(specs(), specs(), times)
def test_composite_mean_is_linear(a, b, t):
    both = R.Composite([a, b])
    assert R.mean_at(both, t) == pytest.approx(R.mean_at(a, t) + R.mean_at(b, t), abs=1e-10)


@given(specs())
def test_json_round_trip(spec):
    assert R.to_dict(R.loads(R.dumps(spec))) == R.to_dict(spec)


# -- Markov engine -------------------------------------------------------------------------


@given(rhat(), alphas, st.floats(0.0, 15.0, **finite))
def test_fixed_point_residual(spec_t, alpha, beta):
    spec = spec_t[0]
    eq = M.solve_equilibrium(spec, M.AttackerParams(alpha, 0.0, beta))
    assert abs(eq.lam - M.orphan_rate(alpha, eq.stationary.p1)) < 1e-10
    assert eq.h == pytest.approx(M.hide_probability(spec, M.AttackerParams(alpha, 0.0, beta), eq.lam), abs=1e-10)
    assert (eq.lam == 0.0) == (eq.h == 0.0)
    assert 0.0 <= eq.lam < 1.0


@given(specs(), lams, st.floats(0.0, 20.0, **finite), st.floats(0.0, 5.0, **finite))
def test_hide_monotone_in_beta(spec, lam, beta, step):
    params = lambda b: M.AttackerParams(0.3, 0.0, b)  # noqa: E731
    assert M.hide_probability(spec, params(beta), lam) <= M.hide_probability(spec, params(beta + step), lam) + 1e-12


@given(st.floats(0.0, 5.0, **finite), st.floats(1e-6, 10.0, **finite), lams)
def test_constant_above_cutoff_always_hides(c, gap, lam):
    assert M.hide_probability(R.Constant(c), M.AttackerParams(0.3, 0.0, c + gap), lam) == 1.0


@given(rhat(), st.sampled_from([1.0 + 0.5 * k for k in range(15)]), st.sampled_from([0.0, 0.1, 0.2, 0.3]))
def test_hide_closed_matches_quadrature(spec_t, beta, lam):
    spec = spec_t[0]
    params = M.AttackerParams(0.3, 0.0, beta)
    closed = M.hide_probability(spec, params, lam, "closed")
    quad = M.hide_probability(spec, params, lam, "quadrature")
    assert abs(closed - quad) < 1e-9


@given(alphas.filter(lambda a: a < 0.499), st.floats(0.0, 1.0, **finite))
def test_stationary_simplex(alpha, h):
    d = M.stationary(alpha, h)
    assert abs(d.total - 1.0) < 1e-10
    for v in (d.p0, d.p0_prime, d.p0_dprime, d.p1):
        assert 0.0 <= v <= 1.0
    assert d.p0_prime == pytest.approx(d.p1 * (1 - alpha), abs=1e-15)
    assert d.p0_dprime == pytest.approx(d.p1 * alpha, abs=1e-15)


# -- reward calculus -----------------------------------------------------------------------


@given(rhat(), st.floats(0.02, 0.45, **finite), gammas, st.floats(0.0, 12.0, **finite), lams)
def test_state_zero_engines_agree(spec_t, alpha, gamma, beta, lam):
    spec = spec_t[0]
    params = M.AttackerParams(alpha, gamma, beta)
    a = K.f0(spec, params, lam, "closed")
    b = K.f0(spec, params, lam, "quadrature")
    for x, y in ((a.case_i, b.case_i), (a.case_ii, b.case_ii), (a.case_iii, b.case_iii)):
        assert np.abs(x.as_array() - y.as_array()).max() < 1e-8
    assert np.all(a.total.as_array() >= 0)


@given(rhat(), st.floats(0.02, 0.45, **finite), st.integers(1, 40), lams)
def test_path_sum_engines_agree(spec_t, alpha, i, lam):
    spec = spec_t[0]
    a = K.f_state(spec, i, alpha, lam, "closed")
    b = K.f_state(spec, i, alpha, lam, "quadrature")
    assert np.abs(a.as_array() - b.as_array()).max() < 1e-8


@given(rhat(), st.floats(0.02, 0.45, **finite), lams)
def test_tail_engines_agree_and_truncation_is_stable(spec_t, alpha, lam):
    spec, c, a, p, e = spec_t
    mu = 1.0 - lam
    n = K.tail_terms_needed(spec, alpha, mu)
    quad, _ = K._quad_tail(spec, alpha, mu, n)
    closed = K.closed_tail(c, a, p * e, alpha, mu)
    assert np.abs(quad - closed).max() < 1e-8
    longer, _ = K._quad_tail(spec, alpha, mu, n + 10)
    assert abs(longer.sum() - quad.sum()) < 1e-10


@given(rhat(), st.floats(0.01, 0.45, **finite), gammas, st.floats(0.0, 15.0, **finite))
def test_breakdown_additive_and_nonnegative(spec_t, alpha, gamma, beta):
    spec, c, a, p, e = spec_t
    r = K.attacker_reward(spec, M.AttackerParams(alpha, gamma, beta))
    bd = r.breakdown
    assert abs(bd.total - (bd.block + bd.linear + bd.bernoulli)) < 1e-10
    assert min(bd.block, bd.linear, bd.bernoulli) >= 0.0
    # each component scales with its own source only
    no_bonus = K.attacker_reward(R.Composite([R.Constant(c), R.Linear(a)]), M.AttackerParams(alpha, gamma, math.inf))
    assert no_bonus.breakdown.bernoulli == 0.0


@given(rhat(), st.floats(0.01, 0.45, **finite), gammas)
def test_cutoff_at_block_reward_is_honest(spec_t, alpha, gamma):
    spec, c, a, p, e = spec_t
    r = K.attacker_reward(spec, M.AttackerParams(alpha, gamma, c))
    assert r.equilibrium.lam == 0.0
    assert np.abs(r.breakdown.as_array() - K.honest_benchmark(spec, alpha).as_array()).max() < 1e-12


@given(st.floats(0.01, 0.45, **finite), gammas)
def test_block_only_limit(alpha, gamma):
    big = K.attacker_reward(R.Constant(1), M.AttackerParams(alpha, gamma, 1e6)).total
    assert big == pytest.approx(K.selfish_block_only(alpha, gamma), abs=1e-12)


@given(st.floats(0.01, 0.45, **finite), gammas, st.floats(0.0, 12.0, **finite))
def test_linear_only_limit(alpha, gamma, beta):
    params = M.AttackerParams(alpha, gamma, beta)
    r = K.attacker_reward(R.Linear(1), params)
    formula = K.linear_only_formula(alpha, gamma, beta, r.equilibrium.lam)
    assert abs(r.per_event.total - formula) < 1e-10


# -- optimizer -----------------------------------------------------------------------------


@given(st.floats(0.02, 0.48, **finite), gammas)
def test_total_optimum_dominates_and_beats_grid(alpha, gamma):
    spec = R.combined()
    results = {obj.name: O.optimize_beta(spec, alpha, gamma, obj) for obj in (O.TOTAL, O.BLOCK, O.LINEAR, O.BERNOULLI)}
    best = results["total"].full_breakdown.total
    for res in results.values():
        assert best >= res.full_breakdown.total - 1e-10
    grid = O.search_grid(spec, alpha)
    _, comps = K.closed_grid(spec, alpha, gamma, grid)
    for res in results.values():
        assert res.objective_value >= (res.objective.mask() @ comps).max() - 1e-12
        assert res.objective_value >= res.honest_value - 1e-12


# -- simulator -----------------------------------------------------------------------------


@given(st.floats(0.01, 0.48, **finite), gammas, st.one_of(st.just(math.inf), st.floats(0.0, 8.0, **finite)),
       st.integers(0, 2**32 - 1))
def test_simulator_bookkeeping_matches_block_tree(alpha, gamma, beta, seed):
    spec = R.combined()
    tm = R.terms(spec)
    bp, be = S._bernoulli_arrays(spec)
    rng = np.random.default_rng(seed)
    n = 1500
    dt, u, ub = rng.standard_exponential(n), rng.random(n), rng.random((n, 1))
    blocks, tip, states = reference_sim.run(dt, u, ub, 0.8, alpha, gamma, beta, tm.constant, tm.rate, bp, be)
    closed_at = [i for i, s in enumerate(states) if s == 0]
    assume(closed_at)
    last = closed_at[-1] + 1
    blocks, tip, _ = reference_sim.run(dt[:last], u[:last], ub[:last], 0.8, alpha, gamma, beta,
                                       tm.constant, tm.rate, bp, be)
    att_ref, hon_ref, orphans, canon, stamps = reference_sim.canonical_rewards(blocks, tip, tm.constant, tm.rate)
    assert np.all(np.diff(stamps) > 0)
    # orphaned blocks never pay their bonus
    paid = att_ref[2] + hon_ref[2]
    assert paid <= sum(b.bonus for b in blocks) + 1e-12
    fs, ist, pt, pb = KN.fresh_state(4096)
    att, hon = np.zeros(3), np.zeros(3)
    cnt = np.zeros(KN.N_COUNTERS, dtype=np.int64)
    occ = np.zeros(67, dtype=np.int64)
    empty = np.zeros(0)
    KN.run_chunk(dt[:last], u[:last], ub[:last], 0.8, alpha, gamma, beta, tm.constant, tm.rate, bp, be,
                 fs, ist, pt, pb, att, hon, cnt, occ, np.zeros((1, 3)), np.zeros((1, 3)), np.zeros(1),
                 np.zeros((1, 2), dtype=np.int64), 0, last, False,
                 empty, np.zeros(0, np.int8), np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int8), empty)
    assert np.allclose(att, att_ref, rtol=1e-12, atol=1e-9)
    assert np.allclose(hon, hon_ref, rtol=1e-12, atol=1e-9)
    assert cnt[KN.ORPHANS] == orphans and cnt[KN.CANONICAL] == canon


@given(st.integers(0, 2**63 - 1), st.floats(0.05, 0.45, **finite))
def test_simulation_deterministic(seed, alpha):
    cfg = S.SimConfig(R.combined(), M.AttackerParams(alpha, 0.0, 3.0), lambda_mode=0.1, horizon_events=10_000, seed=seed)
    a, b = S.simulate(cfg), S.simulate(cfg)
    assert a.attacker == b.attacker and a.honest == b.honest and a.elapsed_sim_time == b.elapsed_sim_time


# -- CLI -----------------------------------------------------------------------------------


@given(st.floats(0.0, 0.45, **finite), st.floats(0.0, 0.45, **finite), st.booleans())
def test_flags_override_config(cfg_alpha, flag_alpha, pass_flag):
    import tempfile, os  # noqa: E401

    with tempfile.TemporaryDirectory() as d:
        cfg = os.path.join(d, "c.json")
        with open(cfg, "w") as fh:
            json.dump({"alpha": cfg_alpha, "beta": 3}, fh)
        argv = ["analytic", "--config", cfg] + (["--alpha", repr(flag_alpha)] if pass_flag else [])
        out = io.StringIO()
        assert run(argv, stdout=out) == 0
        row = out.getvalue().splitlines()[1].split(",")
        assert float(row[0]) == pytest.approx(flag_alpha if pass_flag else cfg_alpha, rel=1e-11, abs=1e-300)
