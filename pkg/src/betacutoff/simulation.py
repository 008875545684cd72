"""Monte Carlo simulation of one beta-cutoff attacker against an aggregate honest miner.

Block-creation events arrive with exponential spacing of mean ``1 - lam``; the
winner is the attacker with probability alpha. A small fork state machine
(no fork, race, lead i, after-reveal) decides what is hidden, published and
orphaned, and canonical blocks are credited block, linear and Bernoulli
rewards. Results are per unit of simulated time with batch-means standard
errors.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel as K
from .calculus import RewardBreakdown
from .markov import AttackerParams, ConvergenceError, solve_equilibrium
from .rewards import RewardSpec, terms

MIN_EVENTS = 10_000
CHUNK = 1 << 20
BATCHES = 100
PRIVATE_CAPACITY = 1 << 16
OCCUPANCY_LEADS = 64
GROWTH_TOL = 0.002
MAX_ROUNDS = 20


@dataclass(frozen=True)
class SimConfig:
    spec: RewardSpec
    params: AttackerParams
    lambda_mode: str | float = "analytic"  # "analytic", "self_calibrating" or a fixed orphan rate
    horizon_events: int = 1_000_000
    seed: int = 0
    replicas: int = 1
    record_trace: bool = False

    def __post_init__(self):
        if self.horizon_events < MIN_EVENTS:
            raise ValueError(f"horizon_events must be >= {MIN_EVENTS}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if isinstance(self.lambda_mode, str):
            if self.lambda_mode not in ("analytic", "self_calibrating"):
                raise ValueError(f"unknown lambda mode {self.lambda_mode!r}")
        elif not 0.0 <= float(self.lambda_mode) < 1.0:
            raise ValueError(f"fixed orphan rate must lie in [0, 1), got {self.lambda_mode}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Trace:
    """One record per event of the first replica."""

    time: np.ndarray
    winner: np.ndarray  # 1 attacker, 0 honest
    state_before: np.ndarray
    state_after: np.ndarray
    action: np.ndarray
    reward: np.ndarray

    ACTIONS = ("public", "hide", "publish", "extend", "race", "resolve", "reveal", "match")


@dataclass(frozen=True)
class SimResult:
    attacker: RewardBreakdown
    attacker_se: RewardBreakdown
    honest: RewardBreakdown
    honest_se: RewardBreakdown
    empirical_orphan_rate: float
    orphan_rate_se: float
    canonical_growth_rate: float
    events: int
    elapsed_sim_time: float
    lam_used: float
    attacker_total_se: float
    honest_total_se: float
    occupancy_counts: np.ndarray = field(repr=False)  # [0, 0', 0'', lead 1, 2, ...]; the last lead bucket absorbs longer leads
    trace: Trace | None = field(default=None, repr=False)


@dataclass
class _Replica:
    att: np.ndarray
    hon: np.ndarray
    cnt: np.ndarray
    occ: np.ndarray
    batch_att: np.ndarray
    batch_hon: np.ndarray
    batch_time: np.ndarray
    batch_cnt: np.ndarray
    elapsed: float
    trace: Trace | None


def _bernoulli_arrays(spec):
    bern = terms(spec).bernoullis
    return np.array([b.p for b in bern]), np.array([b.e for b in bern])


def _run_replica(spec, params, mu, events, seed_seq, trace_on):
    tm = terms(spec)
    bp, be = _bernoulli_arrays(spec)
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    fs, ist, priv_t, priv_b = K.fresh_state(PRIVATE_CAPACITY)
    att, hon = np.zeros(3), np.zeros(3)
    cnt = np.zeros(K.N_COUNTERS, dtype=np.int64)
    occ = np.zeros(3 + OCCUPANCY_LEADS, dtype=np.int64)
    batch_size = -(-events // BATCHES)
    nb = -(-events // batch_size)
    batch_att, batch_hon = np.zeros((nb, 3)), np.zeros((nb, 3))
    batch_time = np.zeros(nb)
    batch_cnt = np.zeros((nb, 2), dtype=np.int64)
    n_tr = events if trace_on else 0
    tr = (np.zeros(n_tr), np.zeros(n_tr, np.int8), np.zeros(n_tr, np.int64), np.zeros(n_tr, np.int64),
          np.zeros(n_tr, np.int8), np.zeros(n_tr))
    done = 0
    while done < events:
        n = min(CHUNK, events - done)
        dt = rng.standard_exponential(n)
        u = rng.random(n)
        ub = rng.random((n, bp.size))
        err = K.run_chunk(
            dt, u, ub, mu, params.alpha, params.gamma, params.beta, tm.constant, tm.rate, bp, be,
            fs, ist, priv_t, priv_b, att, hon, cnt, occ,
            batch_att, batch_hon, batch_time, batch_cnt, done, batch_size, trace_on, *tr,
        )
        if err:
            raise RuntimeError("private chain exceeded simulator capacity")
        done += n
    trace = Trace(*tr) if trace_on else None
    return _Replica(att, hon, cnt, occ, batch_att, batch_hon, batch_time, batch_cnt, float(fs[K.T]), trace)


def _ratio_se(num, den):
    """Standard error of sum(num)/sum(den) from batch pairs (delta method)."""
    k = len(den)
    if k < 2:
        return math.nan
    r = num.sum() / den.sum()
    resid = num - r * den
    return math.sqrt(resid.var(ddof=1) * k) / den.sum()


def _merge(reps, events, mu):
    att = sum(r.att for r in reps)
    hon = sum(r.hon for r in reps)
    cnt = sum(r.cnt for r in reps)
    occ = sum(r.occ for r in reps)
    elapsed = sum(r.elapsed for r in reps)
    b_att = np.concatenate([r.batch_att for r in reps])
    b_hon = np.concatenate([r.batch_hon for r in reps])
    b_time = np.concatenate([r.batch_time for r in reps])
    b_cnt = np.concatenate([r.batch_cnt for r in reps]).astype(float)
    att_se = [_ratio_se(b_att[:, j], b_time) for j in range(3)]
    hon_se = [_ratio_se(b_hon[:, j], b_time) for j in range(3)]
    resolved = b_cnt[:, 0] + b_cnt[:, 1]
    orphans, canonical = cnt[K.ORPHANS], cnt[K.CANONICAL]
    return SimResult(
        attacker=RewardBreakdown.from_array(att / elapsed),
        attacker_se=RewardBreakdown.from_array(att_se),
        honest=RewardBreakdown.from_array(hon / elapsed),
        honest_se=RewardBreakdown.from_array(hon_se),
        empirical_orphan_rate=float(orphans / max(orphans + canonical, 1)),
        orphan_rate_se=_ratio_se(b_cnt[:, 0], resolved),
        canonical_growth_rate=float(canonical / elapsed),
        events=events * len(reps),
        elapsed_sim_time=elapsed,
        lam_used=1.0 - mu,
        attacker_total_se=_ratio_se(b_att.sum(axis=1), b_time),
        honest_total_se=_ratio_se(b_hon.sum(axis=1), b_time),
        occupancy_counts=occ,
        trace=reps[0].trace,
    )


def _run(config: SimConfig, mu: float) -> SimResult:
    seqs = np.random.SeedSequence(int(config.seed)).spawn(config.replicas)
    args = [(config.spec, config.params, mu, config.horizon_events, s, config.record_trace and i == 0)
            for i, s in enumerate(seqs)]
    if config.replicas == 1:
        reps = [_run_replica(*args[0])]
    else:
        with ThreadPoolExecutor() as pool:
            reps = list(pool.map(lambda a: _run_replica(*a), args))
    return _merge(reps, config.horizon_events, mu)


def calibrate_lambda(config: SimConfig) -> float:
    """Retarget the event rate until the canonical chain grows at rate 1.

    Every round reuses the same random streams, so the only thing that changes
    is the time scale. Returns the empirical orphan rate of the final round.
    """
    return _calibrate(config)[1].empirical_orphan_rate


def _calibrate(config):
    mu = 1.0
    for _ in range(MAX_ROUNDS):
        res = _run(config, mu)
        growth = res.canonical_growth_rate
        if abs(growth - 1.0) < GROWTH_TOL:
            return mu, res
        mu *= growth
    raise ConvergenceError(f"difficulty calibration did not reach growth 1 within {MAX_ROUNDS} rounds")


def simulate(config: SimConfig) -> SimResult:
    mode = config.lambda_mode
    if mode == "analytic":
        mu = 1.0 - solve_equilibrium(config.spec, config.params).lam
    elif mode == "self_calibrating":
        return _calibrate(config)[1]
    else:
        mu = 1.0 - float(mode)
    return _run(config, mu)


# -- state occupancy ---------------------------------------------------------------------

STATE_LABELS = ("0", "0'", "0''")


def state_occupancy(source) -> dict:
    """Empirical visit frequencies of the Markov states, keyed "0", "0'", "0''", 1, 2, ...

    ``source`` is a SimResult (all replicas) or a Trace. Each event counts the
    state it was drawn in.
    """
    if isinstance(source, SimResult):
        counts = source.occupancy_counts
    elif isinstance(source, Trace):
        before = source.state_before
        top = max(int(before.max(initial=0)), 1)
        counts = np.zeros(3 + top, dtype=np.int64)
        for code in (0, -1, -2):
            counts[-code] = int(np.count_nonzero(before == code))
        leads = before[before >= 1]
        counts[3:] = np.bincount(leads - 1, minlength=top)[:top]
    else:
        raise TypeError("expected a SimResult or Trace")
    total = counts.sum()
    if total == 0:
        raise ValueError("no events recorded")
    out = {label: counts[i] / total for i, label in enumerate(STATE_LABELS)}
    for i in range(3, len(counts)):
        if counts[i]:
            out[i - 2] = counts[i] / total
    return out


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["event", "time", "winner", "state_before", "state_after", "action", "reward"])
        for i in range(trace.time.size):
            w.writerow([
                i,
                f"{trace.time[i]:.12g}",
                "attacker" if trace.winner[i] else "honest",
                _state_name(trace.state_before[i]),
                _state_name(trace.state_after[i]),
                Trace.ACTIONS[trace.action[i]],
                f"{trace.reward[i]:.12g}",
            ])


def _state_name(code):
    code = int(code)
    return STATE_LABELS[-code] if code <= 0 else str(code)


def with_lambda(config: SimConfig, lam) -> SimConfig:
    return replace(config, lambda_mode=lam)
