"""Compiled event loop for the fork simulator.

State codes: 0 = no fork, -1 = race between two length-1 forks, -2 = the
block after a full reveal, i >= 1 = private lead of i blocks.
"""

import numba
import numpy as np

ZERO, RACE, AFTER_REVEAL = 0, -1, -2

# float state slots
T, PUB_T, FORK_T, RACE_A_T, RACE_A_BONUS, RACE_H_T, RACE_H_BONUS = range(7)
N_FLOAT_STATE = 7
# int state slots
STATE, N_PRIV, N_PUB = range(3)
N_INT_STATE = 3
# counter slots
ORPHANS, CANONICAL, ATT_BLOCKS, DISCARDED = range(4)
N_COUNTERS = 4

# trace action codes
ACT_PUBLIC, ACT_HIDE, ACT_PUBLISH, ACT_EXTEND, ACT_RACE, ACT_RESOLVE, ACT_REVEAL, ACT_MATCH = range(8)

OVERFLOW = 1


@numba.njit(cache=True, nogil=True)
def _bonus(ub_row, bp, be):
    s = 0.0
    for k in range(bp.size):
        if ub_row[k] < bp[k]:
            s += be[k]
    return s


@numba.njit(cache=True, nogil=True)
def _credit(acc, batch_acc, b, c, lin, bonus):
    acc[0] += c
    acc[1] += lin
    acc[2] += bonus
    batch_acc[b, 0] += c
    batch_acc[b, 1] += lin
    batch_acc[b, 2] += bonus


@numba.njit(cache=True, nogil=True)
def run_chunk(
    dt_unit, u, ub, mu, alpha, gamma, beta, c, a, bp, be,
    fs, ist, priv_t, priv_b,
    att, hon, cnt, occ,
    batch_att, batch_hon, batch_time, batch_cnt,
    start, batch_size,
    trace_on, tr_time, tr_winner, tr_before, tr_after, tr_action, tr_reward,
):
    n = dt_unit.size
    occ_cap = occ.size - 3
    tie_hi = alpha + gamma * (1.0 - alpha)
    for k in range(n):
        g = start + k
        b = g // batch_size
        dt = dt_unit[k] * mu
        fs[T] += dt
        now = fs[T]
        batch_time[b] += dt
        s = ist[STATE]
        if s >= 1:
            occ[3 + min(s, occ_cap) - 1] += 1
        else:
            occ[-s] += 1
        attacker = u[k] < alpha
        bonus = _bonus(ub[k], bp, be)
        action = ACT_PUBLIC
        reward = 0.0

        if s == ZERO:
            lin = a * (now - fs[PUB_T])
            reward = c + lin + bonus
            if attacker and reward < beta:
                ist[STATE] = 1
                ist[N_PRIV] = 1
                ist[N_PUB] = 0
                fs[FORK_T] = fs[PUB_T]
                priv_t[0] = now
                priv_b[0] = bonus
                action = ACT_HIDE
            else:
                if attacker:
                    _credit(att, batch_att, b, c, lin, bonus)
                    cnt[ATT_BLOCKS] += 1
                    action = ACT_PUBLISH
                else:
                    _credit(hon, batch_hon, b, c, lin, bonus)
                cnt[CANONICAL] += 1
                batch_cnt[b, 1] += 1
                fs[PUB_T] = now

        elif s == AFTER_REVEAL:
            # everyone mines on the revealed tip; the attacker publishes at once
            lin = a * (now - fs[PUB_T])
            reward = c + lin + bonus
            if attacker:
                _credit(att, batch_att, b, c, lin, bonus)
                cnt[ATT_BLOCKS] += 1
            else:
                _credit(hon, batch_hon, b, c, lin, bonus)
            cnt[CANONICAL] += 1
            batch_cnt[b, 1] += 1
            fs[PUB_T] = now
            ist[STATE] = ZERO

        elif s == RACE:
            ua = u[k]
            a_t = fs[RACE_A_T]
            h_t = fs[RACE_H_T]
            fork = fs[FORK_T]
            action = ACT_RESOLVE
            if ua < tie_hi:
                # attacker fork wins; the honest length-1 block is orphaned
                _credit(att, batch_att, b, c, a * (a_t - fork), fs[RACE_A_BONUS])
                cnt[ATT_BLOCKS] += 1
                lin = a * (now - a_t)
                reward = c + lin + bonus
                if attacker:
                    _credit(att, batch_att, b, c, lin, bonus)
                    cnt[ATT_BLOCKS] += 1
                else:
                    _credit(hon, batch_hon, b, c, lin, bonus)
            else:
                _credit(hon, batch_hon, b, c, a * (h_t - fork), fs[RACE_H_BONUS])
                lin = a * (now - h_t)
                reward = c + lin + bonus
                _credit(hon, batch_hon, b, c, lin, bonus)
            cnt[ORPHANS] += 1
            cnt[CANONICAL] += 2
            batch_cnt[b, 0] += 1
            batch_cnt[b, 1] += 2
            fs[PUB_T] = now
            ist[STATE] = ZERO

        else:
            # private lead s >= 1
            if attacker:
                m = ist[N_PRIV]
                if m >= priv_t.size:
                    return OVERFLOW
                priv_t[m] = now
                priv_b[m] = bonus
                ist[N_PRIV] = m + 1
                ist[STATE] = s + 1
                action = ACT_EXTEND
                reward = c + a * (now - priv_t[m - 1]) + bonus
            elif s == 1:
                # honest block ties the hidden one: attacker publishes, race starts
                fs[RACE_A_T] = priv_t[0]
                fs[RACE_A_BONUS] = priv_b[0]
                fs[RACE_H_T] = now
                fs[RACE_H_BONUS] = bonus
                reward = c + a * (now - fs[FORK_T]) + bonus
                ist[STATE] = RACE
                action = ACT_RACE
            else:
                # this honest block will be orphaned
                cnt[ORPHANS] += 1
                batch_cnt[b, 0] += 1
                ist[N_PUB] += 1
                reward = c + bonus
                if s == 2:
                    prev = fs[FORK_T]
                    for j in range(ist[N_PRIV]):
                        _credit(att, batch_att, b, c, a * (priv_t[j] - prev), priv_b[j])
                        prev = priv_t[j]
                    cnt[ATT_BLOCKS] += ist[N_PRIV]
                    cnt[CANONICAL] += ist[N_PRIV]
                    batch_cnt[b, 1] += ist[N_PRIV]
                    fs[PUB_T] = prev
                    ist[N_PRIV] = 0
                    ist[STATE] = AFTER_REVEAL
                    action = ACT_REVEAL
                else:
                    ist[STATE] = s - 1
                    action = ACT_MATCH

        if trace_on:
            tr_time[g] = now
            tr_winner[g] = 1 if attacker else 0
            tr_before[g] = s
            tr_after[g] = ist[STATE]
            tr_action[g] = action
            tr_reward[g] = reward
    return 0


def fresh_state(capacity: int):
    fs = np.zeros(N_FLOAT_STATE)
    ist = np.zeros(N_INT_STATE, dtype=np.int64)
    return fs, ist, np.zeros(capacity), np.zeros(capacity)
