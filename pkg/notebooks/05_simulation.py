# coding: utf-8

# # Monte Carlo check
#
# The simulator plays the fork race event by event with real timestamps and
# credits only canonical blocks. It should agree with the analytic numbers.

# In[1]:

from betacutoff import AttackerParams, SimConfig, attacker_reward, combined, simulate, state_occupancy

spec = combined()
params = AttackerParams(0.3, 0.0, 3.0)


# In[2]:

ana = attacker_reward(spec, params)
sim = simulate(SimConfig(spec, params, "analytic", horizon_events=2_000_000, seed=0))
for comp in ("block", "linear", "bernoulli"):
    a, s, se = getattr(ana.breakdown, comp), getattr(sim.attacker, comp), getattr(sim.attacker_se, comp)
    print(f"{comp:>9}: analytic={a:.5f} sim={s:.5f} z={(s - a) / se:+.2f}")
print(f"orphan rate: analytic={ana.equilibrium.lam:.5f} sim={sim.empirical_orphan_rate:.5f}")


# Letting the simulator find the orphan rate itself instead of using the analytic one.

# In[3]:

cal = simulate(SimConfig(spec, params, "self_calibrating", horizon_events=1_000_000, seed=1))
print("calibrated lambda:", cal.lam_used, "growth rate:", cal.canonical_growth_rate)


# State occupancy from a trace.

# In[4]:

from betacutoff import Constant

run = simulate(SimConfig(Constant(1.0), AttackerParams(1 / 3), "analytic", 1_000_000, seed=2, record_trace=True))
occ = state_occupancy(run)
print({k: round(float(v), 4) for k, v in list(occ.items())[:5]})
