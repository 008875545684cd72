# coding: utf-8

# # Attacker reward per unit time
#
# The reward calculus returns the attacker's expected income split into block,
# fee and bonus parts, at the equilibrium orphan rate.

# In[1]:

import numpy as np

from betacutoff import AttackerParams, attacker_reward, combined, honest_benchmark, selfish_block_only

spec = combined()
alpha = 0.3
print("honest:", honest_benchmark(spec, alpha))


# Sweep the cutoff. beta = C is honest mining, beta = inf always hides.

# In[2]:

for beta in (1.0, 1.5, 2.0, 3.0, 5.0, 8.0, np.inf):
    r = attacker_reward(spec, AttackerParams(alpha, 0.0, beta))
    bd = r.breakdown
    print(f"beta={beta:>4}: block={bd.block:.4f} fees={bd.linear:.4f} bonus={bd.bernoulli:.4f} total={bd.total:.4f}")


# Block-only selfish mining, the classic curve, for reference.

# In[3]:

for a in (0.2, 0.3, 1 / 3, 0.4):
    print(f"alpha={a:.3f}: {selfish_block_only(a, 0.0):.4f}")


# Closed form versus quadrature on one point.

# In[4]:

p = AttackerParams(0.35, 0.5, 4.0)
print(attacker_reward(spec, p, "closed").breakdown)
print(attacker_reward(spec, p, "quadrature").breakdown)
