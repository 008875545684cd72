# coding: utf-8

# # Orphan rate and the difficulty fixed point
#
# Withholding orphans blocks. Difficulty retargets so canonical blocks keep
# arriving once per unit time, which stretches block intervals by 1/(1 - lambda).
# Longer intervals mean larger fee rewards, which changes which blocks get hidden.

# In[1]:

import math

from betacutoff import AttackerParams, Constant, combined, hide_probability, solve_equilibrium, stationary
from betacutoff.markov import orphan_rate


# Pure block-reward selfish mining at alpha = 1/3 always hides.

# In[2]:

d = stationary(1 / 3, 1.0)
print("p0, p0', p0'', p1 =", d.p0, d.p0_prime, d.p0_dprime, d.p1)
print("orphan rate:", orphan_rate(1 / 3, d.p1), "(2/9 =", 2 / 9, ")")


# With fees in play the hiding probability depends on lambda, so we solve for it.

# In[3]:

spec = combined()
for beta in (1.0, 2.0, 3.0, 5.0, math.inf):
    eq = solve_equilibrium(spec, AttackerParams(0.3, 0.0, beta))
    print(f"beta={beta:>4}: lambda={eq.lam:.6f} h={eq.h:.6f} iterations={eq.iterations}")


# The closed form and the generic quadrature agree on the hiding probability.

# In[4]:

p = AttackerParams(0.3, 0.0, 3.0)
print(hide_probability(spec, p, 0.1, "closed"), hide_probability(spec, p, 0.1, "quadrature"))
print(hide_probability(Constant(1.0), AttackerParams(0.3, 0.0, 1.5), 0.2))
