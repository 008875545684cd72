# coding: utf-8

# # Reward model
#
# A block found t time units after its parent pays a constant block reward C,
# fees that accrue at rate a (so a*t), and optional Bernoulli bonuses that
# pay E with probability p. Everything here is a law over values at a given t.

# In[1]:

import numpy as np

from betacutoff import rewards as R

spec = R.combined()  # C=1, a=1, p=0.25, E=4
print(R.describe(spec))


# The reward at a fixed time is a finite mixture. Two atoms here, one per bonus outcome.

# In[2]:

atoms = R.atoms_at(spec, 1.5)
print(atoms.values, atoms.probs)
print("mean at t=1.5:", R.mean_at(spec, 1.5))


# The attacker compares the realised reward with a cutoff beta. Censored means split
# the expectation into the part below and above it.

# In[3]:

for beta in (1.0, 3.0, 5.0, 7.0, np.inf):
    below = R.censored_mean_below(spec, 1.5, beta)
    print(f"beta={beta:>4}: below={below:.4f} above={R.censored_mean_above(spec, 1.5, beta):.4f}")


# Specs serialize to JSON and back.

# In[4]:

text = R.dumps(spec)
print(text)
print(R.to_dict(R.loads(text)) == R.to_dict(spec))
