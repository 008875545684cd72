# coding: utf-8

# # Tuning beta and profitability thresholds

# In[1]:

from betacutoff import Composite, Constant, Linear, combined, optimize_beta, profitability_threshold
from betacutoff.optimize import BERNOULLI, BLOCK, LINEAR, TOTAL

spec = combined()


# Best cutoff for each objective at alpha = 0.35, scored on the full reward.

# In[2]:

for obj in (TOTAL, BLOCK, LINEAR, BERNOULLI):
    res = optimize_beta(spec, 0.35, 0.0, obj)
    print(f"{obj.name:>9}: beta*={res.beta_star:.4f} total reward={res.full_breakdown.total:.5f} "
          f"profitable={res.profitable}")


# Smallest alpha at which deviating from honest mining pays.

# In[3]:

print("block only:", profitability_threshold(Constant(1.0), 0.0, BLOCK))
print("block+fees:", profitability_threshold(Composite([Constant(1.0), Linear(1.0)]), 0.0, TOTAL))
print("full reward:", profitability_threshold(spec, 0.0, TOTAL))
print("fees alone:", profitability_threshold(Linear(1.0), 0.0, LINEAR))
