# coding: utf-8

# # Figure tables
#
# Each figure is a table with one x column and one column per curve. The CLI
# writes the same tables: `python -m betacutoff figure <name>`.

# In[1]:

from betacutoff import figures

print(figures.FIGURES)


# In[2]:

fig = figures.interpolation(alphas=(0.1, 0.2, 0.3, 0.4))
print(fig.columns)
for row in fig.rows:
    print(["%.4f" % v for v in row])


# In[3]:

fig = figures.block_only(alphas=(0.25, 0.3, 0.35, 0.4))
for row in fig.rows:
    print(["%.4f" % v for v in row])
