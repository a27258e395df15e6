# %% [markdown]
# # Random draws versus a fixed schedule over the same ensemble
#
# Given a weighted set of measurement vectors, we can either draw each
# measurement at random (exponent IC) or use each vector an exact share of
# the time (exponent OC).  OC is never smaller.

# %%
from itertools import combinations

import numpy as np

from chtest import (
    AnomalyModel,
    Ensemble,
    Gaussian1D,
    enumerate_hypotheses,
    expected_chernoff,
    holder_lower_bound,
    inner_chernoff,
    oc_via_kl_balance,
    optimize_base_vector,
    outer_chernoff,
    permutation_ensemble,
)

model = AnomalyModel(7, 1, Gaussian1D(0, 1), Gaussian1D(0, 100))
separate = Ensemble(np.eye(7), np.full(7, 1 / 7))
h1, h2 = enumerate_hypotheses(7, 1)[:2]

# %%
rows = [
    ("Hoelder lower bound", holder_lower_bound(separate, model, h1, h2)),
    ("inner (random draws)", inner_chernoff(separate, model, h1, h2).value),
    ("outer (scheduled)", outer_chernoff(separate, model, h1, h2).value),
    ("outer via KL balance", oc_via_kl_balance(separate, model, h1, h2).value),
    ("mean per-atom Chernoff", expected_chernoff(separate, model, h1, h2)),
]
for name, value in rows:
    print(f"{name:<24}{value:.6f}")

# %% [markdown]
# ## Symmetric ensembles
#
# For one mean-shifted variable among equal-variance ones, the best base
# vector spread over all its coordinate permutations makes every pair of
# hypotheses equally hard.  Any unit vector whose entries sum to zero is
# optimal.

# %%
shift = AnomalyModel(4, 1, Gaussian1D(0, 1), Gaussian1D(1, 1))
base = optimize_base_vector(shift, seed=0)
print("base vector:", np.round(base.a, 4), " entry sum:", round(float(base.a.sum()), 8))
ens = permutation_ensemble(base.a)
values = [outer_chernoff(ens, shift, a, b).value for a, b in combinations(enumerate_hypotheses(4, 1), 2)]
print("pairwise OC:", np.round(values, 10))
print("separate min OC:",
      min(outer_chernoff(Ensemble(np.eye(4), np.full(4, 0.25)), shift, a, b).value
          for a, b in combinations(enumerate_hypotheses(4, 1), 2)))
