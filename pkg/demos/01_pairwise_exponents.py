# %% [markdown]
# # How fast can two Gaussians be told apart?
#
# The Chernoff information C(g1, g2) is the exponential rate at which the
# best test between two laws improves with the number of samples.  This
# walk-through computes it for a few pairs and turns it into a sample count.

# %%
import numpy as np

from chtest import Gaussian1D, chernoff_gaussian, chernoff_zero_mean, log_affinity, sample_complexity

narrow, wide = Gaussian1D(0, 1), Gaussian1D(0, 4)

# %% [markdown]
# The exponent is the worst case of the negated log-affinity over the
# geometric-mixing weight lambda.  Printing the curve shows where it peaks.

# %%
for lam in np.linspace(0.1, 0.9, 9):
    print(f"lambda={lam:.1f}  -log affinity={-log_affinity(narrow, wide, lam):.5f}")

res = chernoff_gaussian(narrow, wide)
print(f"\nC = {res.value:.6f} nats at lambda* = {res.lambda_star:.4f}")

# %% [markdown]
# lambda* is the weight on the *first* argument.  Swapping the pair swaps it
# to 1 - lambda*, while the value stays put.

# %%
swapped = chernoff_gaussian(wide, narrow)
print(f"swapped: C = {swapped.value:.6f}, lambda* = {swapped.lambda_star:.4f}")

# %% [markdown]
# With equal means the exponent depends only on the variance ratio B.  It
# grows without bound, a little slower than half of log B.

# %%
for B in (1.5, 4, 100, 1e4, 1e6):
    print(f"B={B:>9g}  C={chernoff_zero_mean(B):.4f}  0.5*log(B)={0.5 * np.log(B):.4f}")

# %% [markdown]
# Union bound over 100 single-anomaly hypotheses: measurements needed for a
# 1% error target at this exponent.

# %%
print("m needed:", sample_complexity(res.value, n=100, k=1, target_error=0.01))
