# %% [markdown]
# # Walking through one trace
#
# `trace` recomputes every intermediate quantity of the correctness argument
# for a single trial and checks each inequality numerically.

# %%
import numpy as np

from gapfree.harness import make_spectrum, matrix_stream, parse_spectrum, synthesize_matrix
from gapfree.iteration import IterationConfig
from gapfree.tracer import trace

n, k = 60, 5
sigma = make_spectrum(parse_spectrum("zero-gap-at-k"), n, k)
a = synthesize_matrix(sigma, n, n, matrix_stream(0))
rep = trace(a, IterationConfig(k=k, epsilon=0.25, seed=3))
print(rep.render())

# %% [markdown]
# The worst direction y is a unit vector in the singular basis. Its mass
# splits into the head (indices below k') and the tail.

# %%
print("|y| =", np.linalg.norm(rep.y))
print("effective rank k' =", rep.kprime)
print("tail mass:", rep.tail_sum, "limit:", rep.tail_limit)
print("energy identity gap:", rep.energy_identity_gap)

# %% [markdown]
# The block condition ||G2|| / sigma_min(G1) sets the smallest t for which
# the argument goes through. The schedule only has to clear it.

# %%
print(f"block condition = {rep.g2_norm * rep.g1_inv_norm:.3f}")
print(f"min t = {rep.min_t:.2f}, t used = {rep.t_used}, bound ok = {rep.bound_ok}")
