# %% [markdown]
# # How the Gaussian block condition grows with n
#
# For an n x k Gaussian G split into its first k rows G1 and the rest G2,
# ||G2|| grows like sqrt(n) while sigma_min(G1) stays put. The ratio enters
# t only through a logarithm.

# %%
import numpy as np

from gapfree.sketch import RngStream, gaussian_matrix
from gapfree.tracer import gaussian_block_condition, split_blocks

k = 10
medians = {}
for n in (50, 100, 200, 400, 800):
    vals = [gaussian_block_condition(*split_blocks(gaussian_matrix(n, k, RngStream(s, n)), k))
            for s in range(200)]
    medians[n] = np.median(vals)
    print(f"n={n:4d} median={medians[n]:8.2f}  median/sqrt(n)={medians[n] / np.sqrt(n):.3f}")

# %%
print("growth 400 vs 50:", medians[400] / medians[50], "sqrt(8) =", np.sqrt(8))
