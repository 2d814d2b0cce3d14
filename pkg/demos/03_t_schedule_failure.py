# %% [markdown]
# # When is the schedule load-bearing?
#
# With a slowly decaying spectrum and t forced to 1, one might expect the
# bound to break. For geometric ratio 0.99, k = 10 and epsilon = 0.1 it
# does not: sigma_1 / sigma_11 is about 1.106, so even the crudest basis
# lands inside the (1 + epsilon) window. A smaller epsilon is needed before
# t visibly matters.

# %%
from gapfree.harness import make_spectrum, parse_spectrum, sweep

n, k = 200, 10
sigma = make_spectrum(parse_spectrum("geometric:ratio=0.99"), n, k)
print("sigma_1 / sigma_k+1 =", sigma[0] / sigma[k])

# %%
res = sweep([parse_spectrum("geometric:ratio=0.99")], range(100), [0.1], [0.0, 1.0],
            n=n, m=n, k=k, block_condition=False)
for cell in res.summary:
    print(f"eps=0.1 t={cell.t:3d} failures={cell.failures}/{cell.trials}")

# %% [markdown]
# Tighten epsilon to 0.02 on a smaller problem. Now t = 1 fails on these
# seeds while the scheduled t does not.

# %%
n = 100
res = sweep([parse_spectrum("geometric:ratio=0.99")], range(30), [0.02], [0.0, 1.0],
            n=n, m=n, k=k, block_condition=False)
for cell in res.summary:
    print(f"eps=0.02 t={cell.t:3d} failures={cell.failures}/{cell.trials}")
