# %% [markdown]
# # How the estimation error depends on the observer eigenvalue
#
# With every observer eigenvalue at lam, the disturbance estimation error is
# the disturbance increments filtered by a kernel h(k). The kernel is 1 for
# the first n + 1 samples and then decays. Its sum is (n + 1) / (1 - lam), so
# a faster observer (smaller lam) responds to disturbance changes with less
# total error.

# %%
import numpy as np

from _common import plt, save
from gmbeso import design_eso, kernel_sensitivity, kernel_values, predict_error, run_eso
from gmbeso import sea_preset, simulate_plant

n = 4
for lam in (0.0, 0.3, 0.6, 0.9):
    h = kernel_values(n, lam, 400)
    print(f"lam={lam}: h(6..9) = {np.round(h[5:9], 4)}, sum = {h.sum():.3f}, "
          f"(n+1)/(1-lam) = {(n + 1) / (1 - lam):.3f}")

# %% [markdown]
# Every kernel value grows with lam once k > n + 1, which is why a slower
# observer is uniformly worse at tracking a changing disturbance.

# %%
print("dh/dlam at k=8:", [round(kernel_sensitivity(n, lam, 8), 4) for lam in (0.1, 0.5, 0.9)])

# %% [markdown]
# The convolution predicts the observer error exactly, as the SEA run shows.

# %%
sea = sea_preset("ms20")
rng = np.random.default_rng(0)
f = np.concatenate([[0.0], np.cumsum(rng.normal(size=99)) * 0.1])
u = rng.normal(size=100)
_, y = simulate_plant(sea, u, f)
X = run_eso(design_eso(sea, 0.6), u, y)
print("max |simulated - predicted error|:", np.abs((f - X[:, -1]) - predict_error(n, 0.6, f)).max())

# %%
if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for lam in (0.0, 0.3, 0.6, 0.9):
        ax.step(np.arange(1, 41), kernel_values(n, lam, 40), where="post", label=f"lam = {lam}")
    ax.set_xlabel("k")
    ax.set_ylabel("h(k)")
    ax.legend()
    save(fig, "error_kernel.png")
