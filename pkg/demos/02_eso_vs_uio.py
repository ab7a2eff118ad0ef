# %% [markdown]
# # Deadbeat ESO and the delayed UIO give the same estimate
#
# On the SEA model the input steps to 1 at t = 0.1 s and the disturbance
# steps to 2.5 at t = 0.5 s. A deadbeat ESO (all observer eigenvalues at
# zero) reproduces the disturbance exactly n + 1 = 5 samples late. The
# delayed unknown input observer needs five future samples, so once it is
# placed on the wall clock it shows the same trace.

# %%
import numpy as np

from _common import plt, save
from gmbeso import run_scenario
from gmbeso.io import load_scenario

clean = run_scenario(load_scenario("fig1_noise_free"))
k = clean.columns["k"]
eso = clean.f_hat("eso")
print("first sample with fhat = 2.5:", int(k[np.argmax(np.abs(eso - 2.5) < 1e-9)]))
print("max |eso - uio| after the transient:", clean.metrics["pairs"]["eso|uio"]["max_abs_diff"])

# %% [markdown]
# With measurement noise the two traces are still nearly the same. The
# observer gains are large, so the noise is amplified a lot, and by the same
# amount in both observers.

# %%
noisy = run_scenario(load_scenario("fig1"))
print("noisy max |eso - uio|:", noisy.metrics["pairs"]["eso|uio"]["max_abs_diff"])
for name, m in noisy.metrics["observers"].items():
    print(f"{name}: steady-state std {m['steady_state_std']:.3g}")

# %%
if plt is not None:
    fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    t = noisy.time
    axes[0].plot(t, noisy.columns["f_true"], "k", label="f")
    axes[0].plot(t, noisy.f_hat("eso"), label="ESO")
    axes[0].plot(t, noisy.f_hat("uio"), "--", label="UIO (aligned)")
    axes[0].legend()
    axes[1].plot(t, noisy.columns["diff_eso_uio"])
    axes[1].set_ylabel("difference")
    axes[1].set_xlabel("t [s]")
    save(fig, "eso_vs_uio.png")
