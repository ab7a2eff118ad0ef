# %% [markdown]
# # Bandwidth against measurement noise
#
# The SEA model sampled at 1 ms, with band-limited white noise on the
# position measurement. Higher observer bandwidth reacts faster but passes
# more noise into the disturbance estimate. The delayed UIO inverts the
# plant over five samples and is the noisiest of all.

# %%
from _common import plt, save
from gmbeso import run_scenario
from gmbeso.io import load_scenario

res = run_scenario(load_scenario("fig2"))
for name, m in res.metrics["observers"].items():
    print(f"{name:7s} steady-state std {m['steady_state_std']:.3g}")

# %%
if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(res.time, res.columns["f_true"], "k", label="f")
    for name in ("eso25", "eso50", "eso100", "eso200"):
        ax.plot(res.time, res.f_hat(name), lw=0.8, label=name)
    ax.set_ylim(-2, 5)
    ax.set_xlabel("t [s]")
    ax.legend()
    save(fig, "noise_smoothing.png")
