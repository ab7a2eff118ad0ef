# %% [markdown]
# # Keeping the zero dynamics inside the model
#
# A conventional ESO works on the output chain of length r (the relative
# degree). When r < n the remaining zero dynamics end up inside the
# "disturbance" it estimates, so it reports a disturbance even when none
# acts. Writing the plant in observability canonical form instead keeps the
# zero dynamics in the model, and the estimated quantity depends on the
# physical disturbance only.

# %%
import numpy as np

from gmbeso import build_canonical_fb, build_model, build_normal_form, design_eso, design_zd_eso
from gmbeso import run_eso, simulate_plant, total_disturbance_fa
from gmbeso.zero_dynamics import chain_model, simulate_normal_form

# a third-order plant with relative degree one and zeros at 0.9 and 0.5:
# pick the Markov parameters C0 A0^i B0 that give the numerator (z - 0.9)(z - 0.5)
A0 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.2, -0.5, 1.1]])
C0 = np.array([[1.0, 0.0, 0.0]])
a = np.poly(A0)
num = np.poly([0.9, 0.5])
markov = [num[0], num[1] - a[1] * num[0]]
markov.append(num[2] - a[1] * markov[1] - a[2] * markov[0])
B0 = np.linalg.solve(np.vstack([C0, C0 @ A0, C0 @ A0 @ A0]), markov)
plant = build_model(A0, B0, [0.0, 0.0, 1.0], C0, 0.01)
nf = build_normal_form(plant)
print("relative degree:", nf.r, " zero dynamics eigenvalues:", np.linalg.eigvals(nf.Shat))

# %% [markdown]
# No disturbance acts, but the plant starts away from rest.

# %%
K = 60
u = np.zeros(K)
d = np.zeros(K)
x0 = np.array([1.0, -0.5, 0.3])
_, y = simulate_plant(plant, u, d, x0)
_, eta, _ = simulate_normal_form(nf, u, d, x0)
fa = total_disturbance_fa(nf, eta, d)
conventional = run_eso(design_eso(chain_model(nf), 0.0), u, y)[:, -1]
zd = run_eso(design_zd_eso(build_canonical_fb(plant), 0.0), u, y)[:, -1]
print("conventional f_a (ground truth), k = 0..5:", np.round(fa[:6], 4))
print("conventional ESO estimate, k = 2..7:     ", np.round(conventional[2:8], 4))
print("built-in zero dynamics ESO, max after k = 4:", np.abs(zd[4:]).max())
