# %% [markdown]
# # Structural checks before designing an observer
#
# An extended state observer treats the total disturbance as one more state.
# That only works when the disturbance is visible in the output without
# being cancelled by a zero of the plant. We check this for the series
# elastic actuator (SEA) model sampled at 20 ms and for a small plant that
# fails the test.

# %%
import numpy as np

from gmbeso import (
    augment, build_model, has_no_invariant_zeros, markov_parameters, observability_matrix,
    rosenbrock_rank_test, sea_preset, structural_report,
)
from gmbeso.system_model import invariant_zero_candidates, matrix_rank

sea = sea_preset("ms20")
report = structural_report(sea)
print("observable:", report.observable)
print("Markov parameters C0 A0^i E0:", markov_parameters(sea, 4))
print("relative degree from u:", report.relative_degree_label)

# %% [markdown]
# The first three Markov parameters vanish and the fourth does not, so the
# disturbance reaches the output only after the full state chain. That is
# the same as having no invariant zeros. The Rosenbrock rank test probes
# the same question directly.

# %%
print("no invariant zeros (Markov):", has_no_invariant_zeros(sea))
print("no invariant zeros (Rosenbrock):", rosenbrock_rank_test(sea))

# %% [markdown]
# A double integrator with the disturbance entering the measured state has
# a zero at the origin.

# %%
bad = build_model([[0, 1], [0, 0]], [0, 1], [1, 0], [1, 0], 1.0)
print("Markov parameters:", markov_parameters(bad, 2))
print("no invariant zeros:", has_no_invariant_zeros(bad))
print("zeros found by the pencil:", invariant_zero_candidates(bad))

# %% [markdown]
# Augmentation keeps observability for the SEA model. The augmented pair
# only loses it when a zero sits exactly at z = 1, which the next plant
# shows.

# %%
aug = augment(sea)
print("SEA augmented rank:", matrix_rank(observability_matrix(aug.A, aug.C)), "of", aug.n + 1)
at_one = build_model([[0, 1], [-0.5, 1.2]], [0, 1], [1, 0.2], [1, 0], 1.0)
aug1 = augment(at_one)
print("zero at", invariant_zero_candidates(at_one))
print("augmented rank with a zero at 1:", matrix_rank(observability_matrix(aug1.A, aug1.C)),
      "of", aug1.n + 1)
