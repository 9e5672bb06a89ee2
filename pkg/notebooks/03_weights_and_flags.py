# %% [markdown]
# # Exceptional weights and flag manifolds
#
# Exceptional weights of the cone Laplacian come from the spectrum of the
# link. Small resolutions over Grassmannians are governed by divisibility of
# first Chern classes.

# %%
from fractions import Fraction

from accy import flags, weights

# %% [markdown]
# Flat space: the link is the round sphere and the weights are integers.

# %%
for m in (4, 6, 8):
    ws = weights.exceptional_weights(m, *weights.sphere_spectrum(m, 6))
    print(m, [str(w) for w in ws.weights])

# %% [markdown]
# A lens-space link has fewer eigenvalues, hence fewer exceptional weights.

# %%
ws = weights.exceptional_weights(6, *weights.lens_spectrum(3, 3, 6))
print([str(w) for w in ws.weights])
print(weights.obata_gap_check(ws).to_json())

# %% [markdown]
# Rates of the iterated error terms: doubling, then doubling plus `epsilon`,
# until the rate falls below -2.

# %%
tr = weights.rate_iteration(Fraction(-3, 10), Fraction(1, 100))
print([str(s) for s in tr.steps])

# %% [markdown]
# First Chern classes of flag manifolds and the Grassmannian table.

# %%
print(flags.flag_c1((1, 1, 3)).to_json())
for rec in flags.grassmannian_small_resolutions(2, 5):
    print(rec.row())
print("disagreements:", flags.cross_check(2, 12))
