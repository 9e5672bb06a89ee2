# %% [markdown]
# # Projecting a cone onto its smoothing
#
# A cone point `z` is pushed onto the smoothing along conjugate gradients of
# the defining polynomials. The pulled-back holomorphic volume form and
# complex structure then differ from the cone ones by terms whose decay rate
# depends on which lower-order terms the smoothing adds.

# %%
import numpy as np

from accy.cone import cubic_spec, odp_spec, sample_cone_points, scaling_map
from accy.projection import ProjectionMap, cubic_alpha, deformation_rate_scan, rate_report

# %% [markdown]
# For the quadric cone `sum z^2 = 0` the projection has a closed form:
# `Phi(z) = z + conj(z) / (2|z|^2)`.

# %%
spec = odp_spec(3)
proj = ProjectionMap(spec)
z = scaling_map(spec, 20.0, sample_cone_points(spec, 1, seed=0)[0])
print(np.abs(proj(z) - (z + np.conj(z) / (2 * np.sum(np.abs(z) ** 2)))).max())
print(proj.residuals(z))

# %% [markdown]
# On the Fermat cubic the displacement is `alpha conj(z_i)^2`, and `alpha`
# decays like `|z|^-4`.

# %%
cubic = cubic_spec()
cproj = ProjectionMap(cubic)
z0 = sample_cone_points(cubic, 1, seed=0)[0]
z0 /= np.linalg.norm(z0)
for t in (10.0, 100.0, 1000.0):
    print(t, abs(cubic_alpha(cproj, t * z0)) * t**4)

# %% [markdown]
# Rates of `Phi^*Omega - Omega_0`. A constant term alone gives -9; linear
# terms give -6; quadratic terms dominate and give -3.

# %%
for params in ({}, {"t_i": [1.0, 0, 0, 0]}, {"t_ij": {(0, 1): 1.0}}):
    rep = deformation_rate_scan("cubic", params)
    print(params, round(rep.omega_rate.exponent, 3), round(rep.j_rate.exponent, 3),
          round(rep.j_omega_constant, 3))

# %% [markdown]
# The same experiment for the intersection of two quadrics in C^5 and for the
# three-dimensional quadric cone.

# %%
for params in ({}, {"t_i": [1.0, 0, 0, 0, 0]}):
    print("quadrics", params, round(deformation_rate_scan("quadrics", params).omega_rate.exponent, 3))
print("odp3", rate_report(odp_spec(3)).to_dict()["j_rate"]["exponent"])
