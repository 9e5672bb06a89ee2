# %% [markdown]
# # Explicit Ricci-flat profiles
#
# The Stenzel metric on `{sum z^2 = 1}` and the Calabi metric on the
# resolution of `C^n / Z_n` both have radial potentials. We tabulate them,
# read off their asymptotics and measure how fast they approach the cone.

# %%
import numpy as np

from accy import metrics

# %% [markdown]
# The Stenzel profile solves `(h'^n)' = sinh^(n-1)` in `tau = cosh w`.
# Its leading coefficient is `C_n = n (n-1)^(-(n+1)/n)`; the relative
# correction `k(tau)` decays with a log factor only for `n = 3`.

# %%
for n in (2, 3, 4):
    p = metrics.solve_stenzel_profile(n)
    fit = p.correction_fit
    print(n, p.C_n, p.C_n_exact, round(fit.exponent, 3), fit.log_power, p.ode_residual)

# %% [markdown]
# Metric decay rates under the projection map: `-2n/(n-1)` for Stenzel,
# `-2n` for Calabi (with Eguchi-Hanson as `n = 2`).

# %%
for fam, n in (("stenzel", 3), ("stenzel", 4), ("calabi", 3), ("eguchi_hanson", 2)):
    res = metrics.metric_rate_experiment(fam, n)
    print(fam, n, round(res.fit.exponent, 4))

# %% [markdown]
# The leading term of `tau (Phi^*g - g0)` in an adapted frame is traceless,
# vanishes in the radial directions and is divergence free.

# %%
rep = metrics.stenzel_leading_term(3, 1e6)
np.set_printoptions(precision=4, suppress=True)
print(rep.matrix)
print(rep.trace, rep.bianchi_relative)

# %% [markdown]
# Monge-Ampere residuals: constant across the manifold, and shifted by
# `n log c` when the potential is scaled by `c`.

# %%
r = metrics.stenzel_ma_residuals(3, 50)
print(r.mean(), r.std())
print(metrics.stenzel_ma_residuals(3, 5, scale=2.0) - metrics.stenzel_ma_residuals(3, 5), 3 * np.log(2.0))
print(metrics.calabi_ma_residuals(2, 50).std())
print(metrics.recover_cone_constant(3), metrics.stenzel_constant(3))
