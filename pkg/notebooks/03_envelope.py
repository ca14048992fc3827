# %% [markdown]
# # The relaxed integrand
#
# `L**` is the lower convex envelope of `u -> L(t, x, u)` over the net of
# `U`.  For the double well `(1 - u^2)^2` on `[-1, 1]` it vanishes on the
# whole interval as soon as the net contains both endpoints.

# %%
import numpy as np

from monorelax import builtin_problem
from monorelax.relax_convex import biconjugate, gamma_sample

p = builtin_problem("P1")
g = gamma_sample(p, 0.0, [0.0])
print("atoms:", g.atoms.ravel(), "L at atoms:", g.etas)
for u in np.linspace(-1.0, 1.0, 5):
    print(f"u = {u:+.2f}   L** = {biconjugate(p, 0.0, [0.0], [u]):.3g}")
print("outside the hull:", biconjugate(p, 0.0, [0.0], [1.5]))

# %% [markdown]
# In the plane (P4, unit disc) the envelope comes from a small LP.  The net
# of 7 atoms is the center plus a hexagon on the unit circle.  Points on the
# ring cost `|x|^2`, so inside the hexagon the envelope is `|x|^2` and the
# double-well penalty disappears.  Outside the hexagon (`[0, 0.9]` lies
# above its top edge at height 0.866) the sampled envelope is infinite.

# %%
p4 = builtin_problem("P4")
x = np.array([0.3, -0.2])
for u in ([0.0, 0.0], [0.5, 0.5], [0.0, 0.8], [0.0, 0.9]):
    print(f"u = {u}   L = {float(p4.cost(0.0, x, np.array(u))):.4f}   L** = {biconjugate(p4, 0.0, x, u):.4f}")
