# %% [markdown]
# # Chattering on the double-well problem
#
# `x' = -u`, `u(t) in {-1, 1}`, cost `x^2 + (1 - u^2)^2`.  Every admissible
# control pays for the drift of `x`, so the original infimum is 0 but never
# attained.  The relaxed problem reaches 0 with the measure that puts half
# its mass on each atom.

# %%
import numpy as np

from monorelax import builtin_problem
from monorelax.chattering import convergence_table
from monorelax.optimizer import solve_relaxed

p = builtin_problem("P1")
sol = solve_relaxed(p, mode="young")
print(f"m_r = {sol.m_r:.3e}   m_hat_r = {sol.m_hat_r:.3e}")
print("weights on the first interval:", sol.young.measures[0].weights)

# %% [markdown]
# Chattering `n` times per block gives a triangle wave of height `1/(2n)`
# for the state, hence `J(n) = 1/(12 n^2)`.

# %%
rows = convergence_table(p, sol.trajectory, sol.young, [1, 2, 5, 10, 20], sim_K=2000)
print(f"{'n':>3} {'weak gap':>10} {'state gap':>10} {'J(n)':>11} {'1/(12n^2)':>11}")
for r in rows:
    print(f"{r.n:>3} {r.weak_gap:10.4f} {r.state_gap:10.4f} {r.J:11.3e} {1 / (12 * r.n**2):11.3e}")

# %%
ratios = np.array([r.J * 12 * r.n**2 for r in rows])
print("J(n) * 12 n^2:", np.round(ratios, 5))
