# %% [markdown]
# # Unilateral constraints and state-dependent controls
#
# The integrator is a resolvent step, so a normal cone keeps the state in
# its box exactly.  With `A = N_[0, inf)` and unit forcing the state slides
# to 0 and stays there.

# %%
import numpy as np

from monorelax import Grid, MonotoneOperator, builtin_problem
from monorelax.chattering import chatter_realize, feedback_correct
from monorelax.dynamics import solve_forced
from monorelax.optimizer import solve_relaxed

g = Grid(2.0, 2000)
tr = solve_forced(MonotoneOperator.normal_cone_box([0.0], [np.inf]), 1.0, [1.0], g)
err = np.abs(tr.states[:, 0] - np.maximum(1 - g.times, 0)).max()
print(f"max error vs max(1 - t, 0): {err:.2e}  (step {g.dt:.1e})")

# %% [markdown]
# P3 shifts the atoms with the state, `U(t, x) = {-1, 1} + 0.5 tanh(x)`.
# A chattered control built along the relaxed state is no longer admissible
# once the state moves, so each value is projected back onto `U(t, x(t))`.
# The projection moves it by at most `k |x_ref - x| + 1/n`.

# %%
p = builtin_problem("P3")
sol = solve_relaxed(p, mode="young")
for n in (5, 10, 20):
    target = chatter_realize(sol.young, n, merge=True)
    traj, v, slack = feedback_correct(p, target, n, reference=sol.trajectory, sim_K=2000)
    gap = np.abs(traj.states[:, 0] - sol.trajectory.at(traj.grid.times)[:, 0]).max()
    print(f"n={n:>2}  state gap {gap:.4f}  slack {slack:.1e}  bound 1/n = {1 / n:.3f}")
