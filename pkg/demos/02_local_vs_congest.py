# %% [markdown]
# # Two distributed estimates against the exact answer
#
# The LOCAL algorithm lets every vertex gather its k-hop ball and solve it
# alone.  The CONGEST protocol instead runs the hour/minute/second clock
# with small messages.  Both should land within a (1 + eps) factor of the
# exact local density.

# %%
import numpy as np

from localdensity import generate, local_density_exact, local_density_local_model, run_congest_orientation

eps = 0.5
g = generate("gnm:12,26,7")
rho = local_density_exact(g)
exact = np.array([float(rho[v]) for v in range(g.n)])

# %%
local, ltrace = local_density_local_model(g, eps)
local = np.array([local[v] for v in range(g.n)])
print(f"LOCAL: {ltrace.rounds} rounds")

o, ctrace = run_congest_orientation(g, eps)
congest = np.array(o.out)
print(f"CONGEST: {ctrace.total_rounds} scheduled rounds, {ctrace.rounds - ctrace.idle_rounds} with traffic")
print(f"largest message {max(ctrace.max_bits_per_round)} bits, budget {ctrace.bandwidth}")

# %%
table = np.column_stack([exact, local / exact, congest / exact])
print("  rho*    local/rho*  congest/rho*")
for row in table:
    print("  ".join(f"{x:9.4f}" for x in row))
lo, hi = 1 / (1 + eps), 1 + eps
print("all inside the band:", bool(((table[:, 1:] >= lo - 1e-9) & (table[:, 1:] <= hi + 1e-9)).all()))
