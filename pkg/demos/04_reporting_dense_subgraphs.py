# %% [markdown]
# # Every vertex outputs one bit
#
# Leaders are elected by out-degree; each one cuts its ball where the
# near-top sets stop growing.  The 1-vertices form a subgraph that is
# empty or has density close to the target.

# %%
from localdensity import Graph, report_local_subgraph, report_subgraph, solve_fo2

# a K5 and a K4 joined by a long path
edges = [(a, b) for a in range(5) for b in range(a + 1, 5)]
edges += [(i, i + 1) for i in range(4, 14)]
edges += [(a, b) for a in range(14, 18) for b in range(a + 1, 18)]
g = Graph.from_edges(18, edges)
o = solve_fo2(g)
print("max out-degree", round(max(o.out), 4))

# %% [markdown]
# With a small election radius the two ends get separate leaders.  Only
# the leader whose out-degree reaches the target stays active.

# %%
for dtilde in (1.9, 1.4, 2.5):
    r = report_subgraph(g, 0.5, dtilde, orientation=o, radius=4)
    d = r.density(g)
    print(f"dtilde={dtilde}: H={sorted(r.H)} density={float(d):.4f}" if r.H else f"dtilde={dtilde}: H empty")
    for rec in r.leaders:
        print("   ", rec.to_json())

# %% [markdown]
# The single-source variant always keeps the asking vertex.

# %%
for v in (0, 9, 17):
    r = report_local_subgraph(g, 0.5, v)
    print(f"v={v}: |H|={len(r.H)} density={float(r.density(g)):.4f}")
