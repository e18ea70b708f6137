"""
The uv-switching by hand
========================

Forward: uv, xy -> ux, vy.  Backward undoes it.  Counting both sides over the
two classes (uv present, uv absent) gives the edge probability as a ratio.
"""

# %%
from regsub import ConditioningPair, SamplerConfig
from regsub.graph_core import cycle_graph
from regsub.oracle import exact_conditional_edge_prob
from regsub.sampler import apply_switching, backward_switchings, forward_switchings, switching_ratio_estimate

g = cycle_graph(8)
counts, pairs = forward_switchings(g, 0, 1)
print("forward switchings from C8 at uv = 01:", pairs)
print("count", counts.count, "== identity", counts.identity_value(), counts.terms)

# %%
x, y = pairs[0]
h = apply_switching(g, 0, 1, x, y, "forward")
print("after switching:", h.edge_list())
back, back_pairs = backward_switchings(h, 0, 1)
print("backward moves available:", back_pairs, "- includes", (x, y), (x, y) in back_pairs)

# %%
# Now as an estimator, on cubic graphs with 8 vertices and one fixed edge.
ctx = ConditioningPair.of(8, [(2, 3)])
cfg = SamplerConfig(8, 3, seed=1)
est = switching_ratio_estimate(ctx, cfg.dseq, 0, 1, cfg, samples=400)
exact = exact_conditional_edge_prob(8, 3, ctx, 0, 1)
print(f"switching estimate {est.value:.4f} +- {est.error_scale:.4f}, exact {exact} = {float(exact):.4f}")
