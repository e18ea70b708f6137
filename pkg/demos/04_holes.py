"""
Holes in tuples of triangles
============================

A hole is a vertex triple whose three sides are each covered by some other
triangle of the tuple.  Holes are what let a tuple of triangles carry fewer
edges than 3k.
"""

# %%
from regsub import SamplerConfig, TriangleTuple, hole_count
from regsub.graph_core import enumerate_triangles
from regsub.harness import hole_bound
from regsub.sampler import make_rng, regular_chain

print(hole_count(TriangleTuple(((1, 2, 4), (2, 3, 5), (1, 3, 6)))), "hole in the three-petal example")
print(hole_count(TriangleTuple(((1, 2, 3), (1, 2, 4)))), "holes in two triangles sharing an edge")

# %%
# Random 20-tuples of triangles from a dense-ish regular graph.
chain = regular_chain(SamplerConfig(200, 8, seed=3))
rng = make_rng(3, 1)
worst = 0
for _ in range(200):
    chain.step(chain.n_movable)
    tris = enumerate_triangles(chain.graph())
    if len(tris) < 20:
        continue
    pick = rng.choice(len(tris), size=20, replace=False)
    worst = max(worst, hole_count(TriangleTuple(tuple(tris[i] for i in pick))))
print(f"most holes seen in a 20-tuple: {worst}; the bound is {hole_bound(20):.0f}")
