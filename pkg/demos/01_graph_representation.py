"""Point-pair graphs vs endpoint segments.

A scene of line segments is stored as junctions plus a boolean adjacency
matrix. Collinear runs of junctions are densely connected, and the endpoint
view is recovered by dropping pairs subsumed by longer collinear pairs.
"""

import numpy as np

from ppgraph import build_graph, graph_to_json, graph_to_segments, segments_to_graph

# Three collinear junctions plus one off-line, all mutually annotated.
g = build_graph(
    width=128,
    height=128,
    points=[(10, 60), (60, 60), (110, 60), (60, 10)],
    edges=[(0, 1), (1, 2), (0, 2), (1, 3)],
)
print("graph:", g)
print("adjacency:\n", g.adjacency.astype(int))

# The endpoint view keeps only maximal segments: the two short collinear
# pieces are subsumed by the long one.
segs = graph_to_segments(g, collinear_tol=2.0)
print("\nmaximal segments:")
for s in segs:
    print(f"  ({s.a.x:.0f},{s.a.y:.0f}) -> ({s.b.x:.0f},{s.b.y:.0f})  len={s.length:.1f}")

# Going back: endpoints dedupe into junctions, one edge per segment. The
# dense collinear connectivity is only recovered by canonicalization (demo 02).
back = segments_to_graph(segs, merge_tol=3.0)
print("\nround trip:", back)

print("\ninterchange JSON:")
print(graph_to_json(g))
