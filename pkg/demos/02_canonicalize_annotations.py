"""Repairing a messy endpoint annotation.

The raw annotation below has every defect the canonicalizer handles: an
isolated junction, a collinear chain split into jittered fragments, a
duplicated fragment, and an unannotated crossing. The output graph is
complete, deduplicated, and exactly idempotent under re-canonicalization.
"""

from ppgraph import RawAnnotation, canonicalize, graph_as_annotation, graph_to_segments

raw = RawAnnotation(
    width=256,
    height=256,
    junctions=[
        (20.0, 100.2),   # 0: chain start (jittered off the carrier)
        (90.0, 99.4),    # 1: chain middle
        (200.0, 100.6),  # 2: chain end
        (100.0, 30.0),   # 3: crossing segment, top
        (100.0, 180.0),  # 4: crossing segment, bottom
        (240.0, 240.0),  # 5: isolated, no segment
    ],
    segments=[
        (0, 1), (1, 2),  # split chain
        (0, 2),          # redundant full-span fragment
        (3, 4),          # crosses the chain near (100, 100), no junction there
    ],
)

g = canonicalize(raw)
print("canonical graph:", g)
print("junctions:")
for j in g.junctions:
    print(f"  ({j.x:.4f}, {j.y:.4f})")
print("edges:", g.edges())

# The crossing was recovered as a new junction and connected along both hosts;
# the chain is densely connected; the isolated junction is gone.
print("\nmaximal segments after cleanup:")
for s in graph_to_segments(g):
    print(f"  ({s.a.x:.1f},{s.a.y:.1f}) -> ({s.b.x:.1f},{s.b.y:.1f})")

again = canonicalize(graph_as_annotation(g))
print("\nidempotent:", again == g)
