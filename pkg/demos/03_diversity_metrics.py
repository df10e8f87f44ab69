"""What each diversity metric sees.

Four hand-built 2-D point clouds show how the three metrics complement each
other: deviation captures global spread, knn-dist captures local sparsity,
and mst-dist is the only one that separates "one tight cluster" from
"several tight clusters far apart".

Run:  python demos/03_diversity_metrics.py
"""

import numpy as np

from evasim import EffectiveAttackSet, deviation, knn_dist, mst_dist
from evasim.rng import Rng

rng = Rng(99)


def cloud(points):
    points = np.asarray(points)
    return EffectiveAttackSet(members=points, total_attacks=len(points))


scattered = cloud(rng.random(200).reshape(100, 2))

ring_angles = rng.random(100) * 2 * np.pi
ring = cloud(
    0.5 + 0.45 * np.column_stack([np.cos(ring_angles), np.sin(ring_angles)])
    + 0.01 * rng.normal(200).reshape(100, 2)
)

# the last two clouds have identical per-cluster density: 25 points at the
# same scale, once in a single blob and once copied into four far corners
blob = 0.04 * rng.normal(200).reshape(100, 2)
one_cluster = cloud(blob[:25] + 0.5)
corners = np.array([[0.1, 0.1], [0.9, 0.1], [0.1, 0.9], [0.9, 0.9]])
four_clusters = cloud(
    np.vstack([blob[25 * i: 25 * (i + 1)] + corners[i] for i in range(4)])
)

print("cloud            sigma   knn-dist  mst-dist")
for name, ea in (
    ("scattered", scattered),
    ("ring", ring),
    ("one tight blob", one_cluster),
    ("four far blobs", four_clusters),
):
    print(f"{name:<15}  {deviation(ea):.3f}   {knn_dist(ea):.4f}    "
          f"{mst_dist(ea):.4f}")

print(
    "\nnote the last two rows: one tight blob and four far-apart tight blobs"
    "\nhave nearly the same knn-dist (same local density), while mst-dist"
    "\npays for the long edges between clusters and separates them."
)
