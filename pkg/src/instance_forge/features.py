"""The seven instance features and the geometry they are built on.

Feature identifiers (and the CSV column order everywhere in the package):

    angle_mean                                -- mean angle at each city between
                                                 its two nearest neighbors
    centroid_mean_distance_to_centroid        -- mean distance to the centroid
    chull_area                                -- convex hull area
    cluster_10pct_mean_distance_to_centroid   -- mean distance to own density-
                                                 cluster centroid, eps = 0.1*sqrt(2)
    mst_depth_mean                            -- mean node depth in the rooted MST
    nnds_mean                                 -- mean nearest-neighbor distance
    mst_dists_mean                            -- mean MST edge weight

All functions are pure: repeated calls on the same instance agree bit-exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .instances import TspInstance, distance_matrix

FEATURE_IDS: tuple[str, ...] = (
    "angle_mean",
    "centroid_mean_distance_to_centroid",
    "chull_area",
    "cluster_10pct_mean_distance_to_centroid",
    "mst_depth_mean",
    "nnds_mean",
    "mst_dists_mean",
)

SQRT2 = math.sqrt(2.0)

# DBSCAN fixing for the cluster feature: 10% of the unit square's diameter.
CLUSTER_EPS = 0.1 * SQRT2
CLUSTER_MIN_PTS = 2  # neighborhood size including the point itself

_HULL_COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class FeatureVector:
    """All seven feature values plus any degeneracy flags raised on the way."""

    values: dict[str, float]
    degenerate: tuple[str, ...] = ()

    def __getitem__(self, feature_id: str) -> float:
        return self.values[feature_id]

    def as_row(self) -> list[float]:
        """Values in FEATURE_IDS order (the CSV column order)."""
        return [self.values[f] for f in FEATURE_IDS]


@dataclass(frozen=True)
class MstResult:
    """Rooted minimum spanning tree: Prim from city 0, smallest-index tie-break."""

    edges: tuple[tuple[int, int, float], ...]  # (parent, child, weight)
    parent: np.ndarray  # parent[root] == root
    depths: np.ndarray  # depth[root] == 0
    root: int = 0

    @property
    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray  # cluster id per city; singletons keep their own id
    centroids: dict[int, tuple[float, float]] = field(repr=False)


def minimum_spanning_tree(inst: TspInstance) -> MstResult:
    """Euclidean MST by Prim's algorithm started from city 0.

    The next vertex is the untouched one with minimal key; np.argmin takes
    the first occurrence, which is the smallest-index tie-break.
    """
    coords = inst.coords
    n = coords.shape[0]
    dist = distance_matrix(coords)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    key = dist[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    depths = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, key)
        j = int(np.argmin(masked))
        p = int(parent[j])
        edges.append((p, j, float(key[j])))
        in_tree[j] = True
        depths[j] = depths[p] + 1
        better = (dist[j] < key) & ~in_tree
        parent[better] = j
        key[better] = dist[j][better]
    parent[0] = 0
    parent.flags.writeable = False
    depths.flags.writeable = False
    return MstResult(tuple(edges), parent, depths)


def mst_dists_mean(inst: TspInstance) -> float:
    """Mean edge weight of the minimum spanning tree."""
    mst = minimum_spanning_tree(inst)
    return sum(w for _, _, w in mst.edges) / len(mst.edges)


def mst_depth_mean(inst: TspInstance) -> float:
    """Mean depth over all cities in the rooted MST (root depth 0)."""
    return float(np.mean(minimum_spanning_tree(inst).depths))


def convex_hull(coords: np.ndarray) -> list[tuple[float, float]]:
    """Monotone-chain convex hull in counter-clockwise order.

    Points within _HULL_COLLINEAR_TOL of an edge are treated as collinear
    and dropped; degenerate inputs return fewer than 3 vertices.
    """
    pts = sorted(set(map(tuple, coords.tolist())))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) > 1 and cross(lower[-2], lower[-1], p) <= _HULL_COLLINEAR_TOL:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) > 1 and cross(upper[-2], upper[-1], p) <= _HULL_COLLINEAR_TOL:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull_area(inst: TspInstance) -> float:
    """Area of the convex hull (shoelace formula); collinear sets give 0."""
    hull = convex_hull(inst.coords)
    if len(hull) < 3:
        return 0.0
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(hull, hull[1:] + hull[:1]):
        acc += x0 * y1 - x1 * y0
    return abs(acc) / 2.0


chull_area = convex_hull_area


def nnds_mean(inst: TspInstance) -> float:
    """Mean over cities of the distance to the nearest other city."""
    dist = distance_matrix(inst.coords)
    np.fill_diagonal(dist, np.inf)
    return float(np.mean(dist.min(axis=1)))


def _two_nearest(dist_row, c: int, n: int) -> tuple[int, int]:
    """Indices of the two nearest other cities, ties to the smaller index."""
    d1 = d2 = math.inf
    i1 = i2 = -1
    for j in range(n):
        if j == c:
            continue
        d = dist_row[j]
        if d < d1:
            d2, i2 = d1, i1
            d1, i1 = d, j
        elif d < d2:
            d2, i2 = d, j
    return i1, i2


def angles_at_cities(inst: TspInstance) -> tuple[np.ndarray, int]:
    """Angle at each city between its two nearest neighbors, in [0, pi].

    Computed as acos of the clamped normalized dot product. A coincident
    neighbor makes the angle undefined; it is recorded as 0 and counted in
    the returned degeneracy tally.
    """
    coords = inst.coords
    n = coords.shape[0]
    dist = distance_matrix(coords)
    angles = np.zeros(n)
    degenerate = 0
    for c in range(n):
        i1, i2 = _two_nearest(dist[c], c, n)
        ax = coords[i1, 0] - coords[c, 0]
        ay = coords[i1, 1] - coords[c, 1]
        bx = coords[i2, 0] - coords[c, 0]
        by = coords[i2, 1] - coords[c, 1]
        na = math.sqrt(ax * ax + ay * ay)
        nb = math.sqrt(bx * bx + by * by)
        if na == 0.0 or nb == 0.0:
            degenerate += 1
            continue
        cos = (ax * bx + ay * by) / (na * nb)
        angles[c] = math.acos(min(1.0, max(-1.0, cos)))
    return angles, degenerate


def angle_mean(inst: TspInstance) -> float:
    angles, _ = angles_at_cities(inst)
    return float(np.mean(angles))


def centroid_mean_distance_to_centroid(inst: TspInstance) -> float:
    """Mean distance from the cities to their coordinate-wise centroid."""
    coords = inst.coords
    centroid = coords.mean(axis=0)
    d = coords - centroid
    return float(np.mean(np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])))


def density_clusters(
    inst: TspInstance, eps: float = CLUSTER_EPS, min_pts: int = CLUSTER_MIN_PTS
) -> ClusterAssignment:
    """DBSCAN-style clustering; noise points become singleton clusters.

    A city is a core point when its eps-neighborhood (itself included)
    holds at least min_pts cities; clusters are grown from core points in
    index order, so labels are deterministic.
    """
    coords = inst.coords
    n = coords.shape[0]
    dist = distance_matrix(coords)
    reach = dist <= eps
    core = reach.sum(axis=1) >= min_pts
    labels = np.full(n, -1, dtype=np.int64)
    next_label = 0
    for seed in range(n):
        if labels[seed] != -1 or not core[seed]:
            continue
        labels[seed] = next_label
        queue = [seed]
        while queue:
            p = queue.pop(0)
            for q in np.flatnonzero(reach[p]):
                if labels[q] == -1:
                    labels[q] = next_label
                    if core[q]:
                        queue.append(int(q))
        next_label += 1
    for i in range(n):  # noise -> singleton cluster
        if labels[i] == -1:
            labels[i] = next_label
            next_label += 1
    centroids = {}
    for label in np.unique(labels):
        members = coords[labels == label]
        cx, cy = members.mean(axis=0)
        centroids[int(label)] = (float(cx), float(cy))
    labels.flags.writeable = False
    return ClusterAssignment(labels, centroids)


def cluster_10pct_mean_distance_to_centroid(inst: TspInstance) -> float:
    """Mean over cities of the distance to their own cluster's centroid.

    Uses the 10%-reachability fixing (eps = 0.1*sqrt(2), min_pts = 2);
    singleton clusters contribute 0 by construction.
    """
    assignment = density_clusters(inst)
    coords = inst.coords
    total = 0.0
    for i in range(coords.shape[0]):
        cx, cy = assignment.centroids[int(assignment.labels[i])]
        dx = coords[i, 0] - cx
        dy = coords[i, 1] - cy
        total += math.sqrt(dx * dx + dy * dy)
    return total / coords.shape[0]


_FEATURE_FUNCS = {
    "angle_mean": angle_mean,
    "centroid_mean_distance_to_centroid": centroid_mean_distance_to_centroid,
    "chull_area": convex_hull_area,
    "cluster_10pct_mean_distance_to_centroid": cluster_10pct_mean_distance_to_centroid,
    "mst_depth_mean": mst_depth_mean,
    "nnds_mean": nnds_mean,
    "mst_dists_mean": mst_dists_mean,
}


def compute_all(inst: TspInstance) -> FeatureVector:
    """All seven features; deterministic for a fixed instance."""
    angles, n_degenerate = angles_at_cities(inst)
    mst = minimum_spanning_tree(inst)
    values = {
        "angle_mean": float(np.mean(angles)),
        "centroid_mean_distance_to_centroid": centroid_mean_distance_to_centroid(inst),
        "chull_area": convex_hull_area(inst),
        "cluster_10pct_mean_distance_to_centroid": cluster_10pct_mean_distance_to_centroid(inst),
        "mst_depth_mean": float(np.mean(mst.depths)),
        "nnds_mean": nnds_mean(inst),
        "mst_dists_mean": sum(w for _, _, w in mst.edges) / len(mst.edges),
    }
    degenerate = ("angle_mean",) if n_degenerate else ()
    return FeatureVector(values, degenerate)


def feature_bound(feature_id: str, n: int | None = None) -> float:
    """Upper bound R on the feature's attainable values in the unit square.

    mst_depth_mean is bounded by n-1 (a path), so it needs the instance size.
    """
    if feature_id == "angle_mean":
        return math.pi
    if feature_id == "chull_area":
        return 1.0
    if feature_id == "mst_depth_mean":
        if n is None:
            raise ValueError("feature_bound('mst_depth_mean') requires the instance size n")
        return float(n - 1)
    if feature_id in FEATURE_IDS:
        return SQRT2
    raise ValueError(f"unknown feature id {feature_id!r}")


def feature_bounds(n: int) -> dict[str, float]:
    """Bounds for all seven features at instance size n."""
    return {f: feature_bound(f, n) for f in FEATURE_IDS}
