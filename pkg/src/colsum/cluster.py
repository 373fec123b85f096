"""Dimensionality reduction and density-based document clustering.

Embeddings are projected to a low dimension (exact PCA by default, an
optional neighbor-embedding layout behind the same interface) and grouped
by a hierarchical density clusterer: core distances, a minimum spanning
tree over mutual-reachability distances, a condensed cluster hierarchy,
and stability-based cluster extraction. Points that never join a stable
cluster are labeled noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus, Document
from .embed_index import EmbeddingVector

NOISE = -1

SELECTION_MODES = ("excess-of-mass", "leaf", "top-k")
PROJECTION_METHODS = ("pca", "neighbor-embedding")


@dataclass(frozen=True)
class ProjectedPoint:
    """A document's coordinates after dimensionality reduction."""

    doc_id: object
    coords: tuple[float, ...]


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels for every input point.

    Labels are dense ints 0..n_clusters-1, canonically ordered by each
    cluster's smallest member position, with ``NOISE`` (-1) for outliers.
    """

    labels: dict
    n_clusters: int
    stabilities: dict

    @property
    def noise_count(self) -> int:
        return sum(1 for v in self.labels.values() if v == NOISE)


def _as_matrix(points: Sequence) -> tuple[list, np.ndarray]:
    if len(points) == 0:
        raise ValueError("no points given")
    if isinstance(points[0], ProjectedPoint):
        ids = [p.doc_id for p in points]
        rows = [p.coords for p in points]
    else:
        ids = list(range(len(points)))
        rows = [
            p.values if isinstance(p, EmbeddingVector) else tuple(p)  # type: ignore[union-attr]
            for p in points
        ]
    return ids, np.asarray(rows, dtype=float)


def _pairwise(matrix: np.ndarray) -> np.ndarray:
    sq = (matrix * matrix).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (matrix @ matrix.T)
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)
    np.fill_diagonal(dist, 0.0)
    return dist


def _fix_signs(components: np.ndarray) -> np.ndarray:
    # eigenvectors are sign-ambiguous; force first nonzero loading positive
    fixed = components.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        nonzero = np.flatnonzero(np.abs(col) > 1e-12)
        if len(nonzero) and col[nonzero[0]] < 0:
            fixed[:, j] = -col
    return fixed


def _pca_coords(matrix: np.ndarray, target_dim: int) -> np.ndarray:
    centered = matrix - matrix.mean(axis=0)
    cov = centered.T @ centered / max(1, len(matrix) - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1][:target_dim]
    components = _fix_signs(eigvecs[:, order])
    return centered @ components


def _neighbor_embedding_coords(
    matrix: np.ndarray, target_dim: int, seed: int, n_neighbors: int = 10, n_iter: int = 120
) -> np.ndarray:
    n = len(matrix)
    k = min(n_neighbors, n - 1)
    dist = _pairwise(matrix)
    order = np.argsort(dist, axis=1, kind="stable")
    weights = np.zeros((n, n))
    for i in range(n):
        neighbors = [j for j in order[i] if j != i][:k]
        rho = dist[i, neighbors[0]]
        scale = max(float(np.mean(dist[i, neighbors]) - rho), 1e-12)
        for j in neighbors:
            weights[i, j] = math.exp(-(dist[i, j] - rho) / scale)
    # fuzzy union keeps the graph symmetric
    weights = weights + weights.T - weights * weights.T

    rng = np.random.RandomState(seed)
    coords = _pca_coords(matrix, target_dim)
    spread = float(np.abs(coords).max())
    if spread > 0:
        coords = coords / spread
    coords = coords + 0.01 * rng.standard_normal(coords.shape)
    repulsion = 1.0 / max(n, 1)
    for it in range(n_iter):
        lr = 0.1 * (1.0 - it / n_iter)
        diff = coords[None, :, :] - coords[:, None, :]
        d2 = (diff * diff).sum(axis=2) + 1e-9
        attract = (weights[:, :, None] * diff).sum(axis=1)
        repel = -(diff / (1.0 + d2)[:, :, None]).sum(axis=1) * repulsion
        coords = coords + lr * (attract + repel)
        coords = coords - coords.mean(axis=0)
    return coords


def project(
    vectors: Sequence[tuple[object, EmbeddingVector | Sequence[float]]],
    target_dim: int = 5,
    method: str = "pca",
    seed: int = 0,
) -> list[ProjectedPoint]:
    """Reduce (id, vector) pairs to target_dim coordinates, deterministically."""
    if method not in PROJECTION_METHODS:
        raise ValueError(f"unknown projection method {method!r}")
    if len(vectors) < target_dim + 1:
        raise ValueError(f"need at least {target_dim + 1} vectors for target_dim={target_dim}")
    ids = [vid for vid, _ in vectors]
    rows = [v.values if isinstance(v, EmbeddingVector) else tuple(v) for _, v in vectors]
    matrix = np.asarray(rows, dtype=float)
    if target_dim >= matrix.shape[1]:
        raise ValueError("target_dim must be smaller than the input dimension")
    if method == "pca":
        coords = _pca_coords(matrix, target_dim)
    else:
        coords = _neighbor_embedding_coords(matrix, target_dim, seed)
    if not np.isfinite(coords).all():
        raise ValueError("projection produced non-finite coordinates")
    return [
        ProjectedPoint(doc_id=vid, coords=tuple(float(c) for c in coords[i]))
        for i, vid in enumerate(ids)
    ]


def core_distances(points: Sequence, min_samples: int) -> list[float]:
    """Distance from each point to its min_samples-th nearest neighbor."""
    if min_samples <= 0:
        raise ValueError("min_samples must be positive")
    _, matrix = _as_matrix(points)
    if min_samples >= len(matrix):
        raise ValueError("min_samples must be smaller than the number of points")
    dist = _pairwise(matrix)
    ordered = np.sort(dist, axis=1)
    return [float(ordered[i, min_samples]) for i in range(len(matrix))]


def _prim_mst(weights: np.ndarray) -> list[tuple[int, int, float]]:
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    best_from = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, best)
        j = int(masked.argmin())
        edges.append((int(best_from[j]), j, float(best[j])))
        in_tree[j] = True
        closer = weights[j] < best
        best = np.where(closer, weights[j], best)
        best_from = np.where(closer, j, best_from)
    edges.sort(key=lambda e: (e[2], min(e[0], e[1]), max(e[0], e[1])))
    return edges


def mutual_reachability_mst(
    points: Sequence, core_dists: Sequence[float]
) -> list[tuple[int, int, float]]:
    """Spanning tree over d_mreach(a, b) = max(core(a), core(b), dist(a, b)).

    Edges come back as (i, j, weight) over point positions, sorted by
    ascending weight.
    """
    _, matrix = _as_matrix(points)
    n = len(matrix)
    if n < 2:
        raise ValueError("need at least two points")
    if len(core_dists) != n:
        raise ValueError("core_dists length does not match points")
    core = np.asarray(core_dists, dtype=float)
    mreach = np.maximum(_pairwise(matrix), np.maximum(core[:, None], core[None, :]))
    np.fill_diagonal(mreach, 0.0)
    return _prim_mst(mreach)


@dataclass(frozen=True)
class _CondensedRow:
    parent: int
    child: int  # < n_points means a point, otherwise a cluster id
    lam: float
    size: int


class _SingleLinkageTree:
    def __init__(self, n_points: int, edges: list[tuple[int, int, float]]):
        self.n_points = n_points
        total = 2 * n_points - 1
        self.children: dict[int, tuple[int, int]] = {}
        self.distance: dict[int, float] = {}
        self.size = [1] * n_points + [0] * (n_points - 1)
        parent = list(range(total))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        next_id = n_points
        for a, b, w in sorted(edges, key=lambda e: (e[2], min(e[0], e[1]), max(e[0], e[1]))):
            ra, rb = find(a), find(b)
            self.children[next_id] = (ra, rb)
            self.distance[next_id] = w
            self.size[next_id] = self.size[ra] + self.size[rb]
            parent[ra] = parent[rb] = next_id
            next_id += 1
        self.root = next_id - 1

    def leaves(self, node: int) -> list[int]:
        out = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < self.n_points:
                out.append(cur)
            else:
                stack.extend(self.children[cur])
        return out


def _condense_tree(tree: _SingleLinkageTree, min_cluster_size: int) -> list[_CondensedRow]:
    n = tree.n_points
    rows: list[_CondensedRow] = []
    next_cluster = n + 1
    # queue entries: (single-linkage node, condensed cluster it belongs to)
    queue = [(tree.root, n)]
    while queue:
        node, cluster = queue.pop(0)
        if node < n:
            continue
        dist = tree.distance[node]
        lam = (1.0 / dist) if dist > 0.0 else math.inf
        left, right = tree.children[node]
        big_left = tree.size[left] >= min_cluster_size
        big_right = tree.size[right] >= min_cluster_size
        if big_left and big_right:
            for child in (left, right):
                rows.append(_CondensedRow(cluster, next_cluster, lam, tree.size[child]))
                queue.append((child, next_cluster))
                next_cluster += 1
        elif not big_left and not big_right:
            # the cluster dies here; every remaining point exits at this level
            for child in (left, right):
                for point in tree.leaves(child):
                    rows.append(_CondensedRow(cluster, point, lam, 1))
        else:
            keep, shed = (left, right) if big_left else (right, left)
            for point in tree.leaves(shed):
                rows.append(_CondensedRow(cluster, point, lam, 1))
            queue.append((keep, cluster))
    return rows


def _stabilities(rows: list[_CondensedRow], n_points: int) -> dict[int, float]:
    birth = {n_points: 0.0}
    for row in rows:
        if row.child >= n_points:
            birth[row.child] = row.lam
    stab: dict[int, float] = {cid: 0.0 for cid in birth}
    for row in rows:
        born = birth[row.parent]
        span = 0.0 if (math.isinf(row.lam) and math.isinf(born)) else row.lam - born
        stab[row.parent] += span * row.size
    return stab


def _cluster_children(rows: list[_CondensedRow], n_points: int) -> dict[int, list[int]]:
    children: dict[int, list[int]] = {}
    for row in rows:
        if row.child >= n_points:
            children.setdefault(row.parent, []).append(row.child)
    return children


def _select_excess_of_mass(
    cluster_ids: list[int],
    children: dict[int, list[int]],
    stab: dict[int, float],
    root: int,
    allow_single_cluster: bool,
) -> set[int]:
    selected = {cid: False for cid in cluster_ids}
    subtree = {}
    for cid in reversed(cluster_ids):
        kids = children.get(cid, [])
        child_sum = sum(subtree[k] for k in kids)
        if cid == root and not allow_single_cluster:
            subtree[cid] = child_sum
            continue
        if kids and child_sum > stab[cid]:
            subtree[cid] = child_sum
        else:
            selected[cid] = True
            subtree[cid] = stab[cid]
            stack = list(kids)
            while stack:
                k = stack.pop()
                selected[k] = False
                stack.extend(children.get(k, []))
    return {cid for cid, keep in selected.items() if keep}


def _select_leaves(
    cluster_ids: list[int],
    children: dict[int, list[int]],
    root: int,
    allow_single_cluster: bool,
) -> set[int]:
    leaves = {cid for cid in cluster_ids if not children.get(cid)}
    if not allow_single_cluster and leaves == {root}:
        return set()
    return leaves


def _select_top_k(
    k: int,
    cluster_ids: list[int],
    children: dict[int, list[int]],
    stab: dict[int, float],
    root: int,
    allow_single_cluster: bool,
) -> set[int]:
    parent_of = {}
    for cid, kids in children.items():
        for kid in kids:
            parent_of[kid] = cid

    def ancestors(cid: int) -> set[int]:
        out = set()
        while cid in parent_of:
            cid = parent_of[cid]
            out.add(cid)
        return out

    # the root would always win on stability and shadow its descendants
    candidates = [cid for cid in cluster_ids if cid != root]
    if not candidates and allow_single_cluster:
        candidates = [cid for cid in cluster_ids if cid == root]
    candidates.sort(key=lambda cid: (-stab[cid], cid))
    chosen: list[int] = []
    chosen_set: set[int] = set()
    for cid in candidates:
        if ancestors(cid) & chosen_set:
            continue
        if any(cid in ancestors(other) for other in chosen):
            continue
        chosen.append(cid)
        chosen_set.add(cid)
        if len(chosen) == k:
            break
    return chosen_set


def hdbscan(
    points: Sequence,
    min_cluster_size: int = 5,
    min_samples: int | None = None,
    selection: str = "excess-of-mass",
    n_clusters: int | None = None,
    allow_single_cluster: bool = True,
) -> ClusterAssignment:
    """Cluster points by hierarchical density, labeling outliers as NOISE.

    ``selection`` picks how stable clusters are extracted from the
    condensed hierarchy; ``top-k`` keeps the ``n_clusters`` most stable
    non-overlapping clusters for pipelines that fix the topic count.
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be at least 2")
    if selection not in SELECTION_MODES:
        raise ValueError(f"unknown selection mode {selection!r}")
    if selection == "top-k" and (n_clusters is None or n_clusters < 1):
        raise ValueError("top-k selection needs n_clusters >= 1")
    ids, matrix = _as_matrix(points)
    n = len(matrix)
    if n < min_cluster_size:
        raise ValueError("fewer points than min_cluster_size")
    if min_samples is None:
        min_samples = min_cluster_size
    min_samples = max(1, min(min_samples, n - 1))

    core = core_distances(points, min_samples)
    mst = mutual_reachability_mst(points, core)
    slt = _SingleLinkageTree(n, mst)
    rows = _condense_tree(slt, min_cluster_size)
    stab = _stabilities(rows, n)
    children = _cluster_children(rows, n)
    root = n
    cluster_ids = sorted(stab)  # creation order: root first, children after parents

    if selection == "excess-of-mass":
        chosen = _select_excess_of_mass(cluster_ids, children, stab, root, allow_single_cluster)
    elif selection == "leaf":
        chosen = _select_leaves(cluster_ids, children, root, allow_single_cluster)
    else:
        chosen = _select_top_k(
            n_clusters or 0, cluster_ids, children, stab, root, allow_single_cluster
        )

    exit_parent = {}
    exit_lam = {}
    parent_of = {}
    for row in rows:
        if row.child < n:
            exit_parent[row.child] = row.parent
            exit_lam[row.child] = row.lam
        else:
            parent_of[row.child] = row.parent
    root_direct_max = max((row.lam for row in rows if row.parent == root), default=math.inf)

    member_lists: dict[int, list[int]] = {cid: [] for cid in chosen}
    point_cluster: dict[int, int] = {}
    for p in range(n):
        cid = exit_parent.get(p)
        while cid is not None and cid not in chosen and cid != root:
            cid = parent_of.get(cid)
        if cid is None or cid not in chosen:
            continue
        if cid == root:
            # a selected root only keeps the points that persisted to the
            # densest level; earlier dropouts stay noise
            if exit_lam[p] < root_direct_max:
                continue
        member_lists[cid].append(p)
        point_cluster[p] = cid

    occupied = [cid for cid in chosen if member_lists[cid]]
    occupied.sort(key=lambda cid: min(member_lists[cid]))
    relabel = {cid: i for i, cid in enumerate(occupied)}

    labels = {}
    for p in range(n):
        cid = point_cluster.get(p)
        labels[ids[p]] = relabel[cid] if cid is not None else NOISE
    stabilities = {relabel[cid]: float(stab[cid]) for cid in occupied}
    return ClusterAssignment(labels=labels, n_clusters=len(occupied), stabilities=stabilities)


def partition_corpus(
    corpus: Corpus, assignment: ClusterAssignment, noise_policy: str = "drop"
) -> dict[int, list[Document]]:
    """Group documents by cluster label.

    Noise documents are dropped by default, or collected under the NOISE
    key with ``noise_policy="keep"``.
    """
    if noise_policy not in ("drop", "keep"):
        raise ValueError(f"unknown noise policy {noise_policy!r}")
    partitions: dict[int, list[Document]] = {}
    for doc in corpus:
        if doc.id not in assignment.labels:
            raise ValueError(f"document {doc.id!r} has no cluster label")
        label = assignment.labels[doc.id]
        if label == NOISE and noise_policy == "drop":
            continue
        partitions.setdefault(label, []).append(doc)
    return partitions
