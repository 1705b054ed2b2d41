"""Shape MSER: maximally stable components of a vertex- or edge-weighted mesh.

Weights are min-max normalized and quantized to ``levels`` integer levels.
Sweeping the threshold upward grows components (union-find); each node of
the resulting component tree is one component over its lifetime
``[birth, parent birth)``. A node's stability is

    s(C) = area(C) / min_g |area(C at g + delta) - area(C at g - delta)|

over levels ``g`` in its lifetime, where the component at ``g - delta`` is
followed down the largest-child chain (empty below the leaf).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..mesh import TriMesh
from ..spectral import SpectralBasis, commute_time_pairs, heat_kernel_diagonal, heat_kernel_pairs
from .features import FeatureRegions

logger = logging.getLogger(__name__)

WEIGHTINGS = ("vw-hks", "ew-inv-hks", "ew-inv-ct")
MAX_STABILITY = 1e12


@dataclass(frozen=True)
class MserConfig:
    weighting: str = "vw-hks"
    t: float | None = None  # heat time; default 2 / lambda_1
    delta: float = 0.05  # stability window, fraction of the weight range
    min_area: float = 0.01  # fractions of total area
    max_area: float = 0.5
    levels: int = 256
    dedup_overlap: float = 0.95

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown MSER weighting {self.weighting!r}")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if not 0 <= self.min_area <= self.max_area <= 1:
            raise ValueError("size bounds must satisfy 0 <= min <= max <= 1")
        if self.t is not None and self.t <= 0:
            raise ValueError("heat time must be positive")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root


@dataclass
class ComponentTree:
    """Contracted component tree: one node per (component, birth level)."""

    level: np.ndarray  # birth level per node
    area: np.ndarray
    parent: np.ndarray  # -1 for roots
    children: list
    members: list  # vertex indices per node (only filled on demand)
    leaf_vertices: list  # vertices first attached at each node


def quantize(weights: np.ndarray, levels: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    lo, hi = float(w.min()), float(w.max())
    if hi <= lo:
        return np.zeros(len(w), dtype=np.int64)
    return np.floor((w - lo) / (hi - lo) * (levels - 1) + 0.5).astype(np.int64)


def build_tree(n: int, areas: np.ndarray, birth: np.ndarray, edges: np.ndarray, edge_level: np.ndarray) -> ComponentTree:
    """Component tree from vertex birth levels and edge merge levels.

    An edge never merges before both endpoints are born.
    """
    edge_level = np.maximum(edge_level, np.maximum(birth[edges[:, 0]], birth[edges[:, 1]]))
    # events: births before merges at the same level, then by index
    ev_level = np.r_[birth, edge_level]
    ev_kind = np.r_[np.zeros(n, np.int64), np.ones(len(edges), np.int64)]
    ev_id = np.r_[np.arange(n), np.arange(len(edges))]
    order = np.lexsort((ev_id, ev_kind, ev_level))

    level, area, parent, children, leafv = [], [], [], [], []
    node_of_root = {}
    uf = _UnionFind(n)

    def new_node(lv, ar, kids, verts):
        level.append(lv)
        area.append(ar)
        parent.append(-1)
        children.append(kids)
        leafv.append(verts)
        return len(level) - 1

    for e in order:
        lv = int(ev_level[e])
        if ev_kind[e] == 0:
            v = int(ev_id[e])
            node_of_root[v] = new_node(lv, float(areas[v]), [], [v])
            continue
        a, b = edges[ev_id[e]]
        ra, rb = uf.find(int(a)), uf.find(int(b))
        if ra == rb:
            continue
        na, nb = node_of_root.pop(ra), node_of_root.pop(rb)
        uf.parent[rb] = ra
        # merge into an existing node born at this level instead of stacking
        same = [x for x in (na, nb) if level[x] == lv]
        other = [x for x in (na, nb) if level[x] != lv]
        if same:
            keep = same[0]
            for x in same[1:]:
                children[keep] += children[x]
                leafv[keep] += leafv[x]
                for c in children[x]:
                    parent[c] = keep
                level[x] = -1  # dead
            for x in other:
                children[keep].append(x)
                parent[x] = keep
            area[keep] = area[na] + area[nb]
        else:
            keep = new_node(lv, area[na] + area[nb], [na, nb], [])
            parent[na] = parent[nb] = keep
        node_of_root[ra] = keep

    alive = np.array([lv >= 0 for lv in level])
    remap = np.full(len(level), -1)
    remap[alive] = np.arange(alive.sum())
    lvl = np.array(level)[alive]
    ar = np.array(area)[alive]
    par = np.array([remap[p] if p >= 0 else -1 for p, ok in zip(parent, alive) if ok])
    kids = [[int(remap[c]) for c in ch] for ch, ok in zip(children, alive) if ok]
    lv_ = [lv for lv, ok in zip(leafv, alive) if ok]
    return ComponentTree(lvl, ar, par, kids, [None] * len(lvl), lv_)


def node_members(tree: ComponentTree, node: int) -> np.ndarray:
    if tree.members[node] is None:
        out = list(tree.leaf_vertices[node])
        stack = list(tree.children[node])
        while stack:
            c = stack.pop()
            out += tree.leaf_vertices[c]
            stack += tree.children[c]
        tree.members[node] = np.array(sorted(out), dtype=np.int64)
    return tree.members[node]


def main_children(tree: ComponentTree) -> np.ndarray:
    """Largest child of each node (ties to the lower node id), -1 for leaves."""
    main = np.full(len(tree.level), -1)
    for i, ch in enumerate(tree.children):
        if ch:
            main[i] = max(ch, key=lambda c: (tree.area[c], -c))
    return main


def stabilities(tree: ComponentTree, delta: int) -> np.ndarray:
    n = len(tree.level)
    main = main_children(tree)
    s = np.zeros(n)
    for i in range(n):
        birth = int(tree.level[i])
        p = tree.parent[i]
        death = int(tree.level[p]) if p >= 0 else birth + 1
        # largest-child chain down to the first node at or below birth - delta;
        # levels strictly decrease along it
        chain = [i]
        while tree.level[chain[-1]] > birth - delta and main[chain[-1]] >= 0:
            chain.append(main[chain[-1]])
        pos = len(chain) if tree.level[chain[-1]] > birth - delta else len(chain) - 1
        best = np.inf
        up = i
        for g in range(birth, death):
            while tree.parent[up] >= 0 and tree.level[tree.parent[up]] <= g + delta:
                up = tree.parent[up]
            while pos > 0 and tree.level[chain[pos - 1]] <= g - delta:
                pos -= 1
            lower = tree.area[chain[pos]] if pos < len(chain) else 0.0
            best = min(best, abs(tree.area[up] - lower))
            if best == 0:
                break
        s[i] = MAX_STABILITY if best <= tree.area[i] / MAX_STABILITY else tree.area[i] / best
    return s


def mser_from_weights(
    mesh: TriMesh,
    vertex_weights: np.ndarray | None = None,
    edge_weights: np.ndarray | None = None,
    delta: float = 0.05,
    min_area: float = 0.01,
    max_area: float = 0.5,
    levels: int = 256,
    dedup_overlap: float = 0.95,
) -> FeatureRegions:
    """Maximally stable components for explicit weights.

    Give ``vertex_weights`` (one per vertex) or ``edge_weights`` (one per
    ``mesh.edges`` row). Low weights are swept first.
    """
    n = mesh.n_vertices
    edges = mesh.edges
    if (vertex_weights is None) == (edge_weights is None):
        raise ValueError("give exactly one of vertex_weights, edge_weights")
    if vertex_weights is not None:
        q = quantize(vertex_weights, levels)
        birth = q
        elev = np.maximum(q[edges[:, 0]], q[edges[:, 1]])
    else:
        q = quantize(edge_weights, levels)
        elev = q
        birth = np.full(n, levels - 1, dtype=np.int64)
        np.minimum.at(birth, edges[:, 0], q)
        np.minimum.at(birth, edges[:, 1], q)
    dlev = max(1, int(round(delta * (levels - 1))))
    areas = mesh.vertex_areas
    tree = build_tree(n, areas, birth, edges, elev)
    s = stabilities(tree, dlev)

    total = mesh.total_area
    main = main_children(tree)
    emitted = []
    # local maxima along each component's own history: parent and largest child
    for i in range(len(s)):
        p = tree.parent[i]
        if p >= 0 and not s[i] > s[p]:
            continue
        if main[i] >= 0 and s[main[i]] > s[i]:
            continue
        frac = tree.area[i] / total
        if not (min_area <= frac <= max_area):
            continue
        emitted.append(i)
    diag = {"nodes": len(s), "candidates": len(emitted)}

    # drop near-duplicates, most stable first
    emitted.sort(key=lambda i: (-s[i], tree.area[i], i))
    kept, kept_sets = [], []
    for i in emitted:
        mem = node_members(tree, i)
        dup = False
        for other in kept_sets:
            inter = areas[np.intersect1d(mem, other, assume_unique=True)].sum()
            union = areas[np.union1d(mem, other)].sum()
            if inter / union >= dedup_overlap:
                dup = True
                break
        if not dup:
            kept.append(i)
            kept_sets.append(mem)
    diag["regions"] = len(kept)
    return FeatureRegions(tuple(kept_sets), s[kept], diag)


HEAT_TIME_LAMBDA1 = 2.0


def default_heat_time(basis: SpectralBasis) -> float:
    """``t = 2 / lambda_1``: intrinsic, so rigid motions leave it unchanged,
    and it scales with area like ``diam^2``."""
    return HEAT_TIME_LAMBDA1 / basis.first_positive


def shape_mser(mesh: TriMesh, basis: SpectralBasis, weighting: str = "vw-hks", config: MserConfig | None = None, **kw) -> FeatureRegions:
    """Shape MSER with spectral weights.

    * ``vw-hks``: vertex weight = heat kernel diagonal at time ``t``
    * ``ew-inv-hks``: edge weight = 1 / heat kernel between the endpoints
    * ``ew-inv-ct``: edge weight = 1 / commute-time kernel between the endpoints
    """
    cfg = config or MserConfig(weighting=weighting, **kw)
    t = cfg.t if cfg.t is not None else default_heat_time(basis)
    e = mesh.edges
    common = dict(delta=cfg.delta, min_area=cfg.min_area, max_area=cfg.max_area, levels=cfg.levels, dedup_overlap=cfg.dedup_overlap)
    if cfg.weighting == "vw-hks":
        w = heat_kernel_diagonal(basis, [t])[:, 0]
        return mser_from_weights(mesh, vertex_weights=w, **common)
    if cfg.weighting == "ew-inv-hks":
        k = heat_kernel_pairs(basis, e[:, 0], e[:, 1], t)
    else:
        k = commute_time_pairs(basis, e[:, 0], e[:, 1])
    floor = 1e-12 * max(float(np.abs(k).max()), 1e-300)
    return mser_from_weights(mesh, edge_weights=1.0 / np.maximum(k, floor), **common)
