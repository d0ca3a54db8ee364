"""Rooted growing trees and balancedness-based centrality.

Vertices are indexed by birth order starting at 0 (the root), so
``parent[i] < i`` always holds.  The balancedness of a vertex u is

    psi(u) = max over v != u of |(T, u)_{v down}|,

the size of the largest subtree hanging off u when the tree is rooted
at u.  Vertices minimising psi are the centroids; there are at most two
and they are adjacent.  When two exist the selected one is the younger
(higher index).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

__all__ = [
    "GrowingTree",
    "CentroidReport",
    "CentralityOrder",
    "CentroidTracker",
    "subtree_size",
    "psi_all",
    "centroids",
    "compare_centrality",
    "forest_sizes",
    "line_tree",
    "star_tree",
]

NO_PARENT = -1


class GrowingTree:
    """Mutable rooted tree grown by leaf attachment.

    Either every vertex carries a birth time (continuous-time growth) or
    none does (discrete growth); mixing is rejected.
    """

    __slots__ = ("parent", "children", "birth_time")

    def __init__(self, root_time: float | None = None):
        self.parent: list[int] = [NO_PARENT]
        self.children: list[list[int]] = [[]]
        self.birth_time: list[float] | None = [root_time] if root_time is not None else None

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def timed(self) -> bool:
        return self.birth_time is not None

    def add_child(self, parent: int, birth_time: float | None = None) -> int:
        if not 0 <= parent < len(self.parent):
            raise ValueError(f"parent index {parent} out of range for tree of size {len(self.parent)}")
        if self.timed != (birth_time is not None):
            raise ValueError("birth_time must be given exactly when the tree is timed")
        v = len(self.parent)
        self.parent.append(parent)
        self.children.append([])
        self.children[parent].append(v)
        if self.timed:
            self.birth_time.append(birth_time)
        return v

    def parent_of(self, v: int) -> int | None:
        self._check_vertex(v)
        return None if v == 0 else self.parent[v]

    def out_degree(self, v: int) -> int:
        self._check_vertex(v)
        return len(self.children[v])

    def degree(self, v: int) -> int:
        """Total degree: out-degree plus the parent edge (the root has none)."""
        self._check_vertex(v)
        return len(self.children[v]) + (0 if v == 0 else 1)

    def max_degree(self) -> int:
        return max(self.degree(v) for v in range(self.n))

    def neighbors(self, v: int):
        self._check_vertex(v)
        if v != 0:
            yield self.parent[v]
        yield from self.children[v]

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < len(self.parent):
            raise ValueError(f"vertex index {v} out of range for tree of size {len(self.parent)}")

    @classmethod
    def from_parents(cls, parents, birth_times=None) -> "GrowingTree":
        parents = list(parents)
        if not parents or parents[0] != NO_PARENT:
            raise ValueError("parents[0] must be -1 (the root has no parent)")
        if birth_times is not None:
            birth_times = [float(t) for t in birth_times]
            if len(birth_times) != len(parents):
                raise ValueError("birth_times length must match parents length")
        tree = cls(root_time=birth_times[0] if birth_times is not None else None)
        for i in range(1, len(parents)):
            p = parents[i]
            if not 0 <= p < i:
                raise ValueError(f"parent of vertex {i} must be a smaller index, got {p}")
            tree.add_child(p, birth_times[i] if birth_times is not None else None)
        return tree

    # ---- serialization: one header line, then "vertex,parent[,birth_time]" ----

    def to_text(self) -> str:
        lines = []
        if self.timed:
            lines.append("vertex,parent,birth_time")
            for v in range(self.n):
                lines.append(f"{v},{self.parent[v]},{self.birth_time[v]!r}")
        else:
            lines.append("vertex,parent")
            for v in range(self.n):
                lines.append(f"{v},{self.parent[v]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GrowingTree":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty tree file")
        header = lines[0].strip()
        if header == "vertex,parent,birth_time":
            timed = True
        elif header == "vertex,parent":
            timed = False
        else:
            raise ValueError(f"unrecognised tree header {header!r}")
        parents: list[int] = []
        times: list[float] = []
        for ln in lines[1:]:
            parts = ln.strip().split(",")
            if len(parts) != (3 if timed else 2):
                raise ValueError(f"malformed tree row {ln!r}")
            v = int(parts[0])
            if v != len(parents):
                raise ValueError(f"vertex indices must be consecutive from 0, got {v} at row {len(parents)}")
            parents.append(int(parts[1]))
            if timed:
                times.append(float(parts[2]))
        return cls.from_parents(parents, times if timed else None)

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "GrowingTree":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_text(fh.read())


def line_tree(r: int) -> GrowingTree:
    """Path on r vertices, each new vertex attached to the previous one."""
    if r < 1:
        raise ValueError("line tree needs at least one vertex")
    return GrowingTree.from_parents([NO_PARENT] + list(range(r - 1)))


def star_tree(r: int) -> GrowingTree:
    """Star on r vertices, every non-root attached to the root."""
    if r < 1:
        raise ValueError("star tree needs at least one vertex")
    return GrowingTree.from_parents([NO_PARENT] + [0] * (r - 1))


def subtree_size(tree: GrowingTree, u: int, v: int) -> int:
    """|(T, u)_{v down}|: size of the subtree at v when the tree is rooted at u."""
    tree._check_vertex(u)
    tree._check_vertex(v)
    if u == v:
        raise ValueError("subtree_size needs two distinct vertices")
    n = tree.n
    seen = [False] * n
    par_u = [NO_PARENT] * n
    order = [u]
    seen[u] = True
    i = 0
    while i < len(order):
        w = order[i]
        i += 1
        for nb in tree.neighbors(w):
            if not seen[nb]:
                seen[nb] = True
                par_u[nb] = w
                order.append(nb)
    size = [1] * n
    for w in reversed(order[1:]):
        size[par_u[w]] += size[w]
    return size[v]


def psi_all(tree: GrowingTree) -> list[int]:
    """Balancedness of every vertex, O(n) total.

    The birth-order invariant parent[i] < i makes the subtree-size pass a
    reverse index sweep; the component above v has size n - size[v], so no
    second rerooting pass is needed.  psi of a single-vertex tree is 0 by
    convention (max over an empty set of subtrees).
    """
    n = tree.n
    par = tree.parent
    size = [1] * n
    for i in range(n - 1, 0, -1):
        size[par[i]] += size[i]
    heaviest_child = [0] * n
    for i in range(1, n):
        p = par[i]
        if size[i] > heaviest_child[p]:
            heaviest_child[p] = size[i]
    psi = [0] * n
    for v in range(n):
        up = n - size[v] if v else 0
        psi[v] = up if up > heaviest_child[v] else heaviest_child[v]
    return psi


@dataclass(frozen=True)
class CentroidReport:
    """All balancedness minimisers plus the tie-broken selection."""

    centroid_ids: tuple[int, ...]
    psi_value: int
    selected: int


def centroids(tree: GrowingTree) -> CentroidReport:
    """Centroid set (size 1 or 2) with the younger vertex selected on a tie."""
    psi = psi_all(tree)
    best = min(psi)
    ids = tuple(v for v, p in enumerate(psi) if p == best)
    if len(ids) > 2:
        raise AssertionError(f"more than two centroids {ids}; tree state corrupt")
    return CentroidReport(centroid_ids=ids, psi_value=best, selected=max(ids))


class CentralityOrder(enum.Enum):
    U_MORE_CENTRAL = "u_more_central"
    V_MORE_CENTRAL = "v_more_central"
    EQUAL = "equal"


def compare_centrality(tree: GrowingTree, u: int, v: int) -> CentralityOrder:
    """Order psi(u) vs psi(v) from two opposing subtree sizes.

    psi(u) <= psi(v) holds iff |(T, v)_{u down}| >= |(T, u)_{v down}|, so
    two subtree computations settle the comparison without evaluating psi.
    """
    a = subtree_size(tree, v, u)
    b = subtree_size(tree, u, v)
    if a > b:
        return CentralityOrder.U_MORE_CENTRAL
    if a < b:
        return CentralityOrder.V_MORE_CENTRAL
    return CentralityOrder.EQUAL


def forest_sizes(tree: GrowingTree, k: int) -> list[int]:
    """Component sizes after deleting edges joining two of the first k vertices.

    Every edge incident to a vertex of index >= k survives (its endpoint of
    larger index has a parent of smaller index, which is the only way edges
    arise), so each vertex belongs to the component of its lowest ancestor
    below k.  Returns the sizes for vertices 0..k-1 in that order; they sum
    to n.
    """
    n = tree.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    par = tree.parent
    rep = list(range(k)) + [0] * (n - k)
    sizes = [1] * k
    for i in range(k, n):
        p = par[i]
        r = rep[p] if p >= k else p
        rep[i] = r
        sizes[r] += 1
    return sizes


class CentroidTracker:
    """Incremental selected-centroid maintenance under leaf insertion.

    Keeps subtree sizes with respect to the fixed root plus each vertex's
    heaviest child, updating only along the insertion path (O(depth)), then
    relocates the centroid with a local walk (the centroid moves at most
    one edge per insertion).  ``add_leaf`` returns the size of the
    component of the previously selected centroid seen from the new leaf,
    i.e. |(T_{n+1}, v_new)_{prev down}|, which the stabilisation theory
    lower-bounds by n/2.
    """

    __slots__ = ("parent", "size", "max_child", "heavy_child", "selected", "_psi_selected", "_pair")

    def __init__(self):
        self.parent: list[int] = [NO_PARENT]
        self.size: list[int] = [1]
        self.max_child: list[int] = [0]
        self.heavy_child: list[int] = [NO_PARENT]
        self.selected: int = 0
        self._psi_selected: int = 0
        self._pair: tuple[int, ...] = (0,)

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def psi_selected(self) -> int:
        return self._psi_selected

    @property
    def centroid_ids(self) -> tuple[int, ...]:
        return self._pair

    def add_leaf(self, parent: int) -> int:
        if not 0 <= parent < len(self.parent):
            raise ValueError(f"parent index {parent} out of range")
        prev = self.selected
        n_old = len(self.parent)
        u = n_old
        self.parent.append(parent)
        self.size.append(1)
        self.max_child.append(0)
        self.heavy_child.append(NO_PARENT)

        size = self.size
        max_child = self.max_child
        heavy_child = self.heavy_child
        par = self.parent

        # climb to the root updating sizes; note where the path crosses prev
        child_toward_new: int = NO_PARENT
        c = u
        w = parent
        while w != NO_PARENT:
            size[w] += 1
            if size[c] > max_child[w]:
                max_child[w] = size[c]
                heavy_child[w] = c
            if w == prev:
                child_toward_new = c
            c = w
            w = par[w]

        if child_toward_new != NO_PARENT:
            prev_component = (n_old + 1) - size[child_toward_new]
        else:
            prev_component = size[prev]

        self._relocate()
        return prev_component

    def _relocate(self) -> None:
        n = len(self.parent)
        size = self.size
        max_child = self.max_child
        par = self.parent
        v = self.selected
        while True:
            up = n - size[v] if v else 0
            mc = max_child[v]
            if up > mc:
                heavy, nbr = up, par[v]
            else:
                heavy, nbr = mc, self.heavy_child[v]
            if 2 * heavy > n and nbr != NO_PARENT:
                v = nbr
            else:
                break
        self._psi_selected = heavy
        if 2 * heavy == n and nbr != NO_PARENT:
            pair = (v, nbr) if v < nbr else (nbr, v)
            self._pair = pair
            self.selected = pair[1]
        else:
            self._pair = (v,)
            self.selected = v

    def as_tree(self) -> GrowingTree:
        return GrowingTree.from_parents(self.parent)
