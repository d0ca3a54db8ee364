"""Tree structure and centrality tests.

The psi oracle here is deliberately different from the library algorithm:
it removes a vertex and measures the largest remaining component by BFS.
"""

import numpy as np
import pytest

from patrees.tree import (
    CentralityOrder,
    CentroidTracker,
    GrowingTree,
    centroids,
    compare_centrality,
    forest_sizes,
    line_tree,
    psi_all,
    star_tree,
    subtree_size,
)


def adjacency(tree):
    adj = [[] for _ in range(tree.n)]
    for v in range(1, tree.n):
        p = tree.parent[v]
        adj[v].append(p)
        adj[p].append(v)
    return adj


def psi_brute(tree):
    """Largest component size after deleting the vertex, per vertex."""
    n = tree.n
    adj = adjacency(tree)
    out = []
    for u in range(n):
        seen = [False] * n
        seen[u] = True
        best = 0
        for s in adj[u]:
            if seen[s]:
                continue
            comp = 0
            stack = [s]
            seen[s] = True
            while stack:
                w = stack.pop()
                comp += 1
                for nb in adj[w]:
                    if not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
            best = max(best, comp)
        out.append(best)
    return out


def forest_brute(tree, k):
    """Component sizes containing vertices 0..k-1 after deleting edges inside that set."""
    n = tree.n
    adj = [[] for _ in range(n)]
    for v in range(1, n):
        p = tree.parent[v]
        if v < k and p < k:
            continue
        adj[v].append(p)
        adj[p].append(v)
    sizes = []
    seen = [False] * n
    for s in range(k):
        comp = 0
        stack = [s]
        seen[s] = True
        while stack:
            w = stack.pop()
            comp += 1
            for nb in adj[w]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        sizes.append(comp)
    return sizes


def random_tree(rng, n):
    parents = [-1] + [int(rng.integers(0, i)) for i in range(1, n)]
    return GrowingTree.from_parents(parents)


def test_path_psi_values():
    tree = line_tree(4)
    assert psi_all(tree) == [3, 2, 2, 3]
    assert psi_brute(tree) == [3, 2, 2, 3]


def test_star_psi_values():
    tree = star_tree(6)
    assert psi_all(tree) == [1, 5, 5, 5, 5, 5]


def test_single_vertex_psi_is_zero():
    tree = GrowingTree()
    assert psi_all(tree) == [0]
    rep = centroids(tree)
    assert rep.centroid_ids == (0,) and rep.selected == 0 and rep.psi_value == 0


def test_two_vertices_selects_younger():
    tree = line_tree(2)
    rep = centroids(tree)
    assert rep.centroid_ids == (0, 1)
    assert rep.selected == 1
    assert rep.psi_value == 1


def test_path_centroids_adjacent_younger_selected():
    rep = centroids(line_tree(4))
    assert rep.centroid_ids == (1, 2)
    assert rep.selected == 2
    assert rep.psi_value == 2


def test_psi_all_matches_brute_on_random_trees():
    rng = np.random.default_rng(20260815)
    for _ in range(120):
        n = int(rng.integers(1, 61))
        tree = random_tree(rng, n)
        assert psi_all(tree) == psi_brute(tree)


def test_centroid_invariants_on_random_trees():
    rng = np.random.default_rng(31415)
    for _ in range(200):
        n = int(rng.integers(1, 120))
        tree = random_tree(rng, n)
        rep = centroids(tree)
        assert 2 * rep.psi_value <= n
        assert 1 <= len(rep.centroid_ids) <= 2
        if len(rep.centroid_ids) == 2:
            a, b = rep.centroid_ids
            assert tree.parent[b] == a or tree.parent[a] == b
            assert rep.selected == max(a, b)


def test_subtree_size_path_example():
    # path 0-1-2-3: from vertex 3, the subtree at 1 is {1, 0}
    tree = line_tree(4)
    assert subtree_size(tree, 3, 1) == 2
    assert subtree_size(tree, 1, 3) == 1
    assert subtree_size(tree, 0, 1) == 3
    assert subtree_size(tree, 1, 0) == 1


def test_subtree_size_adjacent_pairs_partition():
    rng = np.random.default_rng(99)
    for _ in range(40):
        n = int(rng.integers(2, 40))
        tree = random_tree(rng, n)
        for v in range(1, n):
            u = tree.parent[v]
            assert subtree_size(tree, u, v) + subtree_size(tree, v, u) == n


def test_subtree_size_argument_errors():
    tree = line_tree(3)
    with pytest.raises(ValueError):
        subtree_size(tree, 1, 1)
    with pytest.raises(ValueError):
        subtree_size(tree, 0, 3)


def test_compare_centrality_path():
    tree = line_tree(4)
    assert compare_centrality(tree, 1, 3) is CentralityOrder.U_MORE_CENTRAL
    assert compare_centrality(tree, 3, 1) is CentralityOrder.V_MORE_CENTRAL
    assert compare_centrality(tree, 0, 3) is CentralityOrder.EQUAL


def test_compare_centrality_agrees_with_psi_exhaustively():
    rng = np.random.default_rng(777)
    for _ in range(60):
        n = int(rng.integers(2, 13))
        tree = random_tree(rng, n)
        psi = psi_all(tree)
        for u in range(n):
            for v in range(u + 1, n):
                got = compare_centrality(tree, u, v)
                if psi[u] < psi[v]:
                    assert got is CentralityOrder.U_MORE_CENTRAL
                elif psi[u] > psi[v]:
                    assert got is CentralityOrder.V_MORE_CENTRAL
                else:
                    assert got is CentralityOrder.EQUAL


def test_forest_sizes_matches_brute_and_sums():
    rng = np.random.default_rng(4242)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        tree = random_tree(rng, n)
        for k in range(1, n + 1):
            sizes = forest_sizes(tree, k)
            assert sizes == forest_brute(tree, k)
            assert sum(sizes) == n
    assert forest_sizes(line_tree(7), 1) == [7]
    assert forest_sizes(line_tree(7), 7) == [1] * 7


def test_forest_sizes_argument_errors():
    tree = line_tree(3)
    with pytest.raises(ValueError):
        forest_sizes(tree, 0)
    with pytest.raises(ValueError):
        forest_sizes(tree, 4)


def test_psi_lower_bound_from_forest_decomposition():
    # for i > K: psi(v_i) >= min over k of the total size outside component k
    rng = np.random.default_rng(5150)
    for _ in range(40):
        n = int(rng.integers(2, 31))
        tree = random_tree(rng, n)
        psi = psi_all(tree)
        for k in range(1, n):
            sizes = forest_sizes(tree, k)
            bound = n - max(sizes)
            for i in range(k, n):
                assert psi[i] >= bound


def test_degree_accounting():
    tree = star_tree(5)
    assert tree.degree(0) == 4  # the root has no parent edge
    assert all(tree.degree(v) == 1 for v in range(1, 5))
    assert tree.max_degree() == 4
    assert line_tree(1).max_degree() == 0
    assert line_tree(2).max_degree() == 1


def test_serialization_round_trip_untimed():
    rng = np.random.default_rng(12)
    tree = random_tree(rng, 17)
    text = tree.to_text()
    assert text.splitlines()[0] == "vertex,parent"
    back = GrowingTree.from_text(text)
    assert back.parent == tree.parent
    assert back.birth_time is None


def test_serialization_round_trip_timed(tmp_path):
    tree = GrowingTree(root_time=0.0)
    rng = np.random.default_rng(7)
    t = 0.0
    for _ in range(25):
        t += float(rng.exponential())
        tree.add_child(int(rng.integers(0, tree.n)), birth_time=t)
    path = tmp_path / "tree.csv"
    tree.save(path)
    back = GrowingTree.load(path)
    assert back.parent == tree.parent
    assert back.birth_time == tree.birth_time  # repr round-trips floats exactly


def test_serialization_rejects_malformed_input():
    with pytest.raises(ValueError, match="header"):
        GrowingTree.from_text("a,b\n0,-1\n")
    with pytest.raises(ValueError, match="consecutive"):
        GrowingTree.from_text("vertex,parent\n0,-1\n2,0\n")
    with pytest.raises(ValueError, match="smaller index"):
        GrowingTree.from_text("vertex,parent\n0,-1\n1,5\n")
    with pytest.raises(ValueError):
        GrowingTree.from_text("")


def test_from_parents_validation():
    with pytest.raises(ValueError):
        GrowingTree.from_parents([0])
    with pytest.raises(ValueError):
        GrowingTree.from_parents([-1, 1])
    with pytest.raises(ValueError):
        GrowingTree.from_parents([-1, 0], birth_times=[0.0])


def test_add_child_timing_mismatch():
    untimed = GrowingTree()
    with pytest.raises(ValueError):
        untimed.add_child(0, birth_time=1.0)
    timed = GrowingTree(root_time=0.0)
    with pytest.raises(ValueError):
        timed.add_child(0)


def test_tracker_agrees_with_recomputation():
    rng = np.random.default_rng(2718)
    for _ in range(25):
        tracker = CentroidTracker()
        tree = GrowingTree()
        for _ in range(int(rng.integers(2, 120))):
            p = int(rng.integers(0, tree.n))
            tree.add_child(p)
            comp = tracker.add_leaf(p)
            rep = centroids(tree)
            assert tracker.selected == rep.selected
            assert tracker.centroid_ids == rep.centroid_ids
            assert tracker.psi_selected == rep.psi_value
            # stabilisation bound: the old centroid keeps at least half the
            # old tree on its side of the new leaf
            assert 2 * comp >= tree.n - 1


def test_tracker_single_vertex_state():
    tracker = CentroidTracker()
    assert tracker.n == 1 and tracker.selected == 0 and tracker.psi_selected == 0
    assert tracker.centroid_ids == (0,)


def test_line_star_builders():
    assert line_tree(5).parent == [-1, 0, 1, 2, 3]
    assert star_tree(5).parent == [-1, 0, 0, 0, 0]
    with pytest.raises(ValueError):
        line_tree(0)
    with pytest.raises(ValueError):
        star_tree(0)
