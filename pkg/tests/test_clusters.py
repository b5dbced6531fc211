import itertools
import math
import random

import networkx as nx
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn import TOO_LARGE, Cluster, Coloring, cluster_at, conflict, enumerate_clusters, generate, overlap
from flipdyn.clusters import adjacent_clusters, cluster_distances, flip_colors, interference_lists
from flipdyn.coloring import is_proper, random_proper_coloring


def nx_clusters(g, sigma):
    """Oracle: components of the subgraph induced by each color pair."""
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    out = set()
    for v in range(g.n):
        for c in range(1, sigma.k + 1):
            a = sigma[v]
            if c == a:
                out.add(((v,), (a,)))
                continue
            sub = h.subgraph([u for u in range(g.n) if sigma[u] in (a, c)])
            comp = tuple(sorted(nx.node_connected_component(sub, v)))
            if len(comp) <= 6:
                out.add((comp, tuple(sorted((a, c)))))
    return out


def test_reference_cluster_counts(c4, reference_pair):
    sigma, tau = reference_pair
    assert len(enumerate_clusters(c4, sigma)) == 12
    assert len(enumerate_clusters(c4, tau)) == 13


def test_reference_cluster_at(c4, reference_pair):
    sigma, _ = reference_pair
    assert cluster_at(c4, sigma, 0, 2) == Cluster((0, 1, 3), (1, 2))
    assert cluster_at(c4, sigma, 0, 1) == Cluster((0,), (1,))


def test_reference_singletons_do_not_interact(c4):
    S, T = Cluster((0,), (1, 4)), Cluster((2,), (3, 4))
    assert not overlap(S, T) and not conflict(c4, S, T)


def test_too_large():
    g = generate("path", n=8)
    sigma = Coloring((1, 2) * 4, 3)
    assert cluster_at(g, sigma, 0, 2) is TOO_LARGE
    assert cluster_at(g, sigma, 0, 3) == Cluster((0,), (1, 3))


@given(st.integers(0, 2**32), st.integers(0, 3))
@settings(max_examples=40, deadline=None)
def test_clusters_match_networkx(seed, extra):
    g = generate("random_regular", n=10, d=3, seed=seed)
    sigma = random_proper_coloring(g, 4 + extra, random.Random(seed))
    ours = {(cl.vertices, cl.colors) for cl in enumerate_clusters(g, sigma)}
    assert ours == nx_clusters(g, sigma)


@given(st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_flip_keeps_properness(seed):
    g = generate("random_regular", n=12, d=3, seed=seed)
    sigma = random_proper_coloring(g, 5, random.Random(seed))
    for cl in enumerate_clusters(g, sigma):
        assert is_proper(g, flip_colors(sigma.colors, cl))


@given(st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_interference_lists_match_predicates(seed):
    g = generate("random_regular", n=8, d=3, seed=seed)
    sigma = random_proper_coloring(g, 5, random.Random(seed))
    cs = enumerate_clusters(g, sigma)
    lists = interference_lists(g, cs)
    for i, j in itertools.permutations(range(len(cs)), 2):
        S, T = cs.clusters[i], cs.clusters[j]
        assert (j in lists[i]) == (overlap(S, T) or conflict(g, S, T))


def test_conflict_needs_shared_color_and_adjacency(p3):
    S, T = Cluster((0,), (1, 3)), Cluster((1,), (2, 3))
    assert adjacent_clusters(p3, S, T) and conflict(p3, S, T)
    assert not conflict(p3, S, Cluster((1,), (2, 4)))
    assert not conflict(p3, S, S)
    assert not conflict(p3, S, Cluster((2,), (1, 3)))


def test_cluster_distances_on_path():
    g = generate("path", n=5)
    sigma = Coloring((1, 2, 3, 4, 1), 4)
    dist = cluster_distances(g, sigma, 0)
    assert dist[Cluster((0,), (1, 3))] == 0
    assert dist[Cluster((1,), (2, 4))] == 1
    assert dist[Cluster((2,), (1, 3))] == 2
    assert dist[Cluster((4,), (1, 2))] == 3
    assert dist[Cluster((3, 4), (1, 4))] == 2
    assert all(d < math.inf for d in dist.values())
