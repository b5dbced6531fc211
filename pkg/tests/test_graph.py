import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flipdyn import GraphError, build_graph, generate, read_edge_list, write_edge_list


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def test_cycle_four_is_c4():
    g = generate("cycle", n=4)
    assert g.max_degree == 2
    assert nx.is_isomorphic(to_nx(g), nx.cycle_graph(4))


@pytest.mark.parametrize("kind,params,oracle", [
    ("path", {"n": 5}, nx.path_graph(5)),
    ("cycle", {"n": 7}, nx.cycle_graph(7)),
    ("grid", {"rows": 3, "cols": 4}, nx.grid_2d_graph(3, 4)),
    ("complete_bipartite", {"m": 2, "n": 3}, nx.complete_bipartite_graph(2, 3)),
])
def test_generators_match_networkx(kind, params, oracle):
    assert nx.is_isomorphic(to_nx(generate(kind, **params)), oracle)


@given(st.integers(2, 12).flatmap(lambda h: st.tuples(st.just(2 * h), st.integers(1, 5), st.integers(0, 2**32))))
@settings(max_examples=30, deadline=None)
def test_random_regular_is_simple_and_regular(args):
    n, d, seed = args
    if d >= n:
        return
    g = generate("random_regular", n=n, d=d, seed=seed)
    h = to_nx(g)
    assert all(deg == d for _, deg in h.degree())
    assert h.number_of_edges() == n * d // 2


def test_random_regular_is_seeded():
    a = generate("random_regular", n=20, d=3, seed=5)
    b = generate("random_regular", n=20, d=3, seed=5)
    assert a == b


def test_edge_list_roundtrip():
    text = "4\n0 1\n1 2\n2 3\n3 0\n"
    g = read_edge_list(text)
    assert g == generate("cycle", n=4)
    assert read_edge_list(write_edge_list(g)) == g


@pytest.mark.parametrize("text,line", [
    ("3\n0 1\n1 x\n", 3),
    ("3\n0 5\n", 2),
    ("3\n1 1\n", 2),
    ("3\n0 1 2\n", 2),
])
def test_edge_list_errors_name_the_line(text, line):
    with pytest.raises(GraphError, match=f"line {line}"):
        read_edge_list(text)


def test_build_graph_rejects_bad_input():
    with pytest.raises(GraphError):
        build_graph(2, [(0, 0)])
    with pytest.raises(GraphError):
        build_graph(2, [(0, 2)])
    with pytest.raises(GraphError):
        generate("cycle", n=2)
    with pytest.raises(GraphError):
        generate("hypercube", n=3)
