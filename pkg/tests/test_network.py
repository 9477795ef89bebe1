import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multiplex_sir.errors import ConfigurationError, EdgeListParseError
from multiplex_sir.network import (GraphSpec, Layer, MultiplexNetwork, attachment_count,
                                   build_multiplex, degree_sequence, format_edge_list,
                                   generate_layer, load_edge_list, save_edge_list)


def er(n=1000, k=4.0, seed=7):
    return GraphSpec("erdos-renyi", n, k, seed)


def test_er_edge_count_near_expectation():
    layer = generate_layer(er())
    # expectation N<k>/2 = 2000
    assert abs(layer.n_edges - 2000) <= 100


def test_er_zero_degree_gives_empty_graph():
    layer = generate_layer(GraphSpec("erdos-renyi", 2, 0.0, 1))
    assert layer.n_edges == 0
    assert degree_sequence(layer) == [0, 0]


@pytest.mark.parametrize("seed", [0, 1, 7, 11, 12])
def test_er_mean_degree_within_five_percent(seed):
    deg = degree_sequence(generate_layer(er(seed=seed)))
    assert abs(np.mean(deg) - 4.0) <= 0.2


def test_ba_attachment_and_heavy_tail():
    assert attachment_count(4.0) == 2
    assert attachment_count(1.0) == 1
    assert attachment_count(0.4) == 1
    ba = generate_layer(GraphSpec("barabasi-albert", 1000, 4.0, 7))
    erl = generate_layer(er())
    assert ba.n_edges == 2 * (1000 - 2)
    assert ba.degrees().max() > 3 * erl.degrees().max()


@pytest.mark.parametrize("spec", [
    GraphSpec("erdos-renyi", 1, 0.0, 0),
    GraphSpec("erdos-renyi", 10, -1.0, 0),
    GraphSpec("erdos-renyi", 10, 9.0, 0),
    GraphSpec("barabasi-albert", 10, 0.0, 0),
    GraphSpec("small-world", 10, 2.0, 0),
    GraphSpec("edge-list-file", 10, 2.0, 0),
])
def test_invalid_specs_rejected(spec):
    with pytest.raises(ConfigurationError):
        generate_layer(spec)


def test_build_multiplex_independent_layers():
    net = build_multiplex(er(seed=1), er(seed=2))
    assert net.n == 1000
    assert net.layer_a.edge_set() != net.layer_b.edge_set()


def test_build_multiplex_identical_specs_identical_layers():
    net = build_multiplex(er(seed=3), er(seed=3))
    assert net.layer_a.edge_set() == net.layer_b.edge_set()


def test_build_multiplex_size_mismatch():
    with pytest.raises(ConfigurationError):
        build_multiplex(er(n=1000), er(n=999))
    with pytest.raises(ConfigurationError):
        MultiplexNetwork(Layer.from_edges(3, []), Layer.from_edges(4, []))


@pytest.mark.parametrize("topology", ["erdos-renyi", "barabasi-albert"])
def test_generation_is_deterministic(topology):
    spec = GraphSpec(topology, 300, 4.0, 99)
    assert format_edge_list(generate_layer(spec)) == format_edge_list(generate_layer(spec))


def test_degree_sequence_examples():
    path = Layer.from_edges(3, [(0, 1), (1, 2)])
    assert degree_sequence(path) == [1, 2, 1]
    assert degree_sequence(Layer.from_edges(4, [])) == [0, 0, 0, 0]


def test_load_path_graph(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("3\n0 1\n1 2\n")
    layer = load_edge_list(f)
    assert layer.n == 3
    assert layer.edge_set() == {(0, 1), (1, 2)}


def test_load_skips_comments_and_collapses_duplicates(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# header\n4\n\n0 1\n1 0\n# note\n2   3\n0 1\n")
    layer = load_edge_list(f)
    assert layer.edges() == [(0, 1), (2, 3)]


@pytest.mark.parametrize("text,lineno", [
    ("3\n0 0\n", 2),
    ("3\n0 1\n1 3\n", 3),
    ("3\n0 1 2\n", 2),
    ("3\n0 x\n", 2),
    ("three\n0 1\n", 1),
    ("3\n0 1\n-1 2\n", 3),
])
def test_load_errors_carry_line_numbers(tmp_path, text, lineno):
    f = tmp_path / "g.txt"
    f.write_text(text)
    with pytest.raises(EdgeListParseError) as err:
        load_edge_list(f)
    assert err.value.lineno == lineno


def test_round_trip_is_canonical(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("5\n3 1\n0 4\n1 3\n2 0\n")
    out = tmp_path / "out.txt"
    save_edge_list(load_edge_list(src), out)
    assert out.read_text() == "5\n0 2\n0 4\n1 3\n"
    again = tmp_path / "again.txt"
    save_edge_list(load_edge_list(out), again)
    assert again.read_bytes() == out.read_bytes()


def test_edge_list_file_topology(tmp_path):
    f = tmp_path / "g.txt"
    save_edge_list(generate_layer(er(n=50, seed=4)), f)
    layer = generate_layer(GraphSpec("edge-list-file", 50, 0, 0, str(f)))
    assert layer == generate_layer(er(n=50, seed=4))


edge_lists = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
             .filter(lambda e: e[0] != e[1]), max_size=80)))


@given(edge_lists)
@settings(max_examples=100, deadline=None)
def test_layer_symmetry_and_degree_conservation(data):
    n, edges = data
    layer = Layer.from_edges(n, edges)
    for i in range(n):
        nbrs = layer.neighbors(i)
        assert i not in nbrs
        assert list(nbrs) == sorted(set(nbrs))
        for j in nbrs:
            assert i in layer.neighbors(j)
    assert sum(degree_sequence(layer)) == 2 * layer.n_edges
    assert layer.edge_set() == {(min(e), max(e)) for e in edges}


@given(edge_lists)
@settings(max_examples=50, deadline=None)
def test_round_trip_property(tmp_path_factory, data):
    n, edges = data
    layer = Layer.from_edges(n, edges)
    f = tmp_path_factory.mktemp("rt") / "g.txt"
    save_edge_list(layer, f)
    assert load_edge_list(f) == layer
