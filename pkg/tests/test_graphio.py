"""Graph ingestion, Laplacians, random graphs, and file formats."""

import numpy as np
import pytest

from fastspec.core import SYMMETRIC, GENERAL
from fastspec.errors import IndexOutOfRange, ParseError, ValidationError
from fastspec.graphio import (
    Graph,
    erdos_renyi,
    laplacian,
    load_edge_list,
    load_matrix_market,
    save_matrix_market,
)


# ------------------------------------------------------------------- laplacian


def test_laplacian_path_graph():
    g = Graph(n=3, edges=((0, 1), (1, 2)), directed=False)
    lap = laplacian(g)
    want = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
    assert np.array_equal(lap.data, want)
    assert lap.symmetry_tag == SYMMETRIC


def test_laplacian_empty_graph():
    lap = laplacian(Graph(n=4, edges=(), directed=False))
    assert np.array_equal(lap.data, np.zeros((4, 4)))


def test_laplacian_directed_out_degree():
    lap = laplacian(Graph(n=2, edges=((0, 1),), directed=True))
    assert np.array_equal(lap.data, np.array([[1.0, -1.0], [0.0, 0.0]]))
    assert lap.symmetry_tag == GENERAL


def test_laplacian_row_sums_zero():
    rng = np.random.default_rng(70)
    for directed in (False, True):
        g = erdos_renyi(40, 0.25, 7, directed=directed)
        lap = laplacian(g).data
        assert np.abs(lap.sum(axis=1)).max() == 0.0


def test_laplacian_positive_semidefinite():
    rng = np.random.default_rng(71)
    lap = laplacian(erdos_renyi(30, 0.3, 3)).data
    xs = rng.normal(size=(1000, 30))
    quad = np.einsum("ki,ij,kj->k", xs, lap, xs)
    norms = (xs * xs).sum(axis=1)
    assert (quad / norms).min() >= -1e-10


# ---------------------------------------------------------------- erdos-renyi


def test_erdos_renyi_empty_and_complete():
    assert len(erdos_renyi(5, 0.0, 1).edges) == 0
    assert len(erdos_renyi(4, 1.0, 1).edges) == 6


def test_erdos_renyi_edge_count_statistics():
    n, p = 200, 0.3
    pairs = n * (n - 1) // 2
    counts = [len(erdos_renyi(n, p, seed).edges) for seed in range(50)]
    mean = np.mean(counts)
    sigma = np.sqrt(pairs * p * (1 - p))
    assert abs(mean - p * pairs) <= 3 * sigma


def test_erdos_renyi_deterministic():
    a = erdos_renyi(50, 0.3, 123, directed=True)
    b = erdos_renyi(50, 0.3, 123, directed=True)
    assert a.edges == b.edges
    c = erdos_renyi(50, 0.3, 124, directed=True)
    assert a.edges != c.edges


def test_erdos_renyi_invalid_p():
    with pytest.raises(ValidationError):
        erdos_renyi(5, 1.5, 0)


# ------------------------------------------------------------------ edge lists


def test_load_edge_list(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# a comment\nn 2 undirected\n0 1\n")
    g = load_edge_list(path)
    assert g.n == 2 and not g.directed
    assert g.edges == ((0, 1, 1.0),)


def test_load_edge_list_weighted_directed(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("n 3 directed\n0 1 2.5\n2 0\n")
    g = load_edge_list(path)
    assert g.directed
    assert g.edges == ((0, 1, 2.5), (2, 0, 1.0))


def test_load_edge_list_vertex_out_of_range(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("n 2 undirected\n0 5\n")
    with pytest.raises(IndexOutOfRange):
        load_edge_list(path)


def test_load_edge_list_bad_header(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("vertices 2 undirected\n0 1\n")
    with pytest.raises(ParseError):
        load_edge_list(path)


# --------------------------------------------------------------- matrix market


def test_matrix_market_symmetric_coordinate(tmp_path):
    path = tmp_path / "m.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "% comment\n2 2 3\n1 1 2\n2 1 1\n2 2 2\n")
    m = load_matrix_market(path)
    assert np.array_equal(m.data, np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert m.symmetry_tag == SYMMETRIC


def test_matrix_market_general_array(tmp_path):
    path = tmp_path / "m.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
    m = load_matrix_market(path)
    # column-major: first column (1, 2), second (3, 4)
    assert np.array_equal(m.data, np.array([[1.0, 3.0], [2.0, 4.0]]))


def test_matrix_market_roundtrip(tmp_path):
    rng = np.random.default_rng(72)
    x = rng.normal(size=(5, 5))
    from fastspec.core import DenseMatrix
    path = tmp_path / "m.mtx"
    save_matrix_market(path, DenseMatrix(x))
    back = load_matrix_market(path)
    assert np.array_equal(back.data, x)
    s = x + x.T
    save_matrix_market(path, DenseMatrix.symmetric(s))
    back = load_matrix_market(path)
    assert np.array_equal(back.data, s)
    assert back.symmetry_tag == SYMMETRIC


def test_matrix_market_malformed(tmp_path):
    path = tmp_path / "m.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 oops 2\n")
    with pytest.raises(ParseError):
        load_matrix_market(path)


def test_matrix_market_index_out_of_range(tmp_path):
    path = tmp_path / "m.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 5.0\n")
    with pytest.raises(IndexOutOfRange):
        load_matrix_market(path)


def test_graph_rejects_self_loop():
    with pytest.raises(ValidationError):
        Graph(n=3, edges=((1, 1),), directed=False)
