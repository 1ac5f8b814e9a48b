import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import graphwhittle as gw
from graphwhittle.errors import InvalidParameterError


def brute_distance(graph, i, j, cap=None):
    """Independent oracle: smallest k with (A^k)_{ij} != 0 via dense powers."""
    a = (graph.weights.toarray() != 0).astype(float)
    if i == j:
        return 0
    cur = np.eye(graph.n_vertices)
    for k in range(1, cap or graph.n_vertices):
        cur = cur @ a
        if cur[i, j] != 0:
            return k
    return math.inf


def test_path_structure():
    g = gw.build_graph("path", length=5)
    assert g.n_vertices == 5
    assert g.n_edges == 4
    assert g.degree_bound == 2


def test_grid_structure():
    g = gw.build_graph("grid2d", side=3)
    assert g.n_vertices == 9
    assert g.n_edges == 12
    assert g.degree_bound == 4


def test_rhombus_chain_structure():
    g = gw.build_graph("rhombus_chain", k=2)
    assert g.n_vertices == 8
    assert g.n_edges == 9  # 4 per rhombus plus one connector
    assert g.degree_bound == 3
    # consecutive rhombi joined by exactly one edge
    cross = g.weights[0:4, 4:8].toarray()
    assert (cross != 0).sum() == 1


def test_bad_sizes_raise():
    with pytest.raises(InvalidParameterError):
        gw.build_graph("path", length=0)
    with pytest.raises(InvalidParameterError):
        gw.build_graph("grid2d", side=-2)
    with pytest.raises(InvalidParameterError):
        gw.build_graph("rhombus_chain", k=0)


def test_normalize_path_weights():
    g = gw.normalize_weights(gw.build_graph("path", length=6))
    assert np.allclose(g.weights.data, 0.5)


def test_normalize_grid_weights():
    g = gw.normalize_weights(gw.build_graph("grid2d", side=4))
    assert np.allclose(g.weights.data, 0.25)


def test_normalize_single_edge():
    g = gw.normalize_weights(gw.build_graph("path", length=2))
    assert np.allclose(g.weights.data, 1.0)


def test_normalize_idempotent():
    g = gw.normalize_weights(gw.build_graph("grid2d", side=4))
    again = gw.normalize_weights(g)
    assert np.allclose(again.weights.data, g.weights.data)


def test_weights_symmetric_all_kinds():
    pattern = gw.build_graph("rhombus_chain", k=1)
    kinds = [("path", {"length": 7}), ("cycle", {"length": 7}),
             ("grid2d", {"side": 4}), ("torus2d", {"side": 4}),
             ("rhombus_chain", {"k": 3}),
             ("pattern_lattice", {"pattern": pattern, "count": 4,
                                  "attach_left": 0, "attach_right": 3, "cyclic": True})]
    for kind, params in kinds:
        g = gw.build_graph(kind, **params)
        diff = (g.weights - g.weights.T)
        assert abs(diff).max() == 0.0, kind


def test_operator_norm_at_most_one():
    for kind, params in [("path", {"length": 40}), ("grid2d", {"side": 7}),
                         ("torus2d", {"side": 6}), ("rhombus_chain", {"k": 12})]:
        g = gw.normalize_weights(gw.build_graph(kind, **params))
        eig = np.linalg.eigvalsh(g.weights.toarray())
        assert eig.min() >= -1 - 1e-12 and eig.max() <= 1 + 1e-12


def test_boundary_full_set_is_zero(grid_host):
    assert gw.boundary_size(grid_host, np.arange(grid_host.n_vertices)) == 0


def test_boundary_path_interval(long_path):
    assert gw.boundary_size(long_path, np.arange(1, 101)) == 2


def test_boundary_box_exact_scan(grid_host):
    # box [1, n]^2 in a larger grid: 4n - 4 vertices with exterior neighbors
    for n in (4, 6, 8):
        box = [x * 24 + y for x in range(8, 8 + n) for y in range(8, 8 + n)]
        count = gw.boundary_size(grid_host, box)
        # independent scan
        inside = set(box)
        expected = 0
        for v in box:
            x, y = divmod(v, 24)
            nbrs = [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
            if any((a * 24 + b) not in inside for a, b in nbrs
                   if 0 <= a < 24 and 0 <= b < 24):
                expected += 1
        assert count == expected == 4 * n - 4


def test_centered_box_boundary_8n(grid_host):
    # (2n+1)^2 centered box: exact count is 8n (the displayed definition),
    # not the 2d(2n+1)^(d-1) upper bound
    subs = gw.nested_subgraphs(grid_host, "box", sides=[5, 7])
    assert subs.volumes.tolist() == [25, 49]
    assert subs.boundaries.tolist() == [16, 24]


def test_distance_identity(chain_host):
    assert gw.graph_distance(chain_host, 10, 10) == 0


def test_distance_grid_diagonal(grid_host):
    assert gw.graph_distance(grid_host, 0, 25) == 2  # (0,0) -> (1,1)


def test_distance_across_rhombus(chain_host):
    # left vertex to the next rhombus's left vertex: through the rhombus
    # (2 hops) plus the connector (1 hop)
    assert gw.graph_distance(chain_host, 0, 4) == 3
    assert gw.graph_distance(chain_host, 0, 4) == brute_distance(chain_host, 0, 4)


def test_distance_matches_brute_force(chain_host):
    rng = np.random.default_rng(7)
    for _ in range(12):
        i, j = rng.integers(0, 60, size=2)
        assert gw.graph_distance(chain_host, int(i), int(j)) == \
            brute_distance(chain_host, int(i), int(j), cap=60)


def test_distance_unreachable():
    import scipy.sparse as sp
    from graphwhittle.graphs import Graph
    w = sp.csr_matrix((4, 4))
    g = Graph(weights=w, degree_bound=1, frontier=np.array([], dtype=int))
    assert gw.graph_distance(g, 0, 3) == math.inf


def test_ball_subgraphs_trivial(chain_host):
    subs = gw.nested_subgraphs(chain_host, "ball", center=120, radii=[0])
    assert subs.volumes.tolist() == [1]
    assert subs.levels[0].tolist() == [120]


def test_ball_volumes_match_bfs_oracle():
    host = gw.normalize_weights(gw.build_graph("rhombus_chain", k=10))
    center = 20  # a left vertex mid-chain
    subs = gw.nested_subgraphs(host, "ball", center=center, radii=[1, 2, 3, 4, 5])
    for lev, r in zip(subs.levels, [1, 2, 3, 4, 5]):
        expected = sorted(v for v in range(host.n_vertices)
                          if brute_distance(host, center, v, cap=40) <= r)
        assert lev.tolist() == expected


def test_ball_volume_sequence_on_chain(chain_host):
    # volume 8k+4 at radius 3k+1 around a left vertex
    subs = gw.nested_subgraphs(chain_host, "ball", center=120,
                               radii=[4, 7, 10])
    assert subs.volumes.tolist() == [12, 20, 28]


def test_box_subgraphs_nested_and_grow(grid_host):
    subs = gw.nested_subgraphs(grid_host, "box", sides=[4, 8, 12])
    assert subs.volumes.tolist() == [16, 64, 144]
    for a, b in zip(subs.levels, subs.levels[1:]):
        assert np.isin(a, b).all()
    assert (np.diff(subs.volumes) > 0).all()


def test_amenability_diagnostic(grid_host):
    subs = gw.nested_subgraphs(grid_host, "box", sides=[4, 8, 12, 16])
    ratios = subs.boundaries / subs.volumes
    assert (np.diff(ratios) < 0).all()


def test_ball_radius_for_volume(chain_host):
    radius, vol = gw.ball_radius_for_volume(chain_host, 120, 100)
    assert vol == 100 and radius == 37  # 8k+4 at radius 3k+1, k=12


def test_center_outside_raises(chain_host):
    with pytest.raises(InvalidParameterError):
        gw.nested_subgraphs(chain_host, "ball", center=10_000, radii=[1])


def test_graph_file_round_trip(tmp_path):
    g = gw.build_graph("rhombus_chain", k=3)
    path = tmp_path / "g.txt"
    gw.save_graph(g, path)
    back = gw.load_graph(path)
    assert back.n_vertices == g.n_vertices
    assert back.degree_bound == g.degree_bound
    assert abs(back.weights - g.weights).max() == 0.0


def test_pattern_lattice_matches_rhombus_chain():
    rhombus = gw.build_graph("rhombus_chain", k=1)
    lattice = gw.build_graph("pattern_lattice", pattern=rhombus, count=4,
                             attach_left=0, attach_right=3)
    chain = gw.build_graph("rhombus_chain", k=4)
    assert abs(lattice.weights - chain.weights).max() == 0.0


_TRIANGLE_HOST = gw.normalize_weights(gw.build_graph("rhombus_chain", k=60))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=239), st.integers(min_value=0, max_value=239),
       st.integers(min_value=0, max_value=239))
def test_triangle_inequality(i, j, k):
    dij = gw.graph_distance(_TRIANGLE_HOST, i, j)
    djk = gw.graph_distance(_TRIANGLE_HOST, j, k)
    dik = gw.graph_distance(_TRIANGLE_HOST, i, k)
    assert dik <= dij + djk
