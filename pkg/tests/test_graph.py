"""graph module: formats, random generation, distances, geodesics."""

import pytest

from linforest.graph import (Config, CubicGraph, Geodesic, GraphFormatError,
                             NotCubicError, bfs_distances, diameter, distance,
                             harvest_geodesics, is_geodesic, parse_edge_list,
                             parse_graph6, random_cubic, to_edge_list,
                             to_graph6)

CUBE = CubicGraph(8, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7),
                      (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)])


def independent_graph6_decode(text):
    """Second opinion codec: decodes header-less graph6 via big-int bits."""
    data = [ord(c) - 63 for c in text.strip()]
    n = data[0]
    bits = 0
    for b in data[1:]:
        bits = (bits << 6) | b
    total = 6 * len(data[1:])
    edges = []
    i = 0
    for v in range(1, n):
        for u in range(v):
            if (bits >> (total - 1 - i)) & 1:
                edges.append((u, v))
            i += 1
    return n, sorted(edges)


def test_graph6_k4_cross_checked():
    g = parse_graph6("C~")
    assert g.n == 4 and g.m == 6
    n, edges = independent_graph6_decode("C~")
    assert n == 4 and edges == sorted(g.edges)
    assert to_graph6(g) == "C~"


def test_graph6_round_trip_random():
    for seed in range(10):
        g = random_cubic(14, seed=seed)
        again = parse_graph6(to_graph6(g))
        assert sorted(again.edges) == sorted(g.edges)


def test_graph6_errors():
    with pytest.raises(GraphFormatError):
        parse_graph6("")
    # a 4-cycle: degree 2 everywhere
    c4 = "Cl"   # n=4 with edges 01,12,23,03
    with pytest.raises(NotCubicError) as err:
        parse_graph6(c4)
    assert err.value.degree == 2


def test_edge_list_round_trip():
    g = random_cubic(10, seed=3)
    text = to_edge_list(g)
    assert parse_edge_list(text).edges == g.edges
    with pytest.raises(GraphFormatError):
        parse_edge_list("# only a comment\n")


def test_cubic_invariants_enforced():
    with pytest.raises(GraphFormatError):
        CubicGraph(4, [(0, 0), (1, 2), (1, 3), (2, 3), (0, 1), (0, 2)])
    with pytest.raises(GraphFormatError):
        CubicGraph(4, [(0, 1), (0, 1), (2, 3), (2, 3), (0, 2), (1, 3)])


def test_random_cubic_k4_unique():
    # K4 is the only simple cubic graph on 4 vertices
    for seed in range(5):
        g = random_cubic(4, seed=seed)
        assert sorted(g.edges) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3),
                                   (2, 3)]


def test_random_cubic_errors():
    with pytest.raises(ValueError):
        random_cubic(5)
    with pytest.raises(ValueError):
        random_cubic(2)


def test_random_cubic_shape_and_determinism():
    g = random_cubic(10, seed=1)
    assert g.m == 15
    assert random_cubic(10, seed=1).edges == g.edges
    assert random_cubic(10, seed=2).edges != g.edges


def test_random_cubic_thousand_samples():
    for seed in range(1000):
        g = random_cubic(10, seed=seed)   # constructor revalidates
        assert g.m == 15


def test_distance_trivial_and_cube():
    assert distance(CUBE, [0], [0]) == 0
    assert distance(CUBE, [0], [1]) == 1
    assert distance(CUBE, [0], [6]) == 3     # antipodal corners
    assert diameter(CUBE) == 3


def test_harvest_k4_empty():
    k4 = parse_graph6("C~")
    cfg = Config.desk(4)
    assert harvest_geodesics(k4, cfg, geo_length=2, separation=0) == []


def test_harvest_cube_length3():
    cfg = Config.desk(8)
    geos = harvest_geodesics(CUBE, cfg, geo_length=3, separation=0)
    assert geos and all(p.length == 3 for p in geos)
    for p in geos:
        assert is_geodesic(CUBE, p.vertices)


def test_harvest_separation_bfs_checked():
    g = random_cubic(4096, seed=5, require_connected=True)
    cfg = Config.desk(4096)
    geos = harvest_geodesics(g, cfg, geo_length=8, separation=10)
    assert len(geos) >= 2
    for i, p in enumerate(geos):
        assert is_geodesic(g, p.vertices)
        for q in geos[i + 1:]:
            assert distance(g, p.vertices, q.vertices) >= 10


def test_geodesic_subpaths_are_geodesics():
    g = random_cubic(512, seed=9, require_connected=True)
    cfg = Config.desk(512)
    geos = harvest_geodesics(g, cfg, geo_length=6, separation=4)
    assert geos
    p = geos[0].vertices
    for i in range(len(p) - 1):
        for j in range(i + 1, len(p)):
            assert is_geodesic(g, p[i:j + 1])


def test_config_validation():
    with pytest.raises(ValueError):
        Config.desk(100, ell_range=(2, 4))
    with pytest.raises(ValueError):
        Config.desk(100, segment_bounds=(9, 3))
    cfg = Config.paper(10 ** 5)
    assert cfg.geo_length > 10 ** 10
    assert cfg.long_path_threshold >= 4000
