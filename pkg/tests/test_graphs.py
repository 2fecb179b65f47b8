import json

import numpy as np
import pytest
from hypothesis import given, settings

from qcwalk.errors import GraphError, InvalidArgument
from qcwalk.graphs import (EPS_SPEC, build_custom_graph, build_graph, degeneracy_report,
                           graph_from_json, graph_spectrum, laplacian, spectral_decompose)

from conftest import connected_graphs


def test_complete3_edges_and_degrees():
    g = build_graph("complete", 3)
    assert g.edges == {(1, 2), (1, 3), (2, 3)}
    assert list(g.degrees) == [2, 2, 2]


def test_star_centre_is_node_one():
    g = build_graph("star", 5)
    assert list(g.degrees) == [4, 1, 1, 1, 1]


def test_cycle4_edges():
    assert build_graph("cycle", 4).edges == {(1, 2), (2, 3), (3, 4), (1, 4)}


@pytest.mark.parametrize("family,n", [("complete", 1), ("cycle", 2), ("star", 1), ("path", 1)])
def test_too_small(family, n):
    with pytest.raises(InvalidArgument):
        build_graph(family, n)


def test_unknown_family():
    with pytest.raises(InvalidArgument):
        build_graph("wheel", 5)


def test_custom_graphs():
    p2 = build_custom_graph(2, [(1, 2)])
    assert p2.edges == {(1, 2)}
    k4_minus = build_custom_graph(4, [(1, 2), (1, 3), (1, 4), (2, 3)])
    assert list(k4_minus.degrees) == [3, 2, 2, 1]


def test_custom_disconnected_rejected():
    with pytest.raises(GraphError, match="disconnected"):
        build_custom_graph(3, [(1, 2)])


@pytest.mark.parametrize("edges,msg", [
    ([(1, 2), (2, 1)], "duplicate"),
    ([(1, 1), (1, 2)], "self-loop"),
    ([(1, 2), (2, 4)], "outside"),
])
def test_custom_invalid_edges(edges, msg):
    with pytest.raises(GraphError, match=msg):
        build_custom_graph(3, edges)


def test_laplacian_complete_is_nI_minus_J():
    n = 6
    lap = laplacian(build_graph("complete", n))
    np.testing.assert_array_equal(lap, n * np.eye(n) - np.ones((n, n)))


def test_laplacian_cycle():
    n = 7
    lap = laplacian(build_graph("cycle", n))
    assert np.all(np.diag(lap) == 2)
    for j in range(n):
        assert lap[j, (j + 1) % n] == -1 and lap[j, (j - 1) % n] == -1
    assert np.count_nonzero(lap) == 3 * n


def test_laplacian_p2():
    np.testing.assert_array_equal(laplacian(build_custom_graph(2, [(1, 2)])), [[1, -1], [-1, 1]])


def test_spectra_of_named_families():
    np.testing.assert_allclose(graph_spectrum(build_graph("complete", 5)).eigenvalues,
                               [0, 5, 5, 5, 5], atol=1e-12)
    np.testing.assert_allclose(graph_spectrum(build_graph("star", 5)).eigenvalues,
                               [0, 1, 1, 1, 5], atol=1e-12)
    np.testing.assert_allclose(graph_spectrum(build_graph("cycle", 4)).eigenvalues,
                               [0, 2, 2, 4], atol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 8, 11])
def test_cycle_spectrum_matches_cosine_formula(n):
    expected = np.sort([2 * (1 - np.cos(2 * np.pi * k / n)) for k in range(1, n + 1)])
    np.testing.assert_allclose(graph_spectrum(build_graph("cycle", n)).eigenvalues, expected,
                               atol=1e-12)


def test_fiedler_values():
    assert graph_spectrum(build_graph("complete", 5)).fiedler_value == pytest.approx(5)
    assert graph_spectrum(build_graph("star", 6)).fiedler_value == pytest.approx(1)
    assert graph_spectrum(build_graph("cycle", 6)).fiedler_value == pytest.approx(1)


def test_spectral_decompose_rejects_asymmetric():
    with pytest.raises(InvalidArgument):
        spectral_decompose(np.array([[1.0, -1.0], [0.0, 1.0]]))


def test_degeneracy_examples():
    k3 = degeneracy_report(graph_spectrum(build_graph("complete", 3)))
    assert k3.classes == ((1,), (2, 3)) and k3.simple_count == 1
    assert sorted(k3.degenerate_pairs) == [(2, 3), (3, 2)]

    p2 = degeneracy_report(graph_spectrum(build_custom_graph(2, [(1, 2)])))
    assert p2.degenerate_pairs == [] and p2.simple_count == 2

    c5 = degeneracy_report(graph_spectrum(build_graph("cycle", 5)))
    assert [len(c) for c in c5.classes] == [1, 2, 2]
    assert c5.simple_count == 1


def test_min_squared_gap_is_not_always_fiedler_squared():
    # found by enumerating 5-node graphs: eigenvalues 4 and 4.4812 sit closer than 0 and lambda_F
    g = build_custom_graph(5, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5)])
    s = graph_spectrum(g)
    lam = s.eigenvalues
    brute = min((a - b) ** 2 for a in lam for b in lam if abs(a - b) > 1e-9)
    assert s.min_squared_gap() == pytest.approx(brute)
    assert s.min_squared_gap() < s.fiedler_value ** 2


def test_min_squared_gap_named_families_is_fiedler_squared():
    for fam in ("complete", "cycle", "star"):
        s = graph_spectrum(build_graph(fam, 7))
        assert s.min_squared_gap() == pytest.approx(s.fiedler_value ** 2)


@pytest.mark.parametrize("family,lo", [("complete", 3), ("cycle", 3), ("star", 4)])
def test_named_families_are_degenerate(family, lo):
    for n in range(lo, 11):
        assert degeneracy_report(graph_spectrum(build_graph(family, n))).is_degenerate


def test_star3_is_the_nondegenerate_path():
    # leaf eigenvalue 1 has multiplicity n - 2, so n = 3 gives the simple spectrum {0, 1, 3}
    rep = degeneracy_report(graph_spectrum(build_graph("star", 3)))
    assert not rep.is_degenerate


@settings(max_examples=60, deadline=None)
@given(connected_graphs(max_n=9))
def test_laplacian_and_spectrum_invariants(g):
    lap = laplacian(g)
    assert np.all(lap.sum(axis=1) == 0)
    np.testing.assert_array_equal(lap, lap.T)
    np.testing.assert_array_equal(np.diag(lap), g.degrees)
    s = spectral_decompose(lap)
    assert np.all(np.diff(s.eigenvalues) >= 0)
    assert s.reconstruction_error() <= EPS_SPEC
    assert s.orthonormality_error() <= EPS_SPEC
    assert s.eigenvalues[0] >= -EPS_SPEC
    assert np.count_nonzero(np.abs(s.eigenvalues) <= EPS_SPEC) == 1


def test_graph_json_roundtrip():
    assert graph_from_json({"family": "star", "n": 4}) == build_graph("star", 4)
    doc = json.loads(json.dumps(build_graph("cycle", 5).to_json()))
    g = graph_from_json(doc)
    assert g.edges == build_graph("cycle", 5).edges
    assert g.family == "custom"
    with pytest.raises(InvalidArgument):
        graph_from_json({"edges": [[1, 2]]})
