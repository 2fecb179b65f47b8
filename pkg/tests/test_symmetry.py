import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings

from qcwalk.errors import SizeLimitError
from qcwalk.graphs import build_custom_graph, build_graph, graph_spectrum
from qcwalk.symmetry import (check_simple_eigenvalue_bound, cycle_decomposition,
                             enumerate_automorphisms)

from conftest import connected_graphs


def brute_force_automorphisms(g):
    """Every permutation of 1..n, kept if it maps the edge set onto itself."""
    out = []
    for perm in itertools.permutations(range(1, g.n + 1)):
        image = {tuple(sorted((perm[j - 1], perm[k - 1]))) for j, k in g.edges}
        if image == set(g.edges):
            out.append(perm)
    return sorted(out)


def perm_set(report):
    return sorted(tuple(int(x) for x in row) for row in report.perms)


@pytest.mark.parametrize("family,n,count", [
    ("complete", 3, 6), ("star", 4, 6), ("path", 3, 2), ("cycle", 5, 10), ("cycle", 6, 12),
])
def test_automorphism_counts(family, n, count):
    assert enumerate_automorphisms(build_graph(family, n)).count == count


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=6))
def test_matches_unpruned_brute_force(g):
    assert perm_set(enumerate_automorphisms(g)) == brute_force_automorphisms(g)


def test_star4_brute_force_over_24_permutations():
    g = build_graph("star", 4)
    brute = brute_force_automorphisms(g)
    assert len(brute) == 6
    assert all(p[0] == 1 for p in brute)
    assert perm_set(enumerate_automorphisms(g)) == brute


def test_identity_always_present():
    g = build_custom_graph(5, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5)])
    assert (1, 2, 3, 4, 5) in perm_set(enumerate_automorphisms(g))


def test_cycle_counts_match_decomposition():
    rep = enumerate_automorphisms(build_graph("cycle", 6))
    for r in range(rep.count):
        cycles = rep.cycles(r)
        assert rep.odd[r] == sum(1 for c in cycles if len(c) % 2)
        assert rep.even[r] == sum(1 for c in cycles if len(c) % 2 == 0)
        assert sum(len(c) for c in cycles) == 6


def test_cycle_decomposition():
    assert cycle_decomposition([2, 3, 1, 5, 4, 6]) == [(1, 2, 3), (4, 5), (6,)]


@pytest.mark.parametrize("family,n", [("complete", 5), ("cycle", 7), ("star", 6), ("path", 6)])
def test_group_property(family, n):
    rep = enumerate_automorphisms(build_graph(family, n))
    perms = {tuple(int(x) for x in row) for row in rep.perms}
    for a in list(perms)[:40]:
        inv = [0] * n
        for j, aj in enumerate(a, start=1):
            inv[aj - 1] = j
        assert tuple(inv) in perms
        for b in list(perms)[:40]:
            assert tuple(a[b[j] - 1] for j in range(n)) in perms


def test_size_limit():
    with pytest.raises(SizeLimitError):
        enumerate_automorphisms(build_graph("path", 11))
    with pytest.raises(SizeLimitError):
        check_simple_eigenvalue_bound(build_graph("complete", 5), max_n=4)


def test_theorem_c5_rotation_bound_one():
    g = build_graph("cycle", 5)
    v = check_simple_eigenvalue_bound(g, graph_spectrum(g))
    assert v.passed and v.simple_count == 1 and v.bound == 1
    assert len(v.witness) == 1 and len(v.witness[0]) == 5


def test_theorem_k4_four_cycle():
    g = build_graph("complete", 4)
    rep = enumerate_automorphisms(g)
    four_cycles = [r for r in range(rep.count) if rep.odd[r] == 0 and rep.even[r] == 1]
    assert four_cycles
    assert all(rep.bounds[r] == 2 for r in four_cycles)
    v = check_simple_eigenvalue_bound(g, report=rep)
    assert v.simple_count == 1 and v.passed


def test_identity_bound_is_n():
    g = build_graph("path", 5)
    rep = enumerate_automorphisms(g)
    ident = [r for r in range(rep.count) if list(rep.perms[r]) == [1, 2, 3, 4, 5]][0]
    assert rep.odd[ident] == 5 and rep.even[ident] == 0 and rep.bounds[ident] == 5


def test_forces_degeneracy_flag():
    assert check_simple_eigenvalue_bound(build_graph("cycle", 6)).forces_degeneracy
    assert not check_simple_eigenvalue_bound(build_graph("path", 6)).forces_degeneracy


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=7))
def test_theorem_holds_on_random_graphs(g):
    assert check_simple_eigenvalue_bound(g).passed


@pytest.mark.parametrize("family", ["complete", "cycle", "star", "path"])
def test_theorem_all_families_up_to_9(family):
    lo = 3 if family == "cycle" else 2
    for n in range(lo, 10):
        assert check_simple_eigenvalue_bound(build_graph(family, n)).passed


@pytest.mark.slow
@pytest.mark.parametrize("family", ["complete", "cycle", "star", "path"])
def test_theorem_families_at_10(family):
    v = check_simple_eigenvalue_bound(build_graph(family, 10))
    assert v.passed
    expected = {"complete": math.factorial(10), "cycle": 20, "star": math.factorial(9), "path": 2}
    assert v.automorphism_count == expected[family]
