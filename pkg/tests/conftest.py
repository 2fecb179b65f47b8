import numpy as np
import pytest
from hypothesis import strategies as st

from qcwalk.graphs import build_custom_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n, rank=None):
    """Random full-rank (or given-rank) density matrix."""
    rank = n if rank is None else rank
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho)


@st.composite
def connected_graphs(draw, min_n=2, max_n=7):
    """Random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = set()
    for k in range(2, n + 1):
        parent = draw(st.integers(1, k - 1))
        edges.add((parent, k))
    extra = [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1) if (j, k) not in edges]
    if extra:
        chosen = draw(st.lists(st.sampled_from(extra), unique=True, max_size=len(extra)))
        edges.update(chosen)
    return build_custom_graph(n, sorted(edges))
