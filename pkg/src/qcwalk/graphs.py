"""Graphs, Laplacians and Laplacian spectra.

Node labels are 1-based everywhere a caller can see them; arrays are indexed
from 0 internally, so node ``j`` lives in row/column ``j - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import GraphError, InvalidArgument, NumericalFailure

FAMILIES = ("complete", "cycle", "star", "path")
MIN_NODES = {"complete": 2, "cycle": 3, "star": 2, "path": 2}

EPS_DEG = 1e-9
EPS_SPEC = 1e-10


@dataclass(frozen=True)
class Graph:
    """Undirected simple connected graph on nodes 1..n.

    ``edges`` holds each edge once as ``(j, k)`` with ``j < k``.
    """

    n: int
    edges: frozenset
    family: str = "custom"

    @property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for j, k in self.edges:
            a[j - 1, k - 1] = a[k - 1, j - 1] = 1.0
        return a

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def has_edge(self, j: int, k: int) -> bool:
        return (min(j, k), max(j, k)) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @property
    def label(self) -> str:
        if self.family == "custom":
            return f"custom{self.n}"
        return f"{self.family}{self.n}"

    def to_json(self) -> dict:
        return {"n": self.n, "family": self.family, "edges": [list(e) for e in self.sorted_edges()]}


def _normalize_edges(n: int, edge_list: Iterable) -> frozenset:
    seen = set()
    for e in edge_list:
        e = tuple(e)
        if len(e) != 2:
            raise GraphError(f"edge {e!r} does not have two endpoints")
        j, k = (int(x) for x in e)
        if not (1 <= j <= n and 1 <= k <= n):
            raise GraphError(f"edge ({j}, {k}) has a label outside 1..{n}")
        if j == k:
            raise GraphError(f"self-loop at node {j}")
        key = (min(j, k), max(j, k))
        if key in seen:
            raise GraphError(f"duplicate edge ({j}, {k})")
        seen.add(key)
    return frozenset(seen)


def _check_connected(n: int, edges: frozenset) -> None:
    a = np.zeros((n, n))
    for j, k in edges:
        a[j - 1, k - 1] = a[k - 1, j - 1] = 1
    ncomp, labels = connected_components(a, directed=False)
    if ncomp > 1:
        groups = [sorted(int(i) + 1 for i in np.flatnonzero(labels == c)) for c in range(ncomp)]
        raise GraphError(f"graph is disconnected: {ncomp} components {groups}")


def build_custom_graph(n: int, edge_list: Iterable, family: str = "custom") -> Graph:
    """Validate an explicit edge list and return the graph.

    Raises GraphError for self-loops, duplicates, out-of-range labels or a
    disconnected result.
    """
    n = int(n)
    if n < 2:
        raise GraphError(f"need at least 2 nodes, got {n}")
    edges = _normalize_edges(n, edge_list)
    _check_connected(n, edges)
    return Graph(n=n, edges=edges, family=family)


def build_graph(family: str, n: int) -> Graph:
    """Named graph families.

    Conventions: the star has its centre at node 1; in the cycle node j is
    adjacent to j +/- 1 (mod n); the path is 1-2-...-n.
    """
    if family not in FAMILIES:
        raise InvalidArgument(f"unknown family {family!r}; expected one of {FAMILIES}")
    n = int(n)
    if n < MIN_NODES[family]:
        raise InvalidArgument(f"{family} graph needs n >= {MIN_NODES[family]}, got {n}")
    if family == "complete":
        edges = [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)]
    elif family == "cycle":
        edges = [(j, j % n + 1) for j in range(1, n + 1)]
    elif family == "star":
        edges = [(1, k) for k in range(2, n + 1)]
    else:
        edges = [(j, j + 1) for j in range(1, n)]
    return build_custom_graph(n, edges, family=family)


def graph_from_json(doc: dict) -> Graph:
    """Accepts ``{"family": ..., "n": ...}`` or ``{"n": ..., "edges": [[j, k], ...]}``."""
    if not isinstance(doc, dict) or "n" not in doc:
        raise InvalidArgument("graph description must be an object with an 'n' field")
    if "edges" in doc:
        # family tags drive symmetry shortcuts, so explicit edge lists stay "custom"
        return build_custom_graph(doc["n"], doc["edges"])
    if "family" in doc:
        return build_graph(doc["family"], doc["n"])
    raise InvalidArgument("graph description needs either 'family' or 'edges'")


def laplacian(g: Graph) -> np.ndarray:
    """L = D - A as a float array (entries are exact integers)."""
    a = g.adjacency
    lap = np.diag(a.sum(axis=1)) - a
    lap.setflags(write=False)
    return lap


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Laplacian, eigenvalues ascending.

    Column ``i`` of ``eigenvectors`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    laplacian: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def fiedler_value(self) -> float:
        scale = max(1.0, float(self.eigenvalues[-1]))
        positive = self.eigenvalues[self.eigenvalues > EPS_DEG * scale]
        if positive.size == 0:
            raise NumericalFailure("spectrum has no strictly positive eigenvalue")
        return float(positive[0])

    def reconstruction_error(self) -> float:
        v, lam = self.eigenvectors, self.eigenvalues
        return float(np.max(np.abs(v @ np.diag(lam) @ v.T - self.laplacian)))

    def orthonormality_error(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.T @ v - np.eye(self.n))))

    def min_squared_gap(self, eps_deg: float = EPS_DEG) -> float:
        """Smallest nonzero (lambda_n - lambda_p)**2 over all eigenvalue pairs."""
        lam = self.eigenvalues
        tol = eps_deg * max(1.0, float(lam[-1]))
        diffs = np.abs(lam[:, None] - lam[None, :])
        nonzero = diffs[diffs > tol]
        return float(np.min(nonzero) ** 2) if nonzero.size else 0.0


def spectral_decompose(lap: np.ndarray) -> Spectrum:
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise InvalidArgument(f"Laplacian must be square, got shape {lap.shape}")
    if not np.allclose(lap, lap.T, atol=0):
        raise InvalidArgument("Laplacian is not symmetric")
    try:
        lam, vec = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(vec))):
        raise NumericalFailure("eigensolver returned non-finite values")
    lam.setflags(write=False)
    vec.setflags(write=False)
    return Spectrum(eigenvalues=lam, eigenvectors=vec, laplacian=lap)


def graph_spectrum(g: Graph) -> Spectrum:
    return spectral_decompose(laplacian(g))


@dataclass(frozen=True)
class DegeneracyReport:
    classes: tuple          # tuple of tuples of 1-based eigenvalue indices
    values: tuple           # representative (mean) eigenvalue per class

    @property
    def simple_count(self) -> int:
        return sum(1 for c in self.classes if len(c) == 1)

    @property
    def degenerate_pairs(self) -> list[tuple[int, int]]:
        return [(a, b) for c in self.classes for a in c for b in c if a != b]

    @property
    def is_degenerate(self) -> bool:
        return any(len(c) > 1 for c in self.classes)

    def class_of(self) -> np.ndarray:
        """Class id per (0-based) eigenvalue index."""
        out = np.empty(sum(len(c) for c in self.classes), dtype=int)
        for cid, c in enumerate(self.classes):
            out[[i - 1 for i in c]] = cid
        return out

    def to_json(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "values": [float(v) for v in self.values],
            "simple_count": self.simple_count,
            "degenerate": self.is_degenerate,
        }


def degeneracy_report(s: Spectrum, eps_deg: float = EPS_DEG) -> DegeneracyReport:
    """Group ascending eigenvalues whose neighbours differ by at most eps_deg * max(1, lambda_max).

    Neighbour chaining is used, so a class is a maximal run of close values.
    """
    lam = np.asarray(s.eigenvalues)
    tol = eps_deg * max(1.0, float(lam[-1]))
    classes, current = [], [0]
    for i in range(1, len(lam)):
        if lam[i] - lam[i - 1] <= tol:
            current.append(i)
        else:
            classes.append(current)
            current = [i]
    classes.append(current)
    return DegeneracyReport(
        classes=tuple(tuple(i + 1 for i in c) for c in classes),
        values=tuple(float(np.mean(lam[c])) for c in classes),
    )
