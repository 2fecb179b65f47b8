"""Graph automorphisms and the cycle-type bound on simple Laplacian eigenvalues.

If an automorphism has ``s`` odd cycles and ``t`` even cycles in its
disjoint-cycle decomposition, a connected graph's Laplacian has at most
``s + 2t`` simple eigenvalues. Enumeration is brute force over vertex
permutations that preserve the degree of every node.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import SizeLimitError
from .graphs import EPS_DEG, Graph, Spectrum, degeneracy_report, graph_spectrum

MAX_N = 10
_CHUNK = 200_000


@dataclass(frozen=True)
class AutomorphismReport:
    """All automorphisms of a graph.

    ``perms`` is an (m, n) array of 1-based images: row r maps node j to
    ``perms[r, j-1]``. ``odd``/``even`` hold the per-permutation counts of odd
    and even cycles (fixed points count as odd cycles of length 1).
    """

    n: int
    perms: np.ndarray
    odd: np.ndarray
    even: np.ndarray

    @property
    def count(self) -> int:
        return len(self.perms)

    @property
    def bounds(self) -> np.ndarray:
        return self.odd + 2 * self.even

    @property
    def bound(self) -> int:
        return int(self.bounds.min())

    def cycles(self, r: int) -> list[tuple[int, ...]]:
        """Disjoint-cycle decomposition of permutation ``r`` (1-based labels)."""
        return cycle_decomposition(self.perms[r])


def cycle_decomposition(perm) -> list[tuple[int, ...]]:
    perm = [int(x) for x in perm]
    seen, out = set(), []
    for start in range(1, len(perm) + 1):
        if start in seen:
            continue
        cyc, j = [], start
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j - 1]
        out.append(tuple(cyc))
    return out


def _cycle_type_counts(perms0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised odd/even cycle counts for 0-based permutation rows."""
    m, n = perms0.shape
    rows = np.arange(m)[:, None]
    ident = np.broadcast_to(np.arange(n), (m, n))
    length = np.zeros((m, n), dtype=np.int64)
    cur = ident.copy()
    for k in range(1, n + 1):
        cur = perms0[rows, cur]
        hit = (cur == ident) & (length == 0)
        length[hit] = k
    odd = np.zeros(m, dtype=np.int64)
    even = np.zeros(m, dtype=np.int64)
    for ell in range(1, n + 1):
        # each cycle of length ell contributes ell elements with that length
        cnt = np.count_nonzero(length == ell, axis=1) // ell
        if ell % 2:
            odd += cnt
        else:
            even += cnt
    return odd, even


def _candidate_chunks(degrees: np.ndarray):
    """Yield arrays of 0-based permutations that preserve every node's degree."""
    n = len(degrees)
    classes = [np.flatnonzero(degrees == d) for d in np.unique(degrees)]
    # product over classes; keep the largest class innermost for cheap iteration
    order = sorted(range(len(classes)), key=lambda i: len(classes[i]))
    outer = [list(itertools.permutations(classes[i].tolist())) for i in order[:-1]]
    inner_cls = classes[order[-1]]
    for combo in itertools.product(*outer):
        base = np.empty(n, dtype=np.int64)
        for i, images in zip(order[:-1], combo):
            base[classes[i]] = images
        it = itertools.permutations(inner_cls.tolist())
        while True:
            block = np.fromiter(
                itertools.chain.from_iterable(itertools.islice(it, _CHUNK)),
                dtype=np.int64,
            )
            if block.size == 0:
                break
            block = block.reshape(-1, len(inner_cls))
            out = np.broadcast_to(base, (len(block), n)).copy()
            out[:, inner_cls] = block
            yield out


def enumerate_automorphisms(g: Graph, max_n: int = MAX_N) -> AutomorphismReport:
    if g.n > max_n:
        raise SizeLimitError(
            f"brute-force automorphism search is capped at n={max_n} ({math.factorial(max_n)} "
            f"permutations); graph has n={g.n}"
        )
    a = g.adjacency.astype(bool)
    found = []
    for cand in _candidate_chunks(g.degrees):
        # sigma preserves adjacency iff A[sigma(i), sigma(j)] == A[i, j] for all i, j
        ok = (a[cand[:, :, None], cand[:, None, :]] == a).all(axis=(1, 2))
        if ok.any():
            found.append(cand[ok])
    perms0 = np.concatenate(found)
    odd, even = _cycle_type_counts(perms0)
    perms = (perms0 + 1).astype(np.int8 if g.n < 127 else np.int64)
    return AutomorphismReport(n=g.n, perms=perms, odd=odd, even=even)


@dataclass(frozen=True)
class TheoremVerdict:
    n: int
    simple_count: int
    automorphism_count: int
    bound: int                 # min over automorphisms of s + 2t
    min_margin: int            # min over automorphisms of (s + 2t) - simple_count
    passed: bool
    witness: tuple             # cycle decomposition achieving the tightest bound

    @property
    def forces_degeneracy(self) -> bool:
        """True when the bound alone rules out an all-simple spectrum."""
        return self.bound < self.n

    def to_json(self) -> dict:
        return {
            "simple_count": self.simple_count,
            "automorphism_count": self.automorphism_count,
            "bound": self.bound,
            "min_margin": self.min_margin,
            "passed": self.passed,
            "forces_degeneracy": self.forces_degeneracy,
            "witness": [list(c) for c in self.witness],
        }


def check_simple_eigenvalue_bound(g: Graph, s: Spectrum | None = None, eps_deg: float = EPS_DEG,
                                  max_n: int = MAX_N, report: AutomorphismReport | None = None) -> TheoremVerdict:
    """Check simple_count <= s + 2t for every automorphism of ``g``."""
    s = s if s is not None else graph_spectrum(g)
    simple = degeneracy_report(s, eps_deg).simple_count
    report = report if report is not None else enumerate_automorphisms(g, max_n)
    margins = report.bounds - simple
    r = int(np.argmin(report.bounds))
    return TheoremVerdict(
        n=g.n,
        simple_count=simple,
        automorphism_count=report.count,
        bound=report.bound,
        min_margin=int(margins.min()),
        passed=bool((margins >= 0).all()),
        witness=tuple(report.cycles(r)),
    )
