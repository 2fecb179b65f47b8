"""Fidelity and the quantum-classical (QC) distance between walks.

The QC distance at time t is one minus the smallest fidelity, over walkers
started on a single node, between the classical random-walk distribution and
the noisy quantum state. Fidelity is the Uhlmann form
``F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import (Intrinsic, NoiseModel, Unitary, evolve_nodes,
                       intrinsic_asymptotic, localized_state, maximally_mixed)
from .errors import InvalidArgument, NotConverged
from .graphs import EPS_DEG, Graph, Spectrum, graph_spectrum

PLATEAU_FACTOR = 0.9
PLATEAU_TOL = 1e-3


def _clean_spectrum(lam: np.ndarray) -> np.ndarray:
    """Zero eigenvalues at roundoff level before taking square roots.

    sqrt turns a 1e-17 artefact into a 3e-9 contribution, so anything below the
    usual rank tolerance n * eps * max|lambda| is treated as exactly zero.
    """
    lam = np.asarray(lam)
    floor = lam.shape[-1] * np.finfo(float).eps * np.max(np.abs(lam), axis=-1, keepdims=True)
    return np.where(lam > floor, lam, 0.0)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (v * np.sqrt(_clean_spectrum(lam))) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidArgument(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    r = _psd_sqrt(rho)
    inner = r @ sigma @ r
    lam = _clean_spectrum(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)))
    f = float(np.sum(np.sqrt(lam)) ** 2)
    return min(max(f, 0.0), 1.0)


def classical_fidelity_batch(probs: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """F(diag(p), sigma) for stacks of distributions (..., n) and states (..., n, n).

    With rho diagonal, sqrt(rho) sigma sqrt(rho) is sigma scaled by sqrt(p_i p_j).
    """
    root = np.sqrt(np.clip(probs, 0.0, None))
    inner = root[..., :, None] * sigmas * root[..., None, :]
    inner = 0.5 * (inner + np.swapaxes(inner, -1, -2).conj())
    lam = _clean_spectrum(np.linalg.eigvalsh(inner))
    f = np.sum(np.sqrt(lam), axis=-1) ** 2
    return np.clip(f, 0.0, 1.0)


def classical_distributions(s: Spectrum, nodes: Sequence[int], times) -> np.ndarray:
    """p_kj(t) for each start node j in ``nodes``: shape (len(nodes), T, n)."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise InvalidArgument("times must be >= 0")
    v, lam = s.eigenvectors, s.eigenvalues
    rows = v[[j - 1 for j in nodes], :]                    # <j|lambda_m>
    decay = np.exp(-np.multiply.outer(times, lam))          # (T, m)
    p = np.einsum("km,tm,jm->jtk", v, decay, rows)
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum(axis=-1, keepdims=True)


def representatives(g: Graph) -> tuple[list[int], np.ndarray]:
    """Start nodes that need simulating, and for every node the index of its representative.

    Complete and cycle graphs are node-transitive; the star has two orbits
    (centre 1, leaves 2..n).
    """
    if g.family in ("complete", "cycle"):
        return [1], np.zeros(g.n, dtype=int)
    if g.family == "star":
        return [1, 2], np.array([0] + [1] * (g.n - 1))
    return list(range(1, g.n + 1)), np.arange(g.n)


def node_fidelities(model: NoiseModel, g: Graph, times, s: Spectrum | None = None,
                    nodes: Sequence[int] | None = None, check: bool = True) -> tuple[list[int], np.ndarray]:
    """Fidelity between classical and quantum walks started on each node: (len(nodes), T)."""
    s = s if s is not None else graph_spectrum(g)
    if nodes is None:
        nodes, _ = representatives(g)
    nodes = [int(j) for j in nodes]
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rho_q = evolve_nodes(model, g, nodes, times, s, check=check)
    p_cl = classical_distributions(s, nodes, times)
    return nodes, classical_fidelity_batch(p_cl, rho_q)


@dataclass(frozen=True)
class QCDistanceCurve:
    times: np.ndarray
    per_node_fidelity: np.ndarray     # (T, n), column k-1 for start node k
    value: np.ndarray                 # (T,)
    opt_node: np.ndarray              # (T,) 1-based
    family: str = "custom"

    def node_curve(self, j: int) -> np.ndarray:
        """D_QC(t; j): distance for a walker restricted to start on node ``j``."""
        return 1.0 - self.per_node_fidelity[:, j - 1]

    @property
    def central(self) -> np.ndarray:
        if self.family != "star":
            raise InvalidArgument("central/external split is defined for star graphs")
        return self.node_curve(1)

    @property
    def external(self) -> np.ndarray:
        if self.family != "star":
            raise InvalidArgument("central/external split is defined for star graphs")
        return self.node_curve(2)

    def to_csv(self, per_node: bool = True, header_comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header_comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        n = self.per_node_fidelity.shape[1]
        head = ["t", "d_qc", "opt_node"]
        if per_node:
            head += [f"f_node_{k}" for k in range(1, n + 1)]
        w.writerow(head)
        for i, t in enumerate(self.times):
            row = [_fmt(t), _fmt(self.value[i]), int(self.opt_node[i])]
            if per_node:
                row += [_fmt(x) for x in self.per_node_fidelity[i]]
            w.writerow(row)
        return buf.getvalue()


def _fmt(x) -> str:
    return f"{float(x):.15g}"


def qc_distance_curve(model: NoiseModel, g: Graph, times, s: Spectrum | None = None,
                      check: bool = True) -> QCDistanceCurve:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise InvalidArgument("time grid must be strictly ascending")
    nodes, fill = representatives(g)
    _, fid = node_fidelities(model, g, times, s, nodes, check)
    per_node = fid[fill].T                                  # (T, n)
    opt = np.argmin(per_node, axis=1)
    value = np.clip(1.0 - per_node[np.arange(len(times)), opt], 0.0, 1.0)
    return QCDistanceCurve(times=times, per_node_fidelity=per_node, value=value,
                           opt_node=opt + 1, family=g.family)


@dataclass(frozen=True)
class QCPoint:
    value: float
    opt_node: int
    per_node_fidelity: np.ndarray


def qc_distance_at(model: NoiseModel, g: Graph, t: float, s: Spectrum | None = None,
                   check: bool = True) -> QCPoint:
    if not t >= 0:
        raise InvalidArgument(f"time must be >= 0, got {t}")
    c = qc_distance_curve(model, g, [float(t)], s, check)
    return QCPoint(value=float(c.value[0]), opt_node=int(c.opt_node[0]),
                   per_node_fidelity=c.per_node_fidelity[0])


# --- asymptotes ----------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoteResult:
    family: str
    n: int
    initial_class: str
    value: float

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "initial_class": self.initial_class,
                "value": self.value}


INITIAL_CLASSES = ("any", "central", "external")


def _complete_asymptote(n: int) -> float:
    return 1.0 - (1.0 + math.sqrt(n - 1)) ** 2 / n**2


def asymptotic_qc_distance(family: str, n: int, initial_class: str = "any") -> AsymptoteResult:
    """Closed-form long-time QC distance under energy-basis dephasing."""
    if initial_class not in INITIAL_CLASSES:
        raise InvalidArgument(f"initial_class must be one of {INITIAL_CLASSES}")
    n = int(n)
    if family == "complete":
        if n < 2:
            raise InvalidArgument("complete graph needs n >= 2")
        value = _complete_asymptote(n)
    elif family == "cycle":
        if n < 3:
            raise InvalidArgument("cycle graph needs n >= 3")
        if n % 2 == 0:
            value = 1.0 - (2.0 + (n - 2) / math.sqrt(2)) ** 2 / n**2
        else:
            value = 1.0 - (1.0 + (n - 1) / math.sqrt(2)) ** 2 / n**2
    elif family == "star":
        if n < 2:
            raise InvalidArgument("star graph needs n >= 2")
        if initial_class == "external":
            value = 1.0 - (math.sqrt(n * (n - 2)) + math.sqrt(n - 1) + 1.0) ** 2 / (n**2 * (n - 1))
        else:
            # the centre is the optimal start, giving the complete-graph value
            value = _complete_asymptote(n)
    else:
        raise InvalidArgument(
            f"no closed form for family {family!r}; use numerical_asymptote with an Intrinsic model")
    return AsymptoteResult(family=family, n=n, initial_class=initial_class,
                           value=min(max(value, 0.0), 1.0))


def intrinsic_node_asymptotes(g: Graph, s: Spectrum | None = None, nodes: Sequence[int] | None = None,
                              eps_deg: float = EPS_DEG) -> dict[int, float]:
    """Long-time D_QC(t; j) per start node under energy-basis dephasing (any gamma > 0)."""
    s = s if s is not None else graph_spectrum(g)
    flat = maximally_mixed(g.n)
    nodes = range(1, g.n + 1) if nodes is None else nodes
    return {int(j): 1.0 - fidelity(intrinsic_asymptotic(s, localized_state(g.n, j), eps_deg), flat)
            for j in nodes}


def numerical_asymptote(model: NoiseModel, g: Graph, t_max: float = 200.0, tol: float = PLATEAU_TOL,
                        s: Spectrum | None = None, nodes: Sequence[int] | None = None) -> float:
    """Long-time QC distance.

    Intrinsic: exact stationary map compared against the flat distribution,
    maximised over ``nodes`` (all nodes by default). Position-basis models:
    the distance at ``t_max``, accepted only if it moved less than ``tol``
    since ``0.9 * t_max``.
    """
    s = s if s is not None else graph_spectrum(g)
    if isinstance(model, Intrinsic):
        return max(intrinsic_node_asymptotes(g, s, nodes).values())
    if isinstance(model, Unitary):
        raise InvalidArgument("noiseless dynamics does not settle; no numerical asymptote")
    if nodes is not None:
        raise InvalidArgument("node restriction is supported for Intrinsic only")
    late = qc_distance_at(model, g, t_max, s).value
    early = qc_distance_at(model, g, PLATEAU_FACTOR * t_max, s).value
    if abs(late - early) >= tol:
        raise NotConverged(
            f"{model} on {g.label}: D_QC({t_max:g}) = {late:.6g} vs "
            f"D_QC({PLATEAU_FACTOR * t_max:g}) = {early:.6g}; difference exceeds {tol:g}",
            late=late, early=early)
    return late
