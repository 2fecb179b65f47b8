"""Classical and quantum walk dynamics generated by a graph Laplacian.

Units: hbar = 1 and the hopping rate is 1, so the Hamiltonian is the
Laplacian itself and time is dimensionless.

Superoperators act on column-stacked density matrices:
``vec(rho)[r + s*n] = rho[r, s]``, so ``vec(A X B) = (B.T kron A) vec(X)``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg

from .errors import InvalidArgument, NumericalFailure
from .graphs import EPS_DEG, Graph, Spectrum, degeneracy_report, graph_spectrum, laplacian

EPS_STATE = 1e-8
EPS_PSD = 1e-8
EPS_TRACE = 1e-6
RK4_DT = 1e-3


# --- noise models ------------------------------------------------------------

@dataclass(frozen=True)
class Unitary:
    name = "unitary"

    @property
    def param(self):
        return None


@dataclass(frozen=True)
class Intrinsic:
    """Dephasing in the energy (Laplacian) eigenbasis at rate ``gamma``."""

    gamma: float
    name = "intrinsic"

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InvalidArgument(f"gamma must be finite and >= 0, got {self.gamma}")

    @property
    def param(self):
        return self.gamma


@dataclass(frozen=True)
class HakenStrobl:
    """Site-basis dephasing with projector jump operators at rate ``gamma``."""

    gamma: float
    name = "haken_strobl"

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InvalidArgument(f"gamma must be finite and >= 0, got {self.gamma}")

    @property
    def param(self):
        return self.gamma


@dataclass(frozen=True)
class QSW:
    """Quantum stochastic walk mixing coherent (p=0) and classical (p=1) hopping."""

    p: float
    name = "qsw"

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise InvalidArgument(f"p must lie in [0, 1], got {self.p}")

    @property
    def param(self):
        return self.p


NoiseModel = Union[Unitary, Intrinsic, HakenStrobl, QSW]

_MODEL_ALIASES = {
    "unitary": "unitary", "noiseless": "unitary",
    "intrinsic": "intrinsic",
    "haken_strobl": "haken_strobl", "hakenstrobl": "haken_strobl", "hs": "haken_strobl",
    "qsw": "qsw",
}


def make_model(kind: str, value: float | None = None) -> NoiseModel:
    key = _MODEL_ALIASES.get(str(kind).lower().replace("-", "_"))
    if key is None:
        raise InvalidArgument(f"unknown noise model {kind!r}")
    if key == "unitary":
        return Unitary()
    if value is None:
        raise InvalidArgument(f"model {key} needs a parameter")
    value = float(value)
    return {"intrinsic": Intrinsic, "haken_strobl": HakenStrobl, "qsw": QSW}[key](value)


def model_label(model: NoiseModel) -> str:
    if isinstance(model, Unitary):
        return "unitary"
    key = "p" if isinstance(model, QSW) else "gamma"
    return f"{model.name}_{key}{model.param:g}"


# --- states --------------------------------------------------------------------

def localized_state(n: int, j: int) -> np.ndarray:
    """|j><j| for 1-based node ``j``."""
    if not 1 <= j <= n:
        raise InvalidArgument(f"node {j} outside 1..{n}")
    rho = np.zeros((n, n), dtype=complex)
    rho[j - 1, j - 1] = 1.0
    return rho


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def state_errors(rho: np.ndarray) -> tuple[float, float, float]:
    """(Hermiticity error, trace error, minimum eigenvalue)."""
    rho = np.asarray(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho) - 1.0))
    lam_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return herm, tr, lam_min


def check_state(rho: np.ndarray, eps_state: float = EPS_STATE, eps_psd: float = EPS_PSD,
                eps_trace: float | None = None, context: str = "") -> None:
    """Raise NumericalFailure if ``rho`` is not a valid density matrix."""
    herm, tr, lam_min = state_errors(rho)
    eps_trace = eps_state if eps_trace is None else eps_trace
    problems = []
    if herm > eps_state:
        problems.append(f"hermiticity error {herm:.3e}")
    if tr > eps_trace:
        problems.append(f"trace drift {tr:.3e}")
    if lam_min < -eps_psd:
        problems.append(f"negative eigenvalue {lam_min:.3e}")
    if problems:
        where = f" ({context})" if context else ""
        raise NumericalFailure("invalid density matrix" + where + ": " + ", ".join(problems))


def hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + np.swapaxes(rho, -1, -2).conj())


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


# --- classical walk ------------------------------------------------------------

def _check_time(t: float) -> float:
    t = float(t)
    if not t >= 0 or not math.isfinite(t):
        raise InvalidArgument(f"time must be finite and >= 0, got {t}")
    return t


def classical_propagator(s: Spectrum, t: float) -> np.ndarray:
    """Column-stochastic matrix P with P[k, j] = probability j -> k after time t."""
    t = _check_time(t)
    v, lam = s.eigenvectors, s.eigenvalues
    p = (v * np.exp(-lam * t)) @ v.T
    p = np.clip(p, 0.0, 1.0)
    return p / p.sum(axis=0, keepdims=True)


def classical_evolve(s: Spectrum, j: int, t: float) -> np.ndarray:
    if not 1 <= j <= s.n:
        raise InvalidArgument(f"node {j} outside 1..{s.n}")
    return classical_propagator(s, t)[:, j - 1]


# --- energy-basis dynamics (closed form) ---------------------------------------

def _to_eigenbasis(s: Spectrum, rho: np.ndarray) -> np.ndarray:
    v = s.eigenvectors
    return v.T @ rho @ v


def _from_eigenbasis(s: Spectrum, rho_e: np.ndarray) -> np.ndarray:
    v = s.eigenvectors
    return v @ rho_e @ v.T


def intrinsic_evolve(s: Spectrum, rho0: np.ndarray, t: float, gamma: float) -> np.ndarray:
    """Closed-form solution of the energy-basis dephasing master equation.

    Eigenbasis element (n, p) picks up exp(-i w t - gamma w**2 t / 2) with
    w = lambda_n - lambda_p.
    """
    t = _check_time(t)
    if gamma < 0:
        raise InvalidArgument(f"gamma must be >= 0, got {gamma}")
    w = s.eigenvalues[:, None] - s.eigenvalues[None, :]
    damp = np.exp(-1j * w * t - 0.5 * gamma * w**2 * t)
    return hermitize(_from_eigenbasis(s, _to_eigenbasis(s, rho0) * damp))


def unitary_evolve(s: Spectrum, rho0: np.ndarray, t: float) -> np.ndarray:
    return intrinsic_evolve(s, rho0, t, 0.0)


def intrinsic_evolve_many(s: Spectrum, rho0: np.ndarray, times: Sequence[float], gamma: float) -> np.ndarray:
    """intrinsic_evolve on a whole time grid, shape (len(times), n, n)."""
    times = np.asarray(times, dtype=float)
    w = s.eigenvalues[:, None] - s.eigenvalues[None, :]
    damp = np.exp(np.multiply.outer(times, -1j * w - 0.5 * gamma * w**2))
    v = s.eigenvectors
    out = np.einsum("ab,tbc,dc->tad", v, _to_eigenbasis(s, rho0)[None] * damp, v)
    return hermitize(out)


def intrinsic_asymptotic(s: Spectrum, rho0: np.ndarray, eps_deg: float = EPS_DEG) -> np.ndarray:
    """Long-time limit of energy-basis dephasing: keep only equal-eigenvalue blocks."""
    cls = degeneracy_report(s, eps_deg).class_of()
    mask = cls[:, None] == cls[None, :]
    return hermitize(_from_eigenbasis(s, _to_eigenbasis(s, rho0) * mask))


def quadrature_order(s: Spectrum, t: float, gamma: float) -> int:
    """Gauss-Hermite order that resolves the fastest Bohr frequency at this width.

    The oscillation exp(-i w y) becomes exp(-i a x) on the Hermite variable with
    a = w_max * sqrt(2 gamma t); the rule reproduces its Gaussian average once
    n exceeds roughly a**2 / 4.
    """
    w_max = float(s.eigenvalues[-1] - s.eigenvalues[0])
    a2 = 2.0 * gamma * t * w_max**2
    return max(64, int(math.ceil(a2 / 4.0)) + 32)


def intrinsic_evolve_quadrature(s: Spectrum, rho0: np.ndarray, t: float, gamma: float,
                                n_points: int | None = None) -> np.ndarray:
    """Gaussian time-average of the unitary evolution, by Gauss-Hermite quadrature.

    Averages U(t + y) rho0 U(t + y)^dagger over y ~ Normal(0, gamma * t).
    Independent of ``intrinsic_evolve``: no damping factor is formed, each node
    of the rule is a plain unitary propagation. ``n_points=None`` picks the
    order from ``quadrature_order``.
    """
    if n_points is None:
        n_points = quadrature_order(s, t, gamma)
    if n_points < 2:
        raise InvalidArgument(f"n_points must be >= 2, got {n_points}")
    if not (t > 0 and gamma > 0):
        raise InvalidArgument("quadrature form needs t > 0 and gamma > 0")
    x, wts = np.polynomial.hermite.hermgauss(n_points)
    sigma = math.sqrt(gamma * t)
    v, lam = s.eigenvectors, s.eigenvalues
    out = np.zeros_like(rho0, dtype=complex)
    for xi, wi in zip(x, wts):
        tau = t + math.sqrt(2.0) * sigma * xi
        u = (v * np.exp(-1j * lam * tau)) @ v.T
        out += wi * (u @ rho0 @ u.conj().T)
    return hermitize(out / math.sqrt(math.pi))


# --- Lindblad generators ---------------------------------------------------------

def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n, order="F")


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i [h, rho]."""
    n = h.shape[0]
    eye = np.eye(n)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superop(a: np.ndarray) -> np.ndarray:
    """Superoperator of D[a] rho = a rho a^dag - {a^dag a, rho} / 2."""
    n = a.shape[0]
    eye = np.eye(n)
    ada = a.conj().T @ a
    return np.kron(a.conj(), a) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye)


def _add_rank_one_dissipator(m: np.ndarray, n: int, k: int, j: int, weight: float) -> None:
    """In place: m += weight * superop of D[|k><j|] (0-based k, j)."""
    m[k + k * n, j + j * n] += weight
    rows = j + np.arange(n) * n          # elements (j, s)
    cols = np.arange(n) + j * n          # elements (r, j)
    m[rows, rows] -= 0.5 * weight
    m[cols, cols] -= 0.5 * weight


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    n: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.n)


def build_liouvillian(model: NoiseModel, g: Graph, s: Spectrum | None = None) -> Liouvillian:
    """Generator matrix M with d vec(rho)/dt = M vec(rho).

    Intrinsic is supported as a cross-check: -(gamma/2)[L,[L,rho]] is the
    dissipator D[L] at rate gamma.
    """
    lap = s.laplacian if s is not None else laplacian(g)
    n = lap.shape[0]
    if isinstance(model, Unitary):
        raise InvalidArgument("unitary dynamics has no dissipator; use unitary_evolve")
    if isinstance(model, HakenStrobl):
        m = commutator_superop(lap)
        for k in range(n):
            _add_rank_one_dissipator(m, n, k, k, model.gamma)
    elif isinstance(model, QSW):
        m = (1.0 - model.p) * commutator_superop(lap)
        for k, j in zip(*np.nonzero(lap)):
            _add_rank_one_dissipator(m, n, k, j, model.p * lap[k, j] ** 2)
    elif isinstance(model, Intrinsic):
        m = commutator_superop(lap) + model.gamma * dissipator_superop(lap.astype(complex))
    else:
        raise InvalidArgument(f"unsupported model {model!r}")
    m.setflags(write=False)
    return Liouvillian(matrix=m, n=n)


def haken_strobl_rhs(lap: np.ndarray, rho: np.ndarray, gamma: float) -> np.ndarray:
    """Node-basis form: -i[L, rho] - gamma (J - I) o rho."""
    off = np.ones_like(rho) - np.eye(rho.shape[0])
    return -1j * (lap @ rho - rho @ lap) - gamma * off * rho


# --- integration -----------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray   # (T, n, n) complex

    def populations(self) -> np.ndarray:
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    def to_json(self) -> str:
        return json.dumps({
            "times": [float(t) for t in self.times],
            "states": [[[[float(z.real), float(z.imag)] for z in row] for row in rho]
                       for rho in self.states],
        })

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.states.shape[1]
        w.writerow(["t"] + [f"p_node_{k}" for k in range(1, n + 1)])
        for t, pops in zip(self.times, self.populations()):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in pops])
        return buf.getvalue()


def _check_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidArgument("time grid must be a non-empty 1-d sequence")
    if times[0] != 0.0:
        raise InvalidArgument(f"time grid must start at 0, got {times[0]}")
    if np.any(np.diff(times) <= 0):
        raise InvalidArgument("time grid must be strictly ascending")
    return times


def propagator(gen: Liouvillian, dt: float) -> np.ndarray:
    """expm(M dt) by scaling and squaring."""
    p = scipy.linalg.expm(gen.matrix * dt)
    if not np.all(np.isfinite(p)):
        raise NumericalFailure(f"matrix exponential is not finite for dt={dt}")
    return p


def _interval_propagators(gen: Liouvillian, times: np.ndarray) -> list[np.ndarray]:
    steps = np.diff(times)
    cache = {}
    out = []
    for h in steps:
        key = round(float(h), 12)
        if key not in cache:
            cache[key] = propagator(gen, float(h))
        out.append(cache[key])
    return out


def _validate_batch(states: np.ndarray, context: str) -> None:
    n = states.shape[-1]
    flat = states.reshape(-1, n, n)
    tr = np.abs(np.real(np.trace(flat, axis1=1, axis2=2)) - 1.0)
    if tr.max() > EPS_TRACE:
        i = int(tr.argmax())
        raise NumericalFailure(f"trace drift {tr[i]:.3e} exceeds {EPS_TRACE:g} ({context}, state {i})")
    lam_min = np.linalg.eigvalsh(flat)[:, 0]
    if lam_min.min() < -EPS_PSD:
        i = int(lam_min.argmin())
        raise NumericalFailure(f"negative eigenvalue {lam_min[i]:.3e} ({context}, state {i})")


def lindblad_evolve_batch(model: NoiseModel, g: Graph, rho0s: np.ndarray, times,
                          s: Spectrum | None = None, check: bool = True) -> np.ndarray:
    """Propagate several initial states together; returns (B, T, n, n)."""
    times = _check_grid(times)
    gen = build_liouvillian(model, g, s)
    n = gen.n
    rho0s = np.asarray(rho0s, dtype=complex)
    b = rho0s.shape[0]
    cur = rho0s.transpose(1, 2, 0).reshape(n * n, b, order="F")
    out = np.empty((len(times), n * n, b), dtype=complex)
    out[0] = cur
    for i, prop in enumerate(_interval_propagators(gen, times), start=1):
        cur = prop @ cur
        mats = cur.reshape(n, n, b, order="F")
        mats = 0.5 * (mats + mats.transpose(1, 0, 2).conj())
        cur = mats.reshape(n * n, b, order="F")
        out[i] = cur
    states = out.reshape(len(times), n, n, b, order="F").transpose(3, 0, 1, 2)
    # out[t][r + s*n, b] -> rho[b, t, r, s]
    states = np.ascontiguousarray(states)
    if check:
        _validate_batch(states, f"{model_label(model)} on {g.label}")
    return states


def lindblad_evolve(model: NoiseModel, g: Graph, rho0: np.ndarray, times,
                    s: Spectrum | None = None, check: bool = True) -> Trajectory:
    times = _check_grid(times)
    states = lindblad_evolve_batch(model, g, np.asarray(rho0)[None], times, s, check)[0]
    return Trajectory(times=times, states=states)


def rk4_evolve(model: NoiseModel, g: Graph, rho0: np.ndarray, times, dt: float = RK4_DT,
               s: Spectrum | None = None) -> Trajectory:
    """Fixed-step RK4 on the same generator; an independent check of the expm path."""
    times = _check_grid(times)
    gen = build_liouvillian(model, g, s)
    m, n = gen.matrix, gen.n
    y = vec(np.asarray(rho0, dtype=complex))
    states = [unvec(y, n).copy()]
    for a, b in zip(times[:-1], times[1:]):
        k = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        h = (b - a) / k
        for _ in range(k):
            k1 = m @ y
            k2 = m @ (y + 0.5 * h * k1)
            k3 = m @ (y + 0.5 * h * k2)
            k4 = m @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states.append(unvec(y, n).copy())
    return Trajectory(times=times, states=np.array(states))


def stationary_check(model: NoiseModel, g: Graph, rho: np.ndarray, s: Spectrum | None = None) -> float:
    """max |M vec(rho)|; zero for a stationary state."""
    gen = build_liouvillian(model, g, s)
    return float(np.max(np.abs(gen.matrix @ vec(rho))))


# --- model dispatch --------------------------------------------------------------

def evolve_nodes(model: NoiseModel, g: Graph, nodes: Sequence[int], times,
                 s: Spectrum | None = None, check: bool = True) -> np.ndarray:
    """Quantum states for walkers started on each of ``nodes``: (len(nodes), T, n, n)."""
    s = s if s is not None else graph_spectrum(g)
    times = np.asarray(times, dtype=float)
    rho0s = np.array([localized_state(g.n, j) for j in nodes])
    if isinstance(model, (Unitary, Intrinsic)):
        gamma = 0.0 if isinstance(model, Unitary) else model.gamma
        if np.any(times < 0):
            raise InvalidArgument("times must be >= 0")
        out = np.array([intrinsic_evolve_many(s, r, times, gamma) for r in rho0s])
        if check:
            _validate_batch(out, f"{model_label(model)} on {g.label}")
        return out
    on_grid = times.size > 1 and times[0] == 0.0 and np.all(np.diff(times) > 0)
    if on_grid:
        return lindblad_evolve_batch(model, g, rho0s, times, s, check)
    # arbitrary time points: one exponential per requested time
    gen = build_liouvillian(model, g, s)
    n = gen.n
    cols = rho0s.transpose(1, 2, 0).reshape(n * n, -1, order="F")
    out = []
    for t in times:
        st = (propagator(gen, _check_time(t)) @ cols).reshape(n, n, -1, order="F")
        out.append(hermitize(st.transpose(2, 0, 1)))
    states = np.stack(out, axis=1)
    if check:
        _validate_batch(states, f"{model_label(model)} on {g.label}")
    return states
