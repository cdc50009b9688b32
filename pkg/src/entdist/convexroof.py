"""Mixed-state entanglement distance by convex-roof minimization.

The per-qubit measure extends to density matrices as the minimum of the
ensemble average sum_j p_j E_mu(psi_j) over all realizations of rho as a
mixture of pure states. Realizations are generated from the eigenensemble
through left-isometries parameterized by planar rotations with phases; the
minimization is a multi-started derivative-free simplex over those angles.
The optimizer returns an upper bound on the true roof ("best found").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .qstate import DensityMatrix, PureState

RANK_TOL = 1e-10
MEMBER_PROB_FLOOR = 1e-12
ENSEMBLE_PROB_TOL = 1e-10
ENSEMBLE_RECONSTRUCTION_TOL = 1e-8


@dataclass(frozen=True)
class RoofConfig:
    ensemble_size: int | None = None  # None means rank + 2
    restarts: int = 64
    max_iters: int = 500
    tol: float = 1e-9
    seed: int = 0

    def resolved_size(self, rank: int) -> int:
        n = self.ensemble_size if self.ensemble_size is not None else rank + 2
        if n < rank:
            raise ValueError(f"ensemble_size {n} below the state rank {rank}")
        return n


@dataclass
class Ensemble:
    """Probabilistic mixture {(p_j, psi_j)} realizing a density matrix."""

    probabilities: np.ndarray
    states: list[PureState]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", p)
        if len(p) != len(self.states):
            raise ValueError("probability and state counts differ")
        if p.min() < -ENSEMBLE_PROB_TOL:
            raise ValueError(f"negative ensemble probability {p.min()!r}")
        if abs(p.sum() - 1.0) > ENSEMBLE_PROB_TOL:
            raise ValueError(f"ensemble probabilities sum to {p.sum()!r}")

    def average_matrix(self) -> np.ndarray:
        dim = len(self.states[0].amplitudes)
        rho = np.zeros((dim, dim), dtype=complex)
        for p, psi in zip(self.probabilities, self.states):
            rho += p * np.outer(psi.amplitudes, np.conj(psi.amplitudes))
        return rho

    def reconstructs(self, rho: DensityMatrix, tol: float = ENSEMBLE_RECONSTRUCTION_TOL) -> bool:
        return bool(np.abs(self.average_matrix() - rho.matrix).max() <= tol)


def eigen_decomposition(rho: DensityMatrix, rank_tol: float = RANK_TOL):
    """Eigenvalues (descending, above the rank cut) and matching eigenvectors."""
    evals, evecs = np.linalg.eigh(rho.matrix)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > rank_tol
    return evals[keep], evecs[:, keep]


def givens_unitary(size: int, params: np.ndarray) -> np.ndarray:
    """Unitary from a composition of planar rotations with phases.

    One (angle, phase) pair for each index pair (i, j), so ``params`` has
    length size*(size-1). Column phases are omitted since they act as
    irrelevant member phases.
    """
    expected = size * (size - 1)
    if len(params) != expected:
        raise ValueError(f"need {expected} parameters for size {size}")
    u = np.eye(size, dtype=complex)
    idx = 0
    for i in range(size):
        for j in range(i + 1, size):
            theta, phase = params[idx], params[idx + 1]
            idx += 2
            c, s = math.cos(theta), math.sin(theta)
            a = s * complex(math.cos(phase), math.sin(phase))
            row_i = u[i].copy()
            u[i] = c * row_i - a * u[j]
            u[j] = a.conjugate() * row_i + c * u[j]
    return u


def _member_matrix(rho: DensityMatrix, params: np.ndarray, size: int) -> np.ndarray:
    """Rows are the subnormalized members V diag(sqrt(lambda)) E^T."""
    evals, evecs = eigen_decomposition(rho)
    rank = len(evals)
    isometry = givens_unitary(size, params)[:, :rank]
    return isometry @ (np.sqrt(evals)[:, None] * evecs.T)


def realize_ensemble(
    rho: DensityMatrix, mixing: np.ndarray, ensemble_size: int | None = None
) -> Ensemble:
    """Ensemble from mixing the eigen-realization with an n x r isometry."""
    evals, _ = eigen_decomposition(rho)
    rank = len(evals)
    size = ensemble_size if ensemble_size is not None else rank + 2
    if size < rank:
        raise ValueError(f"ensemble_size {size} below the state rank {rank}")
    members = _member_matrix(rho, np.asarray(mixing, dtype=float), size)
    probs = np.einsum("jk,jk->j", members, np.conj(members)).real
    keep = probs >= MEMBER_PROB_FLOOR
    states = [
        PureState(rho.num_qubits, members[j] / math.sqrt(probs[j]))
        for j in range(size)
        if keep[j]
    ]
    return Ensemble(probs[keep] / probs[keep].sum(), states)


def _batched_single_qubit_ed(members: np.ndarray, probs: np.ndarray, mu: int) -> float:
    """sum_j p_j E_mu(psi_j) from subnormalized member rows.

    With w_j = members[j] (norm^2 = p_j), p_j |b^mu_j|^2 = |<w|sigma_a|w>|^2/p_j,
    so the average is sum_j p_j - sum_j (sum_a <w|sigma_a|w>^2) / p_j.
    """
    lo = 2**mu
    t = members.reshape(len(members), -1, 2, lo)
    t0, t1 = t[:, :, 0, :], t[:, :, 1, :]
    cross = np.einsum("jhl,jhl->j", np.conj(t0), t1)
    pop = np.einsum("jhl,jhl->j", np.conj(t0), t0).real
    sig1 = 2 * cross.real
    sig2 = 2 * cross.imag
    sig3 = 2 * pop - probs
    bloch_sq = sig1**2 + sig2**2 + sig3**2
    safe = np.maximum(probs, MEMBER_PROB_FLOOR)
    return float(probs.sum() - (bloch_sq / safe).sum())


@dataclass
class RoofResult:
    value: float
    eigen_average: float
    restarts: int
    best_restart: int
    converged_values: np.ndarray = field(repr=False, default=None)

    def to_json_dict(self) -> dict:
        return {
            "value": float(self.value),
            "eigen_average_upper_bound": float(self.eigen_average),
            "restarts": int(self.restarts),
            "best_restart": int(self.best_restart),
        }


def mixed_single_qubit_ed(
    rho: DensityMatrix, mu: int, cfg: RoofConfig | None = None
) -> RoofResult:
    """Best-found convex-roof value of the per-qubit ED of a mixed state."""
    if not 0 <= mu < rho.num_qubits:
        raise ValueError(f"qubit index {mu} out of range")
    cfg = cfg or RoofConfig()
    evals, evecs = eigen_decomposition(rho)
    rank = len(evals)
    size = cfg.resolved_size(rank)
    base = np.sqrt(evals)[:, None] * evecs.T

    pad = np.zeros((size, base.shape[1]), dtype=complex)
    pad[:rank] = base

    def objective(params):
        members = givens_unitary(size, params) @ pad
        probs = np.einsum("jk,jk->j", members, np.conj(members)).real
        return _batched_single_qubit_ed(members, probs, mu)

    nparams = size * (size - 1)
    eigen_average = objective(np.zeros(nparams))
    if rank == 1:
        # a pure state has a single realization up to member phases
        return RoofResult(eigen_average, eigen_average, 0, -1, np.array([eigen_average]))

    rng = np.random.default_rng(cfg.seed)
    best_value, best_restart = eigen_average, -1
    values = []
    stalled = 0
    for restart in range(cfg.restarts):
        x0 = rng.uniform(0.0, math.pi, nparams)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": cfg.max_iters,
                "xatol": 1e-10,
                "fatol": cfg.tol * 1e-3,
                "adaptive": True,
            },
        )
        values.append(float(res.fun))
        if res.fun < best_value - 1e-9:
            stalled = 0
        else:
            stalled += 1
        if res.fun < best_value:
            best_value, best_restart = float(res.fun), restart
        # convergence heuristic: a long run of restarts without improvement
        if best_value < cfg.tol or stalled >= 12:
            break
    return RoofResult(
        max(0.0, best_value),
        eigen_average,
        len(values),
        best_restart,
        np.array(values),
    )


@dataclass
class MixedEdResult:
    total: float
    per_qubit: list[RoofResult]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "E": float(self.total),
            "E_mu": [float(r.value) for r in self.per_qubit],
            "per_qubit": [r.to_json_dict() for r in self.per_qubit],
        }


def mixed_ed(rho: DensityMatrix, cfg: RoofConfig | None = None) -> MixedEdResult:
    """Total mixed-state ED: each qubit's roof minimized independently."""
    cfg = cfg or RoofConfig()
    per_qubit = [
        mixed_single_qubit_ed(rho, mu, cfg) for mu in range(rho.num_qubits)
    ]
    return MixedEdResult(sum(r.value for r in per_qubit), per_qubit)
