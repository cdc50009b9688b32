"""Projective Fubini-Study metric restricted to local rotations.

For a pure state and a frame of unit 3-vectors v = (v^0, ..., v^{M-1}), the
metric tensor is

    g_mn(psi, v) = <sigma_v^m sigma_v^n> - <sigma_v^m><sigma_v^n>,

its trace is minimized by aligning each v^m with the qubit's Bloch vector,
and the minimum is the entanglement distance E = M - sum_m |b^m|^2. The
metric evaluated at that optimal frame is the entanglement metric (EM).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas

from . import qstate
from .qstate import PureState, apply_pauli_axis, bloch_vector, fs_distance_sq

DEGENERACY_THRESHOLD = 1e-9
FRAME_UNIT_TOL = 1e-12
DEFAULT_BLOCK_TOL = 1e-8


def validate_frame(frame, num_qubits: int) -> np.ndarray:
    """Check an (M, 3) array of unit vectors and return it as float64."""
    v = np.asarray(frame, dtype=float)
    if v.shape != (num_qubits, 3):
        raise ValueError(
            f"frame shape {v.shape} does not match {num_qubits} qubits"
        )
    norms = np.linalg.norm(v, axis=1)
    if np.abs(norms - 1.0).max() > FRAME_UNIT_TOL:
        raise ValueError("frame vectors must be unit length within 1e-12")
    return v


def _all_bloch_vectors(state: PureState) -> np.ndarray:
    return np.stack(
        [bloch_vector(state, mu) for mu in range(state.num_qubits)]
    )


def _conjugate_gram(state: PureState, frame: np.ndarray) -> np.ndarray:
    """Real Gram matrix <sigma_v^m psi | sigma_v^n psi> for all qubit pairs.

    Built row-contiguous and fed to BLAS herk through the transposed view;
    this is the dominant cost at large M.
    """
    m = state.num_qubits
    phi = np.empty((m, 2**m), dtype=complex)
    for mu in range(m):
        lo = 2**mu
        np.matmul(
            qstate.pauli_axis_matrix(frame[mu])[None, :, :],
            state.amplitudes.reshape(-1, 2, lo),
            out=phi[mu].reshape(-1, 2, lo),
        )
    g = blas.zherk(1.0, phi.T, trans=2, lower=0)
    g = g + np.triu(g, 1).conj().T
    return g.real


def metric_tensor(state: PureState, frame) -> np.ndarray:
    """Metric tensor g(psi, v), an MxM real symmetric matrix.

    Diagonal entries are 1 - (v^m . b^m)^2; off-diagonal entries are the
    two-qubit correlator minus the product of the axis projections.
    """
    v = validate_frame(frame, state.num_qubits)
    bloch = _all_bloch_vectors(state)
    proj = np.einsum("mk,mk->m", v, bloch)
    g = _conjugate_gram(state, v) - np.outer(proj, proj)
    np.fill_diagonal(g, 1.0 - proj**2)
    return g


def metric_trace(state: PureState, frame) -> float:
    """tr g(psi, v) = sum_m [1 - (v^m . b^m)^2], without forming the matrix."""
    v = validate_frame(frame, state.num_qubits)
    bloch = _all_bloch_vectors(state)
    proj = np.einsum("mk,mk->m", v, bloch)
    return float(state.num_qubits - (proj**2).sum())


def optimal_frame(state: PureState):
    """Trace-minimizing frame b^m/|b^m| and the list of degenerate qubits.

    Qubits whose Bloch vector vanishes (norm below 1e-9) get the
    conventional axis (0, 0, 1) and are flagged; their diagonal metric entry
    is 1 regardless of the choice.
    """
    bloch = _all_bloch_vectors(state)
    norms = np.linalg.norm(bloch, axis=1)
    degenerate = [int(i) for i in np.nonzero(norms <= DEGENERACY_THRESHOLD)[0]]
    frame = np.zeros_like(bloch)
    for mu in range(state.num_qubits):
        if norms[mu] > DEGENERACY_THRESHOLD:
            frame[mu] = bloch[mu] / norms[mu]
        else:
            frame[mu] = (0.0, 0.0, 1.0)
    return frame, degenerate


@dataclass
class EdReport:
    """Entanglement distance of a pure state with its per-qubit breakdown.

    ``em`` is the metric at the optimal frame (None when skipped for speed);
    off-diagonal EM entries on degenerate qubits depend on the conventional
    frame choice, so the flags travel with the report.
    """

    total: float
    per_qubit: np.ndarray
    frame: np.ndarray
    em: np.ndarray | None
    degenerate_qubits: list[int] = field(default_factory=list)

    @property
    def num_qubits(self) -> int:
        return len(self.per_qubit)

    @property
    def per_qubit_average(self) -> float:
        return self.total / self.num_qubits

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "E": float(self.total),
            "E_mu": [float(x) for x in self.per_qubit],
            "frame": [[float(c) for c in v] for v in self.frame],
            "em": None
            if self.em is None
            else [[float(x) for x in row] for row in self.em],
            "degenerate": list(self.degenerate_qubits),
        }


def entanglement_distance(state: PureState, include_em: bool = True) -> EdReport:
    """Entanglement distance E = M - sum_m |b^m|^2 and the EM at the optimal frame."""
    bloch = _all_bloch_vectors(state)
    norms_sq = np.einsum("mk,mk->m", bloch, bloch)
    per_qubit = 1.0 - norms_sq
    norms = np.sqrt(norms_sq)
    degenerate = [int(i) for i in np.nonzero(norms <= DEGENERACY_THRESHOLD)[0]]
    frame = np.where(
        norms[:, None] > DEGENERACY_THRESHOLD,
        bloch / np.maximum(norms, DEGENERACY_THRESHOLD)[:, None],
        np.array([0.0, 0.0, 1.0]),
    )
    em = None
    if include_em:
        proj = np.einsum("mk,mk->m", frame, bloch)
        em = _conjugate_gram(state, frame) - np.outer(proj, proj)
        np.fill_diagonal(em, per_qubit)
    return EdReport(
        total=float(per_qubit.sum()),
        per_qubit=per_qubit,
        frame=frame,
        em=em,
        degenerate_qubits=degenerate,
    )


def single_qubit_ed_via_purity(state: PureState, mu: int) -> float:
    """Per-qubit ED through the marginal purity, 2(1 - tr rho_mu^2).

    Independent route from the Bloch-norm formula; the two must agree to
    1e-10 on any state.
    """
    if not 0 <= mu < state.num_qubits:
        raise ValueError(f"qubit index {mu} out of range")
    lo = 2**mu
    t = state.amplitudes.reshape(-1, 2, lo)
    rho = np.einsum("hal,hbl->ab", t, np.conj(t))
    return float(2.0 * (1.0 - np.real(np.trace(rho @ rho))))


def conjugate_distance_sum(state: PureState, frame) -> float:
    """Sum over qubits of the squared FS distance to the v-conjugate states.

    Equals tr g(psi, v): the finite-distance route to the same quantity.
    """
    v = validate_frame(frame, state.num_qubits)
    total = 0.0
    for mu in range(state.num_qubits):
        conj = apply_pauli_axis(state, mu, v[mu])
        total += fs_distance_sq(state, conj)
    return total


def concurrence_2q(state: PureState) -> float:
    """Concurrence C = 2|w_0 w_3 - w_1 w_2| of a two-qubit pure state."""
    if state.num_qubits != 2:
        raise ValueError(
            f"concurrence is defined for 2 qubits, got {state.num_qubits}"
        )
    w = state.amplitudes
    return float(2.0 * abs(w[0] * w[3] - w[1] * w[2]))


def block_structure(em, tol: float = DEFAULT_BLOCK_TOL) -> list[list[int]]:
    """Partition qubits into the connected blocks of the metric's zero pattern.

    Two qubits are linked when |g_mn| > tol; the number of blocks upper-bounds
    the separability structure of the state.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    g = np.asarray(em, dtype=float)
    m = g.shape[0]
    adj = np.abs(g) > tol
    seen = [False] * m
    blocks = []
    for start in range(m):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(m):
                if j != i and adj[i, j] and not seen[j]:
                    seen[j] = True
                    stack.append(j)
        blocks.append(sorted(comp))
    return sorted(blocks)


def block_count(em, tol: float = DEFAULT_BLOCK_TOL) -> int:
    return len(block_structure(em, tol))
