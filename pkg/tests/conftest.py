"""Shared oracles and helpers.

The oracles here deliberately take the slow, obvious route (full kron
matrices, explicit eigendecompositions) so they stay independent of the
library's optimized code paths.
"""

import time

import numpy as np
import pytest

from entdist.qstate import PureState

SESSION_T0 = time.perf_counter()
SUITE_BUDGET_SECONDS = 600.0

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def dense_single_qubit_op(num_qubits: int, qubit: int, op2: np.ndarray) -> np.ndarray:
    """Full 2^M x 2^M matrix acting with op2 on one qubit (little-endian)."""
    full = np.ones((1, 1), dtype=complex)
    for q in range(num_qubits):
        factor = op2 if q == qubit else I2
        full = np.kron(factor, full)
    return full


def dense_axis_op(num_qubits: int, qubit: int, axis) -> np.ndarray:
    v = np.asarray(axis, dtype=float)
    return dense_single_qubit_op(num_qubits, qubit, v[0] * SX + v[1] * SY + v[2] * SZ)


def dense_expectation(state: PureState, op: np.ndarray) -> complex:
    return complex(np.vdot(state.amplitudes, op @ state.amplitudes))


def dense_bloch(state: PureState, qubit: int) -> np.ndarray:
    """Bloch vector through explicit kron operators."""
    return np.array(
        [
            dense_expectation(state, dense_single_qubit_op(state.num_qubits, qubit, s)).real
            for s in (SX, SY, SZ)
        ]
    )


def random_pure(num_qubits: int, rng) -> PureState:
    rng = np.random.default_rng(rng)
    z = rng.standard_normal(2**num_qubits) + 1j * rng.standard_normal(2**num_qubits)
    return PureState(num_qubits, z / np.linalg.norm(z))


def random_su2(rng) -> np.ndarray:
    """Haar-random 2x2 special unitary."""
    rng = np.random.default_rng(rng)
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    q = q @ np.diag(r.diagonal() / np.abs(r.diagonal()))
    return q / np.sqrt(np.linalg.det(q))


def random_sphere_point(rng) -> np.ndarray:
    rng = np.random.default_rng(rng)
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def apply_local_unitaries(state: PureState, unitaries) -> PureState:
    """Apply one 2x2 unitary per qubit (qubit q gets unitaries[q])."""
    amps = state.amplitudes
    for q, u in enumerate(unitaries):
        amps = np.matmul(u[None, :, :], amps.reshape(-1, 2, 2**q)).reshape(-1)
    return PureState(state.num_qubits, amps)


def random_lu_image(state: PureState, rng) -> PureState:
    rng = np.random.default_rng(rng)
    return apply_local_unitaries(
        state, [random_su2(rng) for _ in range(state.num_qubits)]
    )


def wootters_concurrence(rho: np.ndarray) -> float:
    """Mixed-state two-qubit concurrence from the spin-flipped spectrum."""
    yy = np.kron(SY, SY)
    r = rho @ yy @ rho.conj() @ yy
    evals = np.sort(np.abs(np.real(np.linalg.eigvals(r))))
    roots = np.sqrt(evals)
    return max(0.0, roots[3] - roots[2] - roots[1] - roots[0])


def em_match_up_to_degenerate_gauge(em_a, em_b, degenerate, tol) -> bool:
    """Entrywise match allowing sign flips on degenerate-qubit rows only."""
    em_a = np.asarray(em_a)
    em_b = np.asarray(em_b)
    m = em_a.shape[0]
    flippable = list(degenerate)
    for mask in range(2 ** len(flippable)):
        d = np.ones(m)
        for bit, q in enumerate(flippable):
            if (mask >> bit) & 1:
                d[q] = -1.0
        if np.abs(d[:, None] * em_a * d[None, :] - em_b).max() <= tol:
            return True
    return False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - SESSION_T0
    verdict = "PASS" if elapsed < SUITE_BUDGET_SECONDS else "FAIL"
    terminalreporter.write_line(
        f"{verdict} suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_SECONDS:.0f} s)"
    )
