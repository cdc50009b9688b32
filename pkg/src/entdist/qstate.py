"""Multi-qubit pure states on dense amplitude vectors.

Basis convention is little-endian throughout: basis index k encodes qubit mu
as bit mu of k, so qubit 0 is the least significant bit. States are stored as
complex vectors of length 2**M and are immutable after construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
HERM_TOL = 1e-12
EIG_SLACK = 1e-10
LOADER_NORM_TOL = 1e-6

PAULI_1 = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_1, PAULI_2, PAULI_3)


def pauli_axis_matrix(axis) -> np.ndarray:
    """2x2 matrix v . sigma for a real 3-vector v."""
    v = np.asarray(axis, dtype=float)
    return np.array(
        [[v[2], v[0] - 1j * v[1]], [v[0] + 1j * v[1], -v[2]]], dtype=complex
    )


def _check_unit_axis(axis) -> np.ndarray:
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {v.shape}")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > NORM_TOL:
        raise ValueError(f"axis must be a unit vector, |v| = {n!r}")
    return v


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of ``num_qubits`` qubits, little-endian amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubits, got shape {amps.shape}"
            )
        norm_sq = float(np.real(np.vdot(amps, amps)))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |a_k|^2 = {norm_sq!r}")

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "PureState":
        """Build a state from a raw amplitude vector (length must be 2**M)."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        m = int(np.log2(amps.size))
        if 2**m != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of 2")
        if normalize:
            n = np.linalg.norm(amps)
            if n == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / n
        return cls(m, amps)

    def density_matrix(self) -> "DensityMatrix":
        rho = np.outer(self.amplitudes, np.conj(self.amplitudes))
        return DensityMatrix(self.num_qubits, rho)

    def isclose(self, other: "PureState", tol: float = 1e-12) -> bool:
        """Equality as rays: true when the states agree up to a global phase."""
        if self.num_qubits != other.num_qubits:
            return False
        ov = np.vdot(self.amplitudes, other.amplitudes)
        return bool(abs(abs(ov) - 1.0) < tol)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on M qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        d = 2**self.num_qubits
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > HERM_TOL:
            raise ValueError("matrix is not Hermitian within 1e-12")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > HERM_TOL:
            raise ValueError(f"trace must be 1, got {tr!r}")
        lo = float(np.linalg.eigvalsh(mat).min())
        if lo < -EIG_SLACK:
            raise ValueError(f"matrix has negative eigenvalue {lo!r}")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def basis_state(num_qubits: int, index: int) -> PureState:
    """Computational basis state |index> with the little-endian convention."""
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return PureState(num_qubits, amps)


def random_state(num_qubits: int, rng) -> PureState:
    """Haar-random pure state; rng is a seed or a numpy Generator."""
    rng = np.random.default_rng(rng)
    z = rng.standard_normal(2**num_qubits) + 1j * rng.standard_normal(2**num_qubits)
    return PureState(num_qubits, z / np.linalg.norm(z))


def tensor_product(factors) -> PureState:
    """Tensor product of pure states; factor 0 occupies the lowest-order qubits."""
    factors = list(factors)
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    amps = np.ones(1, dtype=complex)
    total = 0
    for f in factors:
        norm_sq = float(np.real(np.vdot(f.amplitudes, f.amplitudes)))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError("tensor_product factors must be normalized")
        # factor occupies higher-order bits than everything before it
        amps = np.kron(f.amplitudes, amps)
        total += f.num_qubits
    return PureState(total, amps)


def _apply_2x2(amplitudes: np.ndarray, mat: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 operator to one qubit of a flat amplitude vector."""
    lo = 2**qubit
    out = np.empty_like(amplitudes)
    np.matmul(
        mat[None, :, :],
        amplitudes.reshape(-1, 2, lo),
        out=out.reshape(-1, 2, lo),
    )
    return out


def apply_pauli_axis(state: PureState, qubit: int, axis) -> PureState:
    """Return (v . sigma^mu)|psi>, the v-conjugate of the state at qubit mu.

    Involutory: applying the same axis twice returns the input state.
    """
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit index {qubit} out of range")
    v = _check_unit_axis(axis)
    out = _apply_2x2(state.amplitudes, pauli_axis_matrix(v), qubit)
    return PureState(state.num_qubits, out)


def bloch_vector(state: PureState, qubit: int) -> np.ndarray:
    """Pauli expectation values (<sigma_1>, <sigma_2>, <sigma_3>) of one qubit."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit index {qubit} out of range")
    lo = 2**qubit
    t = state.amplitudes.reshape(-1, 2, lo)
    t0, t1 = t[:, 0, :], t[:, 1, :]
    z = np.einsum("ij,ij->", np.conj(t0), t1)
    p0 = float(np.einsum("ij,ij->", np.conj(t0), t0).real)
    return np.array([2 * z.real, 2 * z.imag, 2 * p0 - 1.0])


def correlator(state: PureState, mu: int, v_mu, nu: int, v_nu) -> float:
    """Two-qubit correlator <psi| (v_mu.sigma^mu)(v_nu.sigma^nu) |psi>.

    The two operators act on distinct qubits and commute, so the value is
    real; mu == nu is rejected since the diagonal is analytic (sigma_v^2 = I).
    """
    if mu == nu:
        raise ValueError("correlator requires distinct qubits; sigma_v^2 = I")
    left = apply_pauli_axis(state, mu, v_mu)
    right = apply_pauli_axis(state, nu, v_nu)
    return float(np.vdot(left.amplitudes, right.amplitudes).real)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every qubit not in ``keep``.

    The surviving qubits are relabeled 0..len(keep)-1 in increasing order of
    their original index.
    """
    keep = sorted(set(int(q) for q in keep))
    m = rho.num_qubits
    if not keep:
        raise ValueError("keep must be a non-empty subset of qubits")
    if keep[0] < 0 or keep[-1] >= m:
        raise ValueError(f"keep {keep} out of range for {m} qubits")
    t = rho.matrix.reshape((2,) * (2 * m))
    # C-order axes: ket axis of qubit q is m-1-q, bra axis is 2m-1-q
    ket_sub = [m - 1 - q for q in range(m)]
    bra_sub = [2 * m - 1 - q for q in range(m)]
    in_subs = list(range(2 * m))
    for q in range(m):
        if q not in keep:
            in_subs[bra_sub[q]] = in_subs[ket_sub[q]]
    out_subs = [in_subs[ket_sub[q]] for q in reversed(keep)]
    out_subs += [in_subs[bra_sub[q]] for q in reversed(keep)]
    reduced = np.einsum(t, in_subs, out_subs)
    d = 2 ** len(keep)
    return DensityMatrix(len(keep), reduced.reshape(d, d))


def fs_distance_sq(a: PureState, b: PureState) -> float:
    """Squared Fubini-Study distance 1 - |<a|b>|^2 between two rays."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(
            f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits"
        )
    ov = np.vdot(a.amplitudes, b.amplitudes)
    return float(min(1.0, max(0.0, 1.0 - abs(ov) ** 2)))


# --- JSON state files -------------------------------------------------------
#
# {"qubits": M, "amplitudes": [[re, im], ...]} with 2**M entries in
# little-endian index order.


def state_to_json_dict(state: PureState) -> dict:
    return {
        "qubits": state.num_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_json_dict(data: dict) -> PureState:
    try:
        m = int(data["qubits"])
        pairs = data["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"state JSON missing field: {exc}") from exc
    if len(pairs) != 2**m:
        raise ValueError(
            f"state JSON has {len(pairs)} amplitudes, expected {2**m}"
        )
    amps = np.array([complex(re, im) for re, im in pairs])
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > LOADER_NORM_TOL:
        raise ValueError(f"state norm {norm!r} deviates from 1 by more than 1e-6")
    return PureState(m, amps / norm)


def load_state(path) -> PureState:
    with open(path) as fh:
        return state_from_json_dict(json.load(fh))


def save_state(state: PureState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json_dict(state), fh, indent=2, sort_keys=True)
        fh.write("\n")
