"""The three reference families: GHZ-like, Briegel-Raussendorf, and W states.

Each family comes with a generator and closed-form expressions for its
entanglement distance (and, where known, its entanglement metric) that serve
as oracles for the numeric machinery in :mod:`entdist.fsmetric`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import PureState

GHZL = "ghzl"
BRS = "brs"
W = "w"
KINDS = (GHZL, BRS, W)

ROUTE_AGREEMENT_TOL = 1e-12


@dataclass(frozen=True)
class FamilySpec:
    """A family member: kind, qubit count, and the family's parameters.

    ghzl: one angle theta in [0, pi/2].
    brs:  one phase phi in [0, 2*pi].
    w:    M-1 angles theta_j in [0, pi/2].
    """

    kind: str
    num_qubits: int
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.num_qubits < 2:
            raise ValueError(f"family states need M >= 2, got {self.num_qubits}")
        if self.kind == GHZL:
            if len(self.params) != 1:
                raise ValueError("ghzl takes exactly one parameter theta")
            _check_range(self.params[0], 0.0, math.pi / 2, "theta")
        elif self.kind == BRS:
            if len(self.params) != 1:
                raise ValueError("brs takes exactly one parameter phi")
            _check_range(self.params[0], 0.0, 2 * math.pi, "phi")
        else:
            if len(self.params) != self.num_qubits - 1:
                raise ValueError(
                    f"w with M={self.num_qubits} takes {self.num_qubits - 1} "
                    f"angles, got {len(self.params)}"
                )
            for j, th in enumerate(self.params):
                _check_range(th, 0.0, math.pi / 2, f"theta_{j + 1}")


def _check_range(x: float, lo: float, hi: float, name: str) -> None:
    if not lo - 1e-12 <= x <= hi + 1e-12:
        raise ValueError(f"{name} = {x!r} outside [{lo}, {hi}]")


def ghzl_state(num_qubits: int, theta: float) -> PureState:
    """cos(theta)|0...0> + sin(theta)|1...1>."""
    FamilySpec(GHZL, num_qubits, (theta,))
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = math.cos(theta)
    amps[-1] = math.sin(theta)
    return PureState(num_qubits, amps)


def brs_pair_count(k: int, num_qubits: int) -> int:
    """Number of adjacent '01' pairs in the M-bit string of k, read MSB first.

    Bit positions j and j+1 form such a pair when bit j is 1 and bit j+1 is 0.
    """
    y = k & ~(k >> 1) & ((1 << (num_qubits - 1)) - 1)
    return bin(y).count("1")


def brs_state(num_qubits: int, phi: float) -> PureState:
    """Uniform superposition evolved by the diagonal two-qubit phase chain.

    Operator route: each open-chain coupling (j, j+1) contributes a factor
    1 + alpha on the basis states with bit j = 1 and bit j+1 = 0, where
    alpha = exp(-i*phi) - 1.
    """
    FamilySpec(BRS, num_qubits, (phi,))
    m = num_qubits
    amps = np.full(2**m, 2.0 ** (-m / 2), dtype=complex)
    alpha = np.exp(-1j * phi) - 1.0
    k = np.arange(2**m)
    for j in range(m - 1):
        hit = (((k >> j) & 1) == 1) & (((k >> (j + 1)) & 1) == 0)
        amps[hit] *= 1.0 + alpha
    return PureState(m, amps)


def brs_state_combinatorial(num_qubits: int, phi: float) -> PureState:
    """Same family through the pair-count eigenvalues exp(-i*phi*n(k))."""
    FamilySpec(BRS, num_qubits, (phi,))
    m = num_qubits
    counts = np.array([brs_pair_count(k, m) for k in range(2**m)])
    amps = 2.0 ** (-m / 2) * np.exp(-1j * phi * counts)
    return PureState(m, amps)


def w_amplitudes(num_qubits: int, angles) -> np.ndarray:
    """Spherical-chart weights alpha_1..alpha_M from M-1 angles."""
    angles = tuple(float(a) for a in angles)
    alphas = np.empty(num_qubits)
    sines = 1.0
    for j, th in enumerate(angles):
        alphas[j] = sines * math.cos(th)
        sines *= math.sin(th)
    alphas[num_qubits - 1] = sines
    return alphas


def w_state(num_qubits: int, angles) -> PureState:
    """Weighted one-hot superposition sum_j alpha_j |2^(j-1)>."""
    FamilySpec(W, num_qubits, tuple(angles))
    alphas = w_amplitudes(num_qubits, angles)
    amps = np.zeros(2**num_qubits, dtype=complex)
    for j in range(num_qubits):
        amps[2**j] = alphas[j]
    return PureState(num_qubits, amps)


def family_state(spec: FamilySpec) -> PureState:
    if spec.kind == GHZL:
        return ghzl_state(spec.num_qubits, spec.params[0])
    if spec.kind == BRS:
        return brs_state(spec.num_qubits, spec.params[0])
    return w_state(spec.num_qubits, spec.params)


def family_ed_closed_form(spec: FamilySpec) -> float:
    """Closed-form per-qubit entanglement distance E/M for a family member.

    Available for ghzl and w at any M; for brs only at M in {2, 3, 4}.
    """
    if spec.kind == GHZL:
        return math.sin(2 * spec.params[0]) ** 2
    if spec.kind == W:
        alphas = w_amplitudes(spec.num_qubits, spec.params)
        return 4.0 * (1.0 - float((alphas**4).sum())) / spec.num_qubits
    m = spec.num_qubits
    s2 = math.sin(spec.params[0] / 2) ** 2
    c2 = math.cos(spec.params[0] / 2) ** 2
    if m == 2:
        return s2
    if m == 3:
        return s2 * (3.0 + c2) / 3.0
    if m == 4:
        return s2 * (4.0 + 2.0 * c2) / 4.0
    raise ValueError(f"no closed form for brs with M={m}; use the numeric path")


def family_em_closed_form(spec: FamilySpec) -> np.ndarray:
    """Closed-form entanglement metric, in the fixed positive frame gauge.

    ghzl: any M. brs: M in {2, 3, 4}. w: M = 2, and M = 3 at the uniform
    point only. Everything else raises.
    """
    m = spec.num_qubits
    if spec.kind == GHZL:
        return math.sin(2 * spec.params[0]) ** 2 * np.ones((m, m))
    if spec.kind == BRS:
        s2 = math.sin(spec.params[0] / 2) ** 2
        c = math.cos(spec.params[0] / 2)
        a = abs(c)  # positive-gauge frames flip the sign of c in these entries
        if m == 2:
            return s2 * np.ones((2, 2))
        if m == 3:
            return s2 * np.array(
                [[1, a, 0], [a, 1 + c**2, a], [0, a, 1]], dtype=float
            )
        if m == 4:
            return s2 * np.array(
                [
                    [1, a, 0, 0],
                    [a, 1 + c**2, c**2, 0],
                    [0, c**2, 1 + c**2, a],
                    [0, 0, a, 1],
                ],
                dtype=float,
            )
        raise ValueError(f"no closed-form EM for brs with M={m}")
    if m == 2:
        return math.sin(2 * spec.params[0]) ** 2 * np.ones((2, 2))
    if m == 3:
        uniform = (math.acos(1 / math.sqrt(3)), math.pi / 4)
        if max(abs(spec.params[i] - uniform[i]) for i in range(2)) > 1e-9:
            raise ValueError(
                "closed-form EM for w with M=3 is known only at the uniform point"
            )
        d, o = 8.0 / 9.0, -4.0 / 9.0
        return np.array([[d, o, o], [o, d, o], [o, o, d]])
    raise ValueError(f"no closed-form EM for w with M={m}")


def w_uniform_angles(num_qubits: int) -> tuple:
    """Angles producing alpha_j = 1/sqrt(M) for every j."""
    angles = []
    remaining = num_qubits
    for _ in range(num_qubits - 1):
        angles.append(math.acos(1.0 / math.sqrt(remaining)))
        remaining -= 1
    return tuple(angles)


def fig5_grid(resolution: int):
    """Per-qubit ED of the M=3 W family over a [0, pi/2]^2 angle grid.

    Returns (theta1 values, theta2 values, values[i, j]) where values[i, j]
    is E/3 at (theta1[i], theta2[j]), computed through the numeric path.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    from .fsmetric import entanglement_distance

    theta1 = np.linspace(0.0, math.pi / 2, resolution)
    theta2 = np.linspace(0.0, math.pi / 2, resolution)
    values = np.empty((resolution, resolution))
    for i, t1 in enumerate(theta1):
        for j, t2 in enumerate(theta2):
            state = w_state(3, (t1, t2))
            values[i, j] = entanglement_distance(state, include_em=False).total / 3.0
    return theta1, theta2, values
