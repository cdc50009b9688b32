"""Local-unitary equivalence testing by metric matching.

Two LU-equivalent states satisfy: for every frame v on the first state there
is a frame n on the second with g(A, v) = g(B, n). The test samples witness
frames v, and for each one searches the frames of B for a metric match. A
witness whose best residual stays above the inequivalence margin certifies
that the states are in different classes; matches on every witness are
conclusive for M = 2 and consistent-with-equivalence for M > 2 (the metric
carries only two-point correlations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import blas
from scipy.optimize import minimize

from . import qstate
from .fsmetric import entanglement_distance, metric_tensor, optimal_frame
from .qstate import PureState

MEASURE_PRECHECK_TOL = 1e-8

MATCH_ALL_WITNESSES = "MATCH_ALL_WITNESSES"
NO_MATCH_FOUND = "NO_MATCH_FOUND"
INCONCLUSIVE = "INCONCLUSIVE"

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass
class MatchConfig:
    grid_points_per_sphere: int = 256
    restarts: int = 32
    polish_iters: int = 200
    match_tol: float = 1e-8
    inequivalence_margin: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        for name in ("grid_points_per_sphere", "restarts", "polish_iters"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.match_tol < self.inequivalence_margin:
            raise ValueError("match_tol must be smaller than inequivalence_margin")


@dataclass
class FrameMatchResult:
    frame: np.ndarray
    residual: float
    grid_residual: float
    restarts_used: int


@dataclass
class WitnessResult:
    witness_frame: np.ndarray
    matched_frame: np.ndarray
    residual: float


@dataclass
class EquivalenceReport:
    status: str
    witnesses: list[WitnessResult] = field(default_factory=list)
    conclusive_for_equivalence: bool = False
    note: str = ""
    measure_gap: float = 0.0
    witnesses_planned: int = 0

    @property
    def min_residual(self) -> float:
        return min((w.residual for w in self.witnesses), default=float("nan"))

    @property
    def max_residual(self) -> float:
        return max((w.residual for w in self.witnesses), default=float("nan"))

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "status": self.status,
            "conclusive_for_equivalence": self.conclusive_for_equivalence,
            "note": self.note,
            "measure_gap": float(self.measure_gap),
            "witnesses_planned": self.witnesses_planned,
            "witnesses_tested": len(self.witnesses),
            "witnesses": [
                {
                    "witness_frame": w.witness_frame.tolist(),
                    "matched_frame": w.matched_frame.tolist(),
                    "residual": float(w.residual),
                }
                for w in self.witnesses
            ],
        }


def fibonacci_sphere(count: int) -> np.ndarray:
    """Near-uniform lattice of ``count`` points on the unit sphere."""
    i = np.arange(count)
    z = 1.0 - 2.0 * (i + 0.5) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ang = i * _GOLDEN_ANGLE
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)


def pauli_moments(state: PureState):
    """First moments t[m, a] and pair correlators T[m, n, a, b] of a state.

    Everything the metric needs for any frame choice; the frame search then
    runs on small arrays with no further state-vector passes. The diagonal
    blocks T[m, m] are not meaningful and must not be used.
    """
    m = state.num_qubits
    dim = 2**m
    phi = np.empty((3 * m, dim), dtype=complex)
    for mu in range(m):
        lo = 2**mu
        for a in range(3):
            np.matmul(
                qstate.PAULIS[a][None, :, :],
                state.amplitudes.reshape(-1, 2, lo),
                out=phi[3 * mu + a].reshape(-1, 2, lo),
            )
    t = (phi @ np.conj(state.amplitudes)).real.reshape(m, 3)
    gram = blas.zherk(1.0, phi.T, trans=2, lower=0)
    gram = gram + np.triu(gram, 1).conj().T
    big = gram.real.reshape(m, 3, m, 3)
    return t, np.ascontiguousarray(big.transpose(0, 2, 1, 3))


def metric_from_moments(t: np.ndarray, pair: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """Metric tensor(s) from precomputed moments; frames may be batched.

    Accepts frames of shape (M, 3) or (batch, M, 3) and returns (M, M) or
    (batch, M, M) accordingly.
    """
    single = frames.ndim == 2
    v = frames[None] if single else frames
    proj = np.einsum("gma,ma->gm", v, t)
    g = np.einsum("gma,mnab,gnb->gmn", v, pair, v)
    g -= proj[:, :, None] * proj[:, None, :]
    diag = 1.0 - proj**2
    idx = np.arange(t.shape[0])
    g[:, idx, idx] = diag
    return g[0] if single else g


def _angles_of_frame(frame: np.ndarray) -> np.ndarray:
    theta = np.arccos(np.clip(frame[:, 2], -1.0, 1.0))
    phi = np.arctan2(frame[:, 1], frame[:, 0])
    return np.concatenate([theta, phi])


def _frame_of_angles(x: np.ndarray, m: int) -> np.ndarray:
    theta, phi = x[:m], x[m:]
    s, c = np.sin(theta), np.cos(theta)
    return np.stack([s * np.cos(phi), s * np.sin(phi), c], axis=1)


class _FrameSearch:
    """Frame search for one target metric: lattice sweeps, then simplex descent.

    The per-sphere cyclic polish alone zigzags in the curved valleys of this
    objective (it stalls orders of magnitude above the match tolerance), so a
    joint simplex descent over all 2M angles finishes the refinement.
    """

    def __init__(self, target, t, pair, cfg, lattice):
        self.target = target
        self.t = t
        self.pair = pair
        self.cfg = cfg
        self.lattice = lattice
        self.m = t.shape[0]

    def residual_sq(self, frame) -> float:
        g = metric_from_moments(self.t, self.pair, frame)
        return float(((g - self.target) ** 2).sum())

    def _residual_sq_batch(self, frame, mu, candidates) -> np.ndarray:
        batch = np.broadcast_to(
            frame, (len(candidates), self.m, 3)
        ).copy()
        batch[:, mu, :] = candidates
        g = metric_from_moments(self.t, self.pair, batch)
        return ((g - self.target) ** 2).sum(axis=(1, 2))

    def _grid_step(self, frame, value):
        improved = False
        for mu in range(self.m):
            vals = self._residual_sq_batch(frame, mu, self.lattice)
            best = int(np.argmin(vals))
            if vals[best] < value:
                frame = frame.copy()
                frame[mu] = self.lattice[best]
                value = float(vals[best])
                improved = True
        return frame, value, improved

    def value_and_grad(self, x: np.ndarray):
        """Squared residual and its gradient in the 2M sphere angles."""
        m = self.m
        theta, phi = x[:m], x[m:]
        st, ct = np.sin(theta), np.cos(theta)
        sp, cp = np.sin(phi), np.cos(phi)
        v = np.stack([st * cp, st * sp, ct], axis=1)

        proj = np.einsum("ma,ma->m", v, self.t)
        tv = np.einsum("mnab,nb->mna", self.pair, v)
        g = np.einsum("ma,mna->mn", v, tv) - np.outer(proj, proj)
        idx = np.arange(m)
        g[idx, idx] = 1.0 - proj**2
        delta = g - self.target
        value = float((delta**2).sum())

        # dF/dv^a = 4 [sum_{n != a} delta_an (T^{an} v^n - P_n t_a)
        #              - delta_aa P_a t_a]
        off = delta.copy()
        off[idx, idx] = 0.0
        grad_v = np.einsum("mn,mna->ma", off, tv)
        grad_v -= (off @ proj)[:, None] * self.t
        grad_v -= (delta[idx, idx] * proj)[:, None] * self.t
        grad_v *= 4.0

        dv_dtheta = np.stack([ct * cp, ct * sp, -st], axis=1)
        dv_dphi = np.stack([-st * sp, st * cp, np.zeros(m)], axis=1)
        grad = np.concatenate(
            [
                np.einsum("ma,ma->m", grad_v, dv_dtheta),
                np.einsum("ma,ma->m", grad_v, dv_dphi),
            ]
        )
        return value, grad

    def _joint_polish(self, frame, value, stop_sq):
        res = minimize(
            self.value_and_grad,
            _angles_of_frame(frame),
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": 5 * self.cfg.polish_iters,
                "ftol": 1e-18,
                "gtol": 1e-14,
            },
        )
        if res.fun < value:
            return _frame_of_angles(res.x, self.m), float(res.fun)
        return frame, value

    def run(self, start, stop_sq):
        frame = np.array(start, dtype=float)
        value = self.residual_sq(frame)
        # coarse stage: lattice sweeps until they stop helping
        for _ in range(6):
            frame, value, improved = self._grid_step(frame, value)
            if not improved:
                break
        grid_value = value
        if value >= stop_sq:
            frame, value = self._joint_polish(frame, value, stop_sq)
        return frame, value, grid_value


def _alignment_error(rots, t_a, pair_a, t_b, pair_b) -> float:
    m = t_a.shape[0]
    err = sum(
        float(((rots[q] @ t_a[q] - t_b[q]) ** 2).sum()) for q in range(m)
    )
    for a in range(m):
        for b in range(a + 1, m):
            d = rots[a] @ pair_a[a, b] @ rots[b].T - pair_b[a, b]
            err += float((d**2).sum())
    return err


def _procrustes_sweeps(rots, t_a, pair_a, t_b, pair_b, sweeps: int) -> np.ndarray:
    m = t_a.shape[0]
    rots = [r.copy() for r in rots]
    for _ in range(sweeps):
        for alpha in range(m):
            xs = [t_a[alpha][:, None]]
            ys = [t_b[alpha][:, None]]
            for nu in range(m):
                if nu == alpha:
                    continue
                xs.append(pair_a[alpha, nu] @ rots[nu].T)
                ys.append(pair_b[alpha, nu])
            x = np.concatenate(xs, axis=1)
            y = np.concatenate(ys, axis=1)
            u, _, vt = np.linalg.svd(y @ x.T)
            d = np.sign(np.linalg.det(u @ vt)) or 1.0
            rots[alpha] = (u * np.array([1.0, 1.0, d])) @ vt
    return np.stack(rots)


_PROPER_SIGN_FLIPS = [
    np.diag(s)
    for s in ([1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0])
]


def align_local_rotations(t_a, pair_a, t_b, pair_b, sweeps: int = 8) -> np.ndarray:
    """Per-qubit rotations R with R t_a ~ t_b and R T_a R^T ~ T_b.

    For LU-equivalent states the moments transform covariantly under the
    adjoint rotations of the local unitaries, so aligning them recovers those
    rotations (up to local symmetries of the state). The per-qubit Gram
    t t^T + sum_n T^{qn} T^{qn,T} transforms as R G R^T independently of the
    other qubits, so matched eigenbases give direct candidates (up to sign
    branches); alternating orthogonal Procrustes sweeps and a few random
    restarts refine and disambiguate. Used as a warm start only, so residual
    alignment error on highly symmetric states is harmless.
    """
    m = t_a.shape[0]

    def gram(t, pair, q):
        g = np.outer(t[q], t[q])
        for nu in range(m):
            if nu != q:
                g = g + pair[q, nu] @ pair[q, nu].T
        return g

    spectral: list[list[np.ndarray]] = []
    for q in range(m):
        _, va = np.linalg.eigh(gram(t_a, pair_a, q))
        _, vb = np.linalg.eigh(gram(t_b, pair_b, q))
        options = []
        for flip in _PROPER_SIGN_FLIPS:
            r = vb @ flip @ va.T
            if np.linalg.det(r) < 0:
                r = vb @ (-flip) @ va.T
            options.append(r)
        spectral.append(options)

    rng = np.random.default_rng(12345)
    candidates = []
    # greedy per-qubit branch choice, then the full branch product for small M
    for combo in range(4**m if 4**m <= 256 else 0):
        rots = []
        c = combo
        for q in range(m):
            rots.append(spectral[q][c % 4])
            c //= 4
        candidates.append(np.stack(rots))
    for _ in range(8):
        rots = []
        for _ in range(m):
            z = rng.standard_normal((3, 3))
            qq, rr = np.linalg.qr(z)
            qq = qq @ np.diag(np.sign(np.diag(rr)))
            if np.linalg.det(qq) < 0:
                qq[:, 0] = -qq[:, 0]
            rots.append(qq)
        candidates.append(np.stack(rots))

    best, best_err = None, np.inf
    for cand in candidates:
        refined = _procrustes_sweeps(cand, t_a, pair_a, t_b, pair_b, 2)
        err = _alignment_error(refined, t_a, pair_a, t_b, pair_b)
        if err < best_err:
            best, best_err = refined, err
    return _procrustes_sweeps(best, t_a, pair_a, t_b, pair_b, sweeps)


def _diagonal_seeded_start(target, t, rng) -> np.ndarray:
    """Random start on the manifold already reproducing the target diagonal.

    The diagonal pins each frame vector to a cone around the qubit's Bloch
    axis; sampling there reduces the effective search to the off-diagonal
    entries and avoids most spurious basins.
    """
    m = t.shape[0]
    frame = np.empty((m, 3))
    for mu in range(m):
        norm = float(np.linalg.norm(t[mu]))
        if norm < DEGENERACY_THRESHOLD_FOR_SEEDS:
            raw = rng.standard_normal(3)
            frame[mu] = raw / np.linalg.norm(raw)
            continue
        axis = t[mu] / norm
        proj = math.sqrt(max(0.0, 1.0 - target[mu, mu]))
        c = min(1.0, proj / norm) * (1.0 if rng.random() < 0.5 else -1.0)
        helper = np.array([1.0, 0.0, 0.0])
        if abs(axis[0]) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        e1 = np.cross(axis, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        s = math.sqrt(max(0.0, 1.0 - c * c))
        frame[mu] = c * axis + s * (math.cos(ang) * e1 + math.sin(ang) * e2)
    return frame


DEGENERACY_THRESHOLD_FOR_SEEDS = 1e-9


def frame_match(
    target,
    state_b: PureState,
    cfg: MatchConfig | None = None,
    rng=None,
    extra_starts=None,
) -> FrameMatchResult:
    """Search the frames of ``state_b`` for a metric matching ``target``.

    Coarse Fibonacci-lattice sweeps per sphere followed by a gradient polish
    over all 2M sphere angles, multi-started from the optimal frame of B, any
    caller-provided warm starts, diagonal-seeded frames, and fully random
    frames. Deterministic given the seed; the returned ``grid_residual`` is
    the coarse-stage value of the winning start (refinement never goes above
    it).
    """
    cfg = cfg or MatchConfig()
    target = np.asarray(target, dtype=float)
    if target.shape != (state_b.num_qubits, state_b.num_qubits):
        raise ValueError(
            f"target shape {target.shape} does not match "
            f"{state_b.num_qubits} qubits"
        )
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    t, pair = pauli_moments(state_b)
    lattice = fibonacci_sphere(cfg.grid_points_per_sphere)
    search = _FrameSearch(target, t, pair, cfg, lattice)

    frame_b, _ = optimal_frame(state_b)
    starts = [frame_b]
    if extra_starts is not None:
        starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    for i in range(cfg.restarts - 1):
        if i % 2 == 0:
            starts.append(_diagonal_seeded_start(target, t, rng))
        else:
            raw = rng.standard_normal((state_b.num_qubits, 3))
            starts.append(raw / np.linalg.norm(raw, axis=1)[:, None])

    # a residual safely below match_tol classifies as a match; later restarts
    # could only polish an already-passing value
    stop_sq = (0.5 * cfg.match_tol) ** 2
    best = None
    used = 0
    for start in starts:
        used += 1
        frame, value, grid_value = search.run(start, stop_sq)
        if best is None or value < best[1]:
            best = (frame, value, grid_value)
        if best[1] < stop_sq:
            break
    frame, value, grid_value = best
    return FrameMatchResult(
        frame=frame,
        residual=math.sqrt(max(0.0, value)),
        grid_residual=math.sqrt(max(0.0, grid_value)),
        restarts_used=used,
    )


def _canonical_witnesses(num_qubits: int) -> list[np.ndarray]:
    axes = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])]
    return [np.tile(a, (num_qubits, 1)) for a in axes]


def equivalence_test(
    state_a: PureState,
    state_b: PureState,
    cfg: MatchConfig | None = None,
    check_measure: bool = True,
) -> EquivalenceReport:
    """Sampled test of the LU-equivalence necessary condition.

    Witness frames on A are the EM-optimal frame, the three canonical axis
    frames, and cfg.restarts random frames. A witness with no matching frame
    on B (best residual above the margin) is decisive for inequivalence and
    stops the scan.
    """
    if state_a.num_qubits != state_b.num_qubits:
        raise ValueError("states must have the same number of qubits")
    cfg = cfg or MatchConfig()
    m = state_a.num_qubits

    report_a = entanglement_distance(state_a, include_em=False)
    report_b = entanglement_distance(state_b, include_em=False)
    gap = abs(report_a.total - report_b.total)
    if check_measure and gap >= MEASURE_PRECHECK_TOL:
        return EquivalenceReport(
            status=NO_MATCH_FOUND,
            conclusive_for_equivalence=False,
            note=(
                "entanglement distance differs (class invariant); "
                f"gap {gap:.3e} >= {MEASURE_PRECHECK_TOL:.0e}"
            ),
            measure_gap=gap,
            witnesses_planned=0,
        )

    rng = np.random.default_rng(cfg.seed)
    witnesses = [report_a.frame.copy()]
    witnesses += _canonical_witnesses(m)
    for _ in range(cfg.restarts):
        raw = rng.standard_normal((m, 3))
        witnesses.append(raw / np.linalg.norm(raw, axis=1)[:, None])

    # if the states are LU images of each other, the aligned moment tensors
    # expose the local rotations; warm-start every witness search with them
    moments_a = pauli_moments(state_a)
    moments_b = pauli_moments(state_b)
    rotations = align_local_rotations(*moments_a, *moments_b)

    results: list[WitnessResult] = []
    decisive = False
    for i, w in enumerate(witnesses):
        target = metric_tensor(state_a, w)
        warm = np.einsum("mab,mb->ma", rotations, w)
        warm /= np.linalg.norm(warm, axis=1)[:, None]
        match = frame_match(
            target,
            state_b,
            cfg,
            rng=np.random.default_rng([cfg.seed, 7919, i]),
            extra_starts=[warm],
        )
        results.append(WitnessResult(w, match.frame, match.residual))
        if match.residual > cfg.inequivalence_margin:
            decisive = True
            break

    if decisive:
        status = NO_MATCH_FOUND
        note = (
            f"witness {len(results) - 1} has best residual "
            f"{results[-1].residual:.3e} above the margin "
            f"{cfg.inequivalence_margin:.0e}; sampled over "
            f"{len(results)} of {len(witnesses)} witnesses"
        )
    elif all(r.residual <= cfg.match_tol for r in results):
        status = MATCH_ALL_WITNESSES
        if m == 2:
            note = "metric matching is necessary and sufficient at M = 2"
        else:
            note = (
                "consistent with equivalence (second-order correlations "
                "only); not conclusive for M > 2"
            )
    else:
        status = INCONCLUSIVE
        note = (
            "some witness residuals fall between match_tol and the "
            "inequivalence margin"
        )

    return EquivalenceReport(
        status=status,
        witnesses=results,
        conclusive_for_equivalence=(m == 2 and status == MATCH_ALL_WITNESSES),
        note=note,
        measure_gap=gap,
        witnesses_planned=len(witnesses),
    )
