"""Internal-model controller synthesis and closed-loop assembly.

Two dynamic error-feedback controllers

    zd(t) = G1 z(t) + G2 e(t),      u(t) = K z(t) - kappa e(t)

are provided.  The passive controller is a fixed-structure skew-symmetric
internal model with output feedback; it needs no model information beyond
the tracked frequencies.  The observer-based controller augments the internal
model with a full plant copy; its stabilizing gain comes from a continuous
algebraic Riccati equation and its coupling from a Sylvester equation solved
in the frequency domain.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .discretize import LinearStateSpace

CARE_RESIDUAL_RTOL = 1e-8
SYLVESTER_RESIDUAL_RTOL = 1e-8


def _validate_freqs(freqs) -> np.ndarray:
    freqs = np.asarray(freqs, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequency list must be a nonempty 1-D sequence")
    if np.any(freqs < 0.0):
        raise ValueError("frequencies must be nonnegative (conjugates are implicit)")
    if np.any(np.diff(freqs) <= 0.0):
        raise ValueError("frequencies must be strictly increasing (duplicates rejected)")
    return freqs


def signed_frequencies(freqs) -> list[float]:
    """Signed frequency list -w_q .. -w_1, [0,] w_1 .. w_q."""
    freqs = _validate_freqs(freqs)
    pos = [f for f in freqs if f > 0.0]
    out = [-f for f in reversed(pos)]
    if freqs[0] == 0.0:
        out.append(0.0)
    out.extend(pos)
    return out


@dataclass(frozen=True, eq=False)
class InternalModel:
    """Real block realization of the tracked-signal generator.

    G1 is block diagonal: a 2x2 zero block when 0 is tracked, and one
    rotation block [[0, w I2], [-w I2, 0]] per positive frequency.  The
    spectrum is {0} plus {+-i w_k}, each with multiplicity 2.
    """

    freqs: tuple
    G1: np.ndarray
    blocks: tuple  # (frequency, slice) per block
    dim: int


def internal_model(freqs) -> InternalModel:
    """Rotation-block internal model for the given nonnegative frequencies."""
    freqs = _validate_freqs(freqs)
    has_zero = freqs[0] == 0.0
    pos = [float(f) for f in freqs if f > 0.0]
    dim = (2 if has_zero else 0) + 4 * len(pos)
    G1 = np.zeros((dim, dim))
    blocks = []
    pos_idx = 0
    if has_zero:
        blocks.append((0.0, slice(0, 2)))
        pos_idx = 2
    for f in pos:
        sl = slice(pos_idx, pos_idx + 4)
        G1[sl.start : sl.start + 2, sl.start + 2 : sl.stop] = f * np.eye(2)
        G1[sl.start + 2 : sl.stop, sl.start : sl.start + 2] = -f * np.eye(2)
        blocks.append((f, sl))
        pos_idx += 4
    return InternalModel(freqs=tuple(float(f) for f in freqs), G1=G1, blocks=tuple(blocks), dim=dim)


@dataclass(frozen=True, eq=False)
class ControllerRealization:
    """Matrices (G1, G2, K, kappa) of a dynamic error-feedback controller."""

    G1: np.ndarray
    G2: np.ndarray
    K: np.ndarray
    kappa: np.ndarray

    @property
    def n_c(self) -> int:
        return self.G1.shape[0]


def zero_controller() -> ControllerRealization:
    """Degenerate zero-dimensional controller (closed loop equals the plant)."""
    return ControllerRealization(
        G1=np.zeros((0, 0)),
        G2=np.zeros((0, 2)),
        K=np.zeros((2, 0)),
        kappa=np.zeros((2, 2)),
    )


def build_passive_controller(freqs, c1: float, c2: float) -> ControllerRealization:
    """Passive internal-model controller.

    G1 is the skew-symmetric rotation-block internal model; the error drives
    the zero block with -I and the leading half of each rotation block with
    -c1 I; K = -G2^T and kappa = c2 I close the loop passively.  c1 and c2
    set the closed-loop stability margin and transient size.
    """
    if c1 <= 0.0 or c2 <= 0.0:
        raise ValueError(f"c1 and c2 must be positive, got c1={c1!r}, c2={c2!r}")
    im = internal_model(freqs)
    G2 = np.zeros((im.dim, 2))
    for f, sl in im.blocks:
        if f == 0.0:
            G2[sl.start : sl.start + 2] = -np.eye(2)
        else:
            G2[sl.start : sl.start + 2] = -c1 * np.eye(2)
    return ControllerRealization(G1=im.G1, G2=G2, K=-G2.T, kappa=c2 * np.eye(2))


def solve_sylvester_H(ss: LinearStateSpace, freqs) -> np.ndarray:
    """Frequency-by-frequency solution H of G1 H = H A + G2 C (complex form).

    Row block k is C (i w_k I - A)^{-1} for the signed frequencies
    w_{-q} .. w_q; G1 = diag(i w_k I2) and every G2 block is the identity.
    Requires the plant to be exponentially stable so each shift is regular.
    """
    omegas = signed_frequencies(freqs)
    n = ss.n
    rows = []
    eye = np.eye(n)
    for w in omegas:
        shift = 1j * w * eye - ss.A
        try:
            sol = np.linalg.solve(shift.T, ss.C.astype(complex).T)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(
                f"i*omega - A singular at omega = {w!r} "
                f"(condition estimate {np.linalg.cond(shift):.3e})"
            ) from exc
        rows.append(sol.T)
    H = np.vstack(rows)

    G1 = np.zeros((H.shape[0], H.shape[0]), dtype=complex)
    for i, w in enumerate(omegas):
        G1[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = 1j * w * np.eye(2)
    G2C = np.tile(ss.C, (len(omegas), 1))
    residual = np.linalg.norm(G1 @ H - H @ ss.A - G2C)
    bound = SYLVESTER_RESIDUAL_RTOL * (1.0 + np.linalg.norm(H))
    if residual > bound:
        worst = max(np.linalg.cond(1j * w * np.eye(n) - ss.A) for w in omegas)
        raise RuntimeError(
            f"Sylvester residual {residual:.3e} exceeds bound {bound:.3e} "
            f"(worst shift condition number {worst:.3e})"
        )
    return H


def care_solve(A, B, Q, R):
    """Stabilizing solution of A^T P + P A - P B R^{-1} B^T P + Q = 0.

    Solved by an ordered Schur decomposition of the 2n x 2n Hamiltonian
    matrix (stable invariant subspace), followed by a Newton refinement step
    when the residual calls for it.  Returns (P, K) with K = R^{-1} B^T P and
    A - B K Hurwitz.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    n = A.shape[0]
    Rinv = np.linalg.inv(R)
    G = B @ Rinv @ B.T
    ham = np.block([[A, -G], [-Q, -A.T]])
    T, Z, sdim = sla.schur(ham, output="real", sort=lambda re, im: re < 0.0)
    if sdim != n:
        raise RuntimeError(
            f"(A, B) appears unstabilizable: stable invariant subspace has "
            f"dimension {sdim}, expected {n}"
        )
    U1 = Z[:n, :n]
    U2 = Z[n:, :n]
    try:
        P = np.linalg.solve(U1.T, U2.T).T
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular Schur basis block; Riccati solution undefined") from exc
    P = 0.5 * (P + P.T)

    def residual(Pm):
        return A.T @ Pm + Pm @ A - Pm @ G @ Pm + Q

    scale = max(np.linalg.norm(P), 1.0)
    if np.linalg.norm(residual(P)) > 0.1 * CARE_RESIDUAL_RTOL * scale:
        # one Newton step: Lyapunov equation for the correction
        Ac = A - G @ P
        try:
            delta = sla.solve_sylvester(Ac.T, Ac, -residual(P))
            P = 0.5 * (P + delta + (P + delta).T)
        except np.linalg.LinAlgError:
            pass
    res = np.linalg.norm(residual(P))
    if res > CARE_RESIDUAL_RTOL * max(np.linalg.norm(P), 1.0):
        raise RuntimeError(f"Riccati residual {res:.3e} too large relative to ||P||")
    eigs = np.linalg.eigvalsh(P)
    if eigs.min() < -1e-8 * max(eigs.max(), 1.0):
        raise RuntimeError("Riccati solution is not positive semidefinite")
    K = Rinv @ B.T @ P
    if np.max(np.linalg.eigvals(A - B @ K).real) >= 0.0:
        raise RuntimeError("Riccati gain failed to stabilize A - B K")
    return P, K


def real_internal_model(ss: LinearStateSpace, freqs):
    """Real rotation-block servocompensator data from the complex Sylvester solution.

    The complex model diag(i w_k I2) with identity input blocks is carried to
    the real rotation-block form by the unitary pairing of the (i w, -i w)
    modes; the same change of basis maps H and B1 = H B, which stacks
    sqrt(2) Im / sqrt(2) Re of the rows at each positive frequency.
    """
    im = internal_model(freqs)
    Hc = solve_sylvester_H(ss, freqs)
    omegas = signed_frequencies(freqs)
    index_of = {w: i for i, w in enumerate(omegas)}

    Hr = np.zeros((im.dim, ss.n))
    G2r = np.zeros((im.dim, 2))
    s2 = np.sqrt(2.0)
    for f, sl in im.blocks:
        if f == 0.0:
            Hk = Hc[2 * index_of[0.0] : 2 * index_of[0.0] + 2]
            Hr[sl] = Hk.real
            G2r[sl] = np.eye(2)
        else:
            i = index_of[f]
            Hk = Hc[2 * i : 2 * i + 2]
            Hr[sl.start : sl.start + 2] = s2 * Hk.imag
            Hr[sl.start + 2 : sl.stop] = s2 * Hk.real
            G2r[sl.start + 2 : sl.stop] = s2 * np.eye(2)

    # the change of basis must preserve the spectrum exactly; signed
    # frequencies already list the conjugate pairs
    expected = np.sort_complex([1j * w for w in omegas for _ in range(2)])
    got = np.sort_complex(np.linalg.eigvals(im.G1))
    if np.max(np.abs(got - expected)) > 1e-10:
        raise RuntimeError("real internal model spectrum deviates from +-i w_k")
    return im, Hr, G2r


def build_observer_controller(ss: LinearStateSpace, freqs, q0: float, r0: float) -> ControllerRealization:
    """Observer-based internal-model controller.

    The servocompensator is the real rotation-block internal model driven by
    the tracking error; its stabilizing gain K1 makes G1 + B1 K1 Hurwitz via
    the Riccati equation with weights q0 I and r0 I (the Riccati gain enters
    with a plus sign here, so the conventional sign is flipped).  A full copy
    of the plant acts as observer, and K2 = K1 H couples it back.
    """
    if q0 <= 0.0 or r0 <= 0.0:
        raise ValueError(f"q0 and r0 must be positive, got q0={q0!r}, r0={r0!r}")
    margin = np.max(np.linalg.eigvals(ss.A).real)
    if margin >= 0.0:
        raise ValueError(f"plant must be exponentially stable (spectral abscissa {margin:.3e})")

    im, Hr, G2r = real_internal_model(ss, freqs)
    B1 = Hr @ ss.B
    # every B1 block is a transfer-function value; they must be nonsingular
    for f, sl in im.blocks:
        rows = B1[sl.start : sl.start + 2] if f == 0.0 else B1[sl]
        if np.linalg.matrix_rank(rows, tol=1e-10) < 2:
            raise RuntimeError(f"plant transfer value at omega = {f} is singular; cannot stabilize")

    _, Klqr = care_solve(im.G1, B1, q0 * np.eye(im.dim), r0 * np.eye(2))
    K1 = -Klqr
    if np.max(np.linalg.eigvals(im.G1 + B1 @ K1).real) >= 0.0:
        raise RuntimeError("internal model stabilization failed: G1 + B1 K1 not Hurwitz")
    K2 = K1 @ Hr

    n = ss.n
    nz = im.dim
    G1 = np.zeros((nz + n, nz + n))
    G1[:nz, :nz] = im.G1
    G1[nz:, :nz] = ss.B @ K1
    G1[nz:, nz:] = ss.A + ss.B @ K2
    G2 = np.vstack([G2r, np.zeros((n, 2))])
    K = np.hstack([K1, K2])
    return ControllerRealization(G1=G1, G2=G2, K=K, kappa=np.zeros((2, 2)))


@dataclass(frozen=True, eq=False)
class ClosedLoopSystem:
    """Closed loop of plant and controller with exogenous input (w_d, y_ref)."""

    Ae: np.ndarray
    Be: np.ndarray
    Ce: np.ndarray
    De: np.ndarray
    plant: LinearStateSpace
    controller: ControllerRealization

    @property
    def n(self) -> int:
        return self.Ae.shape[0]


def assemble_closed_loop(ss: LinearStateSpace, ctrl: ControllerRealization) -> ClosedLoopSystem:
    """Block assembly of the closed loop.

    Ae = [[A - B kappa C, B K], [G2 C, G1]], Be = [[Bd, B kappa], [0, -G2]],
    Ce = [C, 0], De = [0, -I]; the exogenous input is (w_d, y_ref).
    """
    n = ss.n
    nc = ctrl.n_c
    if ctrl.G2.shape != (nc, 2) or ctrl.K.shape != (2, nc) or ctrl.kappa.shape != (2, 2):
        raise ValueError(
            f"inconsistent controller dimensions: G1 {ctrl.G1.shape}, "
            f"G2 {ctrl.G2.shape}, K {ctrl.K.shape}, kappa {ctrl.kappa.shape}"
        )
    Ae = np.zeros((n + nc, n + nc))
    Ae[:n, :n] = ss.A - ss.B @ ctrl.kappa @ ss.C
    Ae[:n, n:] = ss.B @ ctrl.K
    Ae[n:, :n] = ctrl.G2 @ ss.C
    Ae[n:, n:] = ctrl.G1
    Be = np.zeros((n + nc, 6))
    Be[:n, :4] = ss.Bd
    Be[:n, 4:] = ss.B @ ctrl.kappa
    Be[n:, 4:] = -ctrl.G2
    Ce = np.hstack([ss.C, np.zeros((2, nc))])
    De = np.hstack([np.zeros((2, 4)), -np.eye(2)])
    return ClosedLoopSystem(Ae=Ae, Be=Be, Ce=Ce, De=De, plant=ss, controller=ctrl)


def regulation_zero_check(cl: ClosedLoopSystem, freqs) -> dict:
    """Norm of the closed-loop error transfer at each signed tracked frequency.

    An internal-model controller drives these to rounding level; a missing
    frequency shows up as an order-one residual.  The closed loop must be
    stable for the values to mean anything, so instability is rejected.
    """
    margin = np.max(np.linalg.eigvals(cl.Ae).real)
    if margin >= 0.0:
        raise ValueError(f"closed loop is not stable (spectral abscissa {margin:.3e})")
    out = {}
    eye = np.eye(cl.n)
    for w in signed_frequencies(freqs):
        G = cl.Ce @ np.linalg.solve(1j * w * eye - cl.Ae, cl.Be) + cl.De
        out[w] = float(np.linalg.norm(G, 2))
    return out
