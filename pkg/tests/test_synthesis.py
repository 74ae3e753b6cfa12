"""Controller builders, Riccati/Sylvester solvers, closed-loop assembly."""

import math

import numpy as np
import pytest

import flexsat as fx
from flexsat.synthesis import signed_frequencies
from conftest import FREQS


# --- internal model and passive controller -------------------------------------


def test_internal_model_structure():
    im = fx.internal_model(FREQS)
    assert im.dim == 14
    eigs = np.sort_complex(np.linalg.eigvals(im.G1))
    want = np.sort_complex([1j * w for w in signed_frequencies(FREQS) for _ in range(2)])
    assert np.max(np.abs(eigs - want)) < 1e-12


def test_internal_model_rejects_bad_freqs():
    for bad in ([], [1.0, 1.0], [2.0, 1.0], [-1.0, 2.0]):
        with pytest.raises(ValueError):
            fx.internal_model(bad)


def test_passive_single_integrator_block():
    ctrl = fx.build_passive_controller((0.0,), 1.0, 3.0)
    assert ctrl.n_c == 2
    assert np.array_equal(ctrl.G1, np.zeros((2, 2)))
    assert np.array_equal(ctrl.G2, -np.eye(2))
    assert np.array_equal(ctrl.K, np.eye(2))
    assert np.array_equal(ctrl.kappa, 3.0 * np.eye(2))


def test_passive_dimension_and_structure(passive_ctrl):
    assert passive_ctrl.n_c == 14
    assert np.array_equal(passive_ctrl.K, -passive_ctrl.G2.T)
    assert np.array_equal(passive_ctrl.G1, -passive_ctrl.G1.T)  # skew symmetric


def test_passive_spectrum(passive_ctrl):
    eigs = np.sort_complex(np.linalg.eigvals(passive_ctrl.G1))
    want = np.sort_complex(
        [0.0, 0.0] + [s * 1j * w for w in (1.0, 2.0, 5.0) for s in (1, -1) for _ in range(2)]
    )
    assert np.max(np.abs(eigs - want)) < 1e-12


def test_passive_rejects_nonpositive_gains():
    with pytest.raises(ValueError):
        fx.build_passive_controller(FREQS, 0.0, 1.0)
    with pytest.raises(ValueError):
        fx.build_passive_controller(FREQS, 1.0, -2.0)


def test_passive_transfer_closed_form(passive_ctrl):
    # K (s I - G1)^{-1} G2 - kappa must equal
    # -c2 I - I/s - sum_k c1^2 s / (s^2 + w_k^2)
    c1, c2 = 2.5, 4.0
    for s in (0.7, 1.0 + 0.5j, -0.3 + 2.2j):
        got = (
            passive_ctrl.K @ np.linalg.solve(s * np.eye(14) - passive_ctrl.G1, passive_ctrl.G2)
            - passive_ctrl.kappa
        )
        coef = -c2 - 1.0 / s - sum(c1**2 * s / (s**2 + w**2) for w in (1.0, 2.0, 5.0))
        assert np.allclose(got, coef * np.eye(2), atol=1e-12)


# --- Sylvester solution ---------------------------------------------------------


def test_sylvester_zero_frequency_block(ss10):
    H = fx.solve_sylvester_H(ss10, FREQS)
    omegas = signed_frequencies(FREQS)
    i0 = omegas.index(0.0)
    H0 = H[2 * i0 : 2 * i0 + 2]
    want = ss10.C @ np.linalg.solve(-ss10.A, np.eye(ss10.n))
    assert np.max(np.abs(H0 - want)) < 1e-10
    assert np.max(np.abs(H0.imag)) < 1e-12


def test_sylvester_conjugate_rows(ss10):
    H = fx.solve_sylvester_H(ss10, FREQS)
    omegas = signed_frequencies(FREQS)
    for w in (1.0, 2.0, 5.0):
        i_pos = omegas.index(w)
        i_neg = omegas.index(-w)
        assert np.allclose(H[2 * i_neg : 2 * i_neg + 2], np.conj(H[2 * i_pos : 2 * i_pos + 2]), atol=1e-12)


def test_sylvester_rows_give_transfer_values(ss10):
    # H_k B equals the assembled transfer value at i w_k
    H = fx.solve_sylvester_H(ss10, FREQS)
    omegas = signed_frequencies(FREQS)
    for i, w in enumerate(omegas):
        got = H[2 * i : 2 * i + 2] @ ss10.B
        want = fx.galerkin_transfer(ss10, w)
        assert np.max(np.abs(got - want)) < 1e-10


def test_sylvester_residual(ss10):
    H = fx.solve_sylvester_H(ss10, FREQS)
    omegas = signed_frequencies(FREQS)
    G1 = np.zeros((H.shape[0], H.shape[0]), dtype=complex)
    for i, w in enumerate(omegas):
        G1[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = 1j * w * np.eye(2)
    G2C = np.tile(ss10.C, (len(omegas), 1))
    res = np.linalg.norm(G1 @ H - H @ ss10.A - G2C)
    assert res < 1e-8 * (1.0 + np.linalg.norm(H))


# --- Riccati solver -------------------------------------------------------------


def test_care_scalar_integrator():
    P, K = fx.care_solve(np.zeros((1, 1)), np.eye(1), np.eye(1), np.eye(1))
    assert P[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert K[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_care_scalar_unstable():
    P, K = fx.care_solve(np.eye(1), np.eye(1), 2.0 * np.eye(1), np.eye(1))
    assert P[0, 0] == pytest.approx(1.0 + math.sqrt(3.0), abs=1e-12)
    assert K[0, 0] == pytest.approx(1.0 + math.sqrt(3.0), abs=1e-12)
    # closed loop at -sqrt(3)
    assert (1.0 - K[0, 0]) == pytest.approx(-math.sqrt(3.0), abs=1e-12)


def test_care_zero_cost_stable_plant():
    A = np.diag([-1.0, -2.0])
    P, K = fx.care_solve(A, np.eye(2), np.zeros((2, 2)), np.eye(2))
    assert np.max(np.abs(P)) < 1e-12
    assert np.max(np.abs(K)) < 1e-12


def test_care_random_system():
    rng = np.random.default_rng(42)
    A = rng.standard_normal((5, 5))
    B = rng.standard_normal((5, 2))
    Q = np.eye(5)
    R = np.eye(2)
    P, K = fx.care_solve(A, B, Q, R)
    res = A.T @ P + P @ A - P @ B @ np.linalg.solve(R, B.T @ P) + Q
    assert np.linalg.norm(res) < 1e-8 * np.linalg.norm(P)
    assert np.min(np.linalg.eigvalsh(P)) > -1e-10
    assert fx.spectral_abscissa(A - B @ K) < 0.0


def test_care_rejects_unstabilizable():
    with pytest.raises(RuntimeError):
        fx.care_solve(np.diag([1.0, 2.0]), np.array([[1.0], [0.0]]), np.eye(2), np.eye(1))


# --- observer controller --------------------------------------------------------


def test_observer_dimensions(observer_ctrl, ss10):
    assert observer_ctrl.n_c == 14 + ss10.n
    assert np.array_equal(observer_ctrl.kappa, np.zeros((2, 2)))


def test_observer_internal_model_stabilized(ss10):
    im, Hr, G2r = fx.real_internal_model(ss10, FREQS)
    B1 = Hr @ ss10.B
    _, Klqr = fx.care_solve(im.G1, B1, 10.0 * np.eye(im.dim), 0.1 * np.eye(2))
    assert fx.spectral_abscissa(im.G1 + B1 @ (-Klqr)) < 0.0
    # the Riccati gain with the conventional sign does not stabilize the
    # skew-symmetric model; the sign flip is essential
    assert fx.spectral_abscissa(im.G1 + B1 @ Klqr) > 0.0


def test_real_internal_model_sylvester_identity(ss10):
    im, Hr, G2r = fx.real_internal_model(ss10, FREQS)
    res = np.linalg.norm(im.G1 @ Hr - Hr @ ss10.A - G2r @ ss10.C)
    assert res < 1e-8 * (1.0 + np.linalg.norm(Hr))


def test_observer_requires_stable_plant():
    ss0 = fx.assemble(fx.PhysicalParams(gamma=0.0), 6)
    with pytest.raises(ValueError):
        fx.build_observer_controller(ss0, FREQS, 10.0, 0.1)
    with pytest.raises(ValueError):
        fx.build_observer_controller(ss0, FREQS, -1.0, 0.1)


def test_observer_closed_loop_margin(observer_loop, passive_loop):
    m_obs = fx.stability_margin(observer_loop.Ae)
    m_pas = fx.stability_margin(passive_loop.Ae)
    assert m_obs > 0.0 and m_pas > 0.0
    assert m_obs > m_pas


# --- closed-loop assembly -------------------------------------------------------


def test_closed_loop_dimensions(passive_loop, ss10):
    assert passive_loop.Ae.shape == (56, 56)
    assert passive_loop.Be.shape == (56, 6)
    assert passive_loop.Ce.shape == (2, 56)
    assert np.array_equal(passive_loop.De, np.hstack([np.zeros((2, 4)), -np.eye(2)]))
    # block content
    n = ss10.n
    assert np.array_equal(passive_loop.Ae[n:, n:], passive_loop.controller.G1)
    assert np.array_equal(passive_loop.Be[:n, :4], ss10.Bd)


def test_zero_controller_loop(ss10):
    cl = fx.assemble_closed_loop(ss10, fx.zero_controller())
    assert np.array_equal(cl.Ae, ss10.A)
    w = 1.3
    G = cl.Ce @ np.linalg.solve(1j * w * np.eye(cl.n) - cl.Ae, cl.Be) + cl.De
    want_dist = ss10.C @ np.linalg.solve(1j * w * np.eye(ss10.n) - ss10.A, ss10.Bd)
    assert np.allclose(G[:, :4], want_dist, atol=1e-12)
    assert np.allclose(G[:, 4:], -np.eye(2), atol=1e-15)


def test_closed_loop_dimension_mismatch(ss10, passive_ctrl):
    bad = fx.ControllerRealization(
        G1=passive_ctrl.G1, G2=passive_ctrl.G2[:, :1], K=passive_ctrl.K, kappa=passive_ctrl.kappa
    )
    with pytest.raises(ValueError):
        fx.assemble_closed_loop(ss10, bad)


# --- regulation zeros -----------------------------------------------------------


def test_regulation_zeros_passive(passive_loop):
    zeros = fx.regulation_zero_check(passive_loop, FREQS)
    assert set(zeros) == {-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0}
    assert max(zeros.values()) < 1e-8


def test_regulation_zeros_observer(observer_loop):
    zeros = fx.regulation_zero_check(observer_loop, FREQS)
    assert max(zeros.values()) < 1e-8


def test_regulation_zeros_conjugate_pairs(passive_loop):
    zeros = fx.regulation_zero_check(passive_loop, FREQS)
    for w in (1.0, 2.0, 5.0):
        assert zeros[w] == pytest.approx(zeros[-w], rel=1e-6, abs=1e-12)


def test_regulation_zeros_incomplete_internal_model(ss10):
    ctrl = fx.build_passive_controller((0.0, 1.0, 2.0), 2.5, 4.0)
    cl = fx.assemble_closed_loop(ss10, ctrl)
    zeros = fx.regulation_zero_check(cl, FREQS)
    assert zeros[1.0] < 1e-8 and zeros[2.0] < 1e-8
    assert zeros[5.0] > 0.01 and zeros[-5.0] > 0.01


def test_regulation_zeros_reject_unstable(ss10):
    unstable = fx.ControllerRealization(
        G1=np.array([[0.5]]), G2=np.zeros((1, 2)), K=np.zeros((2, 1)), kappa=np.zeros((2, 2))
    )
    cl = fx.assemble_closed_loop(ss10, unstable)
    with pytest.raises(ValueError):
        fx.regulation_zero_check(cl, FREQS)
