"""Signal evaluation, matrix exponential, exact integration, error metrics."""

import numpy as np
import pytest

import flexsat as fx
from flexsat.simulate import _exosystem


def reference_yref():
    return fx.SignalSpec.create(
        (1.0, 2.0, 5.0),
        (1.0, 2.0),
        cos_coeffs=[[3.0, 0.0], [0.0, 1.5], [0.0, 0.0]],
        sin_coeffs=[[0.0, 0.0], [0.0, 0.0], [0.0, -1.0]],
    )


def reference_wd():
    return fx.SignalSpec.create((1.0, 2.0, 5.0), (0.0, 0.0, 10.0, 15.0))


# --- signals --------------------------------------------------------------------


def test_eval_signal_reference_values():
    y0 = fx.eval_signal(reference_yref(), 0.0)
    assert np.allclose(y0, [4.0, 3.5], atol=1e-15)
    t = np.array([0.0, 0.4, 2.0])
    wd = fx.eval_signal(reference_wd(), t)
    assert np.allclose(wd, np.tile([0.0, 0.0, 10.0, 15.0], (3, 1)), atol=1e-15)
    # spot check the closed form at one time
    y = fx.eval_signal(reference_yref(), 0.7)
    assert y[0] == pytest.approx(1.0 + 3.0 * np.cos(0.7), rel=1e-15)
    assert y[1] == pytest.approx(2.0 - np.sin(3.5) + 1.5 * np.cos(1.4), rel=1e-15)


def test_eval_signal_zero():
    z = fx.SignalSpec.zero(4)
    assert np.allclose(fx.eval_signal(z, 3.2), np.zeros(4), atol=0.0)


def test_signal_spec_validation():
    with pytest.raises(ValueError):
        fx.SignalSpec.create((2.0, 1.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        fx.SignalSpec.create((1.0,), (0.0, 0.0), cos_coeffs=[[1.0, 2.0], [3.0, 4.0]])


# --- matrix exponential ---------------------------------------------------------


def test_expm_zero_matrix():
    assert np.array_equal(fx.matrix_exponential(np.zeros((3, 3))), np.eye(3))


def test_expm_rotation_closed_form():
    for wt in (0.3, 2.0, 40.0):
        M = np.array([[0.0, wt], [-wt, 0.0]])
        want = np.array([[np.cos(wt), np.sin(wt)], [-np.sin(wt), np.cos(wt)]])
        assert np.allclose(fx.matrix_exponential(M), want, atol=1e-12)


def test_expm_symmetric_eigendecomposition_oracle():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((4, 4))
    M = 0.5 * (M + M.T)
    lam, Q = np.linalg.eigh(M)
    want = Q @ np.diag(np.exp(lam)) @ Q.T
    got = fx.matrix_exponential(M)
    assert np.max(np.abs(got - want)) < 1e-11


def test_expm_large_norm_rotation():
    # ||M|| ~ 1e4 exercises deep scaling and squaring
    w = 1.0e4
    M = np.array([[0.0, w], [-w, 0.0]])
    got = fx.matrix_exponential(M)
    want = np.array([[np.cos(w), np.sin(w)], [-np.sin(w), np.cos(w)]])
    assert np.max(np.abs(got - want)) < 1e-9


def test_expm_matches_scipy():
    import scipy.linalg as sla

    rng = np.random.default_rng(11)
    M = rng.standard_normal((6, 6))
    assert np.allclose(fx.matrix_exponential(M), sla.expm(M), atol=1e-12, rtol=1e-12)


def test_expm_rejects_nonsquare():
    with pytest.raises(ValueError):
        fx.matrix_exponential(np.zeros((2, 3)))


# --- exact propagation ----------------------------------------------------------


def known_4x4():
    """Stable 4x4 with a known eigendecomposition (orthogonal similarity)."""
    rng = np.random.default_rng(17)
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    lam = np.array([-0.5, -1.0, -2.0, -3.5])
    A = Q @ np.diag(lam) @ Q.T
    return A, Q, lam


def test_propagate_exactness_known_eigensystem():
    A, Q, lam = known_4x4()
    x0 = np.array([1.0, -2.0, 0.5, 0.25])
    t, xs = fx.propagate_autonomous(A, x0, 2.0, 0.01)
    want = (Q * np.exp(np.outer(t, lam))[:, None, :]) @ (Q.T @ x0)
    worst = np.max(np.abs(xs - want.reshape(xs.shape)))
    assert worst < 1e-10


def test_propagate_grid_invariance():
    A, _, _ = known_4x4()
    x0 = np.array([1.0, 0.0, -1.0, 2.0])
    t1, xs1 = fx.propagate_autonomous(A, x0, 1.0, 0.02)
    t2, xs2 = fx.propagate_autonomous(A, x0, 1.0, 0.01)
    assert np.max(np.abs(xs1 - xs2[::2])) < 1e-10


def test_propagate_validates_grid():
    A = -np.eye(2)
    with pytest.raises(ValueError):
        fx.propagate_autonomous(A, np.ones(2), 1.0, 0.0)
    with pytest.raises(ValueError):
        fx.propagate_autonomous(A, np.ones(2), 0.1, 0.5)


def test_propagate_detects_blowup():
    A = np.array([[400.0]])
    with pytest.raises(RuntimeError):
        fx.propagate_autonomous(A, np.array([1.0]), 10.0, 0.5)


# --- closed-loop integration ----------------------------------------------------


def test_integrate_zero_inputs_zero_state(passive_loop):
    yref = fx.SignalSpec.zero(2, (1.0, 2.0, 5.0))
    wd = fx.SignalSpec.zero(4, (1.0, 2.0, 5.0))
    trace = fx.integrate(passive_loop, np.zeros(passive_loop.n), yref, wd, 1.0, 0.01)
    assert np.max(np.abs(trace.y)) == 0.0
    assert np.max(np.abs(trace.e)) == 0.0
    assert np.max(np.abs(trace.u)) == 0.0
    assert np.max(trace.energy) == 0.0


def test_integrate_autonomous_energy_decay(ss10, default_config):
    # plant alone, no inputs: energy is nonincreasing and strictly smaller at
    # the end (exponential stability of the assembled model)
    cl = fx.assemble_closed_loop(ss10, fx.zero_controller())
    x0 = fx.project_initial_state(default_config.initial_profiles(), ss10)
    yref = fx.SignalSpec.zero(2)
    wd = fx.SignalSpec.zero(4)
    trace = fx.integrate(cl, x0, yref, wd, 15.0, 0.005)
    diffs = np.diff(trace.energy)
    assert np.all(diffs <= 1e-12 * trace.energy[0])
    assert trace.energy[-1] < trace.energy[0]
    assert trace.energy[-1] < 1e-8 * trace.energy[0]


def test_integrate_grid_invariance(passive_loop, default_config):
    from flexsat import analysis

    x0 = analysis.initial_state_from_config(default_config, passive_loop)
    yref = default_config.yref_spec()
    wd = default_config.wd_spec()
    tr1 = fx.integrate(passive_loop, x0, yref, wd, 3.0, 0.01)
    tr2 = fx.integrate(passive_loop, x0, yref, wd, 3.0, 0.005)
    assert np.max(np.abs(tr1.y - tr2.y[::2])) < 1e-10
    assert np.max(np.abs(tr1.e - tr2.e[::2])) < 1e-10


def test_integrate_validates_inputs(passive_loop):
    yref = fx.SignalSpec.zero(2, (1.0,))
    wd_wrong = fx.SignalSpec.zero(4, (2.0,))
    with pytest.raises(ValueError):
        fx.integrate(passive_loop, np.zeros(passive_loop.n), yref, wd_wrong, 1.0, 0.01)
    wd3 = fx.SignalSpec.zero(3, (1.0,))
    with pytest.raises(ValueError):
        fx.integrate(passive_loop, np.zeros(passive_loop.n), yref, wd3, 1.0, 0.01)
    wd = fx.SignalSpec.zero(4, (1.0,))
    with pytest.raises(ValueError):
        fx.integrate(passive_loop, np.zeros(3), yref, wd, 1.0, 0.01)


def test_energy_balance_forced_run(ss10, default_config):
    # inject sinusoidal forces through the hub disturbance channels and close
    # the discrete energy balance: E(T) - E(0) = int u.y - int v.D v
    cl = fx.assemble_closed_loop(ss10, fx.zero_controller())
    yref = fx.SignalSpec.zero(2, (1.0, 2.0))
    wd = fx.SignalSpec.create(
        (1.0, 2.0),
        np.zeros(4),
        cos_coeffs=[[0, 0, 0, 0], [0, 0, 0, 1.0]],
        sin_coeffs=[[0, 0, 1.0, 0], [0, 0, 0, 0]],
    )
    x0 = fx.project_initial_state(default_config.initial_profiles(), ss10)
    residuals = []
    for dt in (0.005, 0.0025):
        S, v0, E = _exosystem(yref, wd)
        ne, nw = cl.n, S.shape[0]
        A_aug = np.zeros((ne + nw, ne + nw))
        A_aug[:ne, :ne] = cl.Ae
        A_aug[:ne, ne:] = cl.Be @ E
        A_aug[ne:, ne:] = S
        t, xs = fx.propagate_autonomous(A_aug, np.concatenate([x0, v0]), 15.0, dt)
        xp = xs[:, : ss10.n]
        vel = xp[:, 2 * ss10.n_basis :]
        u_inj = (xs[:, ne:] @ E.T)[:, 2:4]
        y = xp @ ss10.C.T
        energy = 0.5 * np.einsum("ij,ij->i", xp, xp)
        supply = np.trapezoid(np.einsum("ij,ij->i", u_inj, y), t)
        dissip = np.trapezoid(np.einsum("ij,ij->i", vel, vel @ ss10.damping.T), t)
        residuals.append(abs(energy[-1] - energy[0] - supply + dissip))
    scale = max(1.0, ss10.energy(x0))
    assert residuals[0] < 1e-5 * scale
    assert residuals[1] < 0.5 * residuals[0]  # trapezoid quadrature order


def test_tracking_envelope_shrinks(passive_trace, observer_trace):
    # the last fifth of the run must sit strictly below the first tenth
    for trace in (passive_trace, observer_trace):
        nrm = np.linalg.norm(trace.e, axis=1)
        T = trace.t[-1]
        early = nrm[trace.t <= 0.1 * T].max()
        late = nrm[trace.t >= 0.8 * T].max()
        assert late < early


def test_trace_u_matches_controller_output(passive_trace, passive_loop):
    # sanity: at t = 0 the state is (x0, 0), so u(0) = -kappa e(0)
    e0 = passive_trace.e[0]
    u0 = passive_trace.u[0]
    assert np.allclose(u0, -passive_loop.controller.kappa @ e0, atol=1e-12)


# --- metrics and export ---------------------------------------------------------


def synthetic_trace(t, e):
    z2 = np.zeros((t.size, 2))
    return fx.SimulationTrace(t=t, y=z2, e=e, u=z2, energy=np.zeros(t.size))


def test_metrics_constant_error():
    t = np.linspace(0.0, 15.0, 3001)
    e = np.tile([1.0, 0.0], (t.size, 1))
    m = fx.error_metrics(synthetic_trace(t, e))
    assert m.l2sq == pytest.approx(15.0, rel=1e-12)
    assert m.decay_rate == pytest.approx(0.0, abs=1e-12)
    assert not m.floored


def test_metrics_exponential_decay():
    t = np.linspace(0.0, 10.0, 2001)
    e = np.stack([np.exp(-2.0 * t), np.zeros_like(t)], axis=1)
    m = fx.error_metrics(synthetic_trace(t, e))
    assert m.decay_rate == pytest.approx(-2.0, rel=0.01)


def test_metrics_zero_error():
    t = np.linspace(0.0, 1.0, 101)
    m = fx.error_metrics(synthetic_trace(t, np.zeros((101, 2))))
    assert m.l2sq == 0.0
    assert m.decay_rate == 0.0
    assert m.floored


def test_metrics_empty_trace_rejected():
    with pytest.raises(ValueError):
        fx.error_metrics(synthetic_trace(np.zeros(0), np.zeros((0, 2))))


def test_trace_csv_roundtrip(tmp_path, passive_trace):
    path = tmp_path / "trace.csv"
    passive_trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,y1,y2,e1,e2,u1,u2,energy"
    assert len(lines) == passive_trace.t.size + 1
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], passive_trace.t)  # full precision
    assert np.array_equal(data[:, 1:3], passive_trace.y)
    assert np.array_equal(data[:, 7], passive_trace.energy)
