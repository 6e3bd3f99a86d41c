import numpy as np
import pytest

from pwsnet.dynamics import SignPolicy, builtin_spec, eval_field, signum
from pwsnet.errors import ParameterError
from pwsnet.integrate import IntegratorConfig, integrate
from pwsnet.matgraph import build_path, build_ring_k_nearest, build_single_link
from pwsnet.network import (
    MultiplexCoupling,
    NetworkModel,
    assemble,
    simulate,
    simulate_batch,
    simulation_csv_lines,
    sync_error,
)


def _two_node_model(name="sprott", c=0.7, cd=0.3):
    spec = builtin_spec(name)
    coupling = MultiplexCoupling(c=c, Gamma=np.eye(spec.n), L=build_single_link(2), cd=cd)
    return NetworkModel(node_field=spec, N=2, coupling=coupling)


def test_two_node_rhs_matches_pairwise_form():
    # for N = 2 the network reduces to
    # dx_1 = f(x_1) + c Gamma (x_2 - x_1) + cd Gamma_d sign(x_2 - x_1)
    model = _two_node_model()
    field = assemble(model, SignPolicy())
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(6)
        x1, x2 = x[:3], x[3:]
        got = field(x, 0.0)
        cp = model.coupling
        f1 = eval_field(model.node_field, x1) + cp.c * (x2 - x1) + cp.cd * np.sign(x2 - x1)
        f2 = eval_field(model.node_field, x2) + cp.c * (x1 - x2) + cp.cd * np.sign(x1 - x2)
        assert np.allclose(got, np.concatenate([f1, f2]), atol=1e-12)


def test_identical_states_kill_both_coupling_layers():
    spec = builtin_spec("relay")
    model = NetworkModel(
        node_field=spec,
        N=5,
        coupling=MultiplexCoupling(c=2.0, Gamma=np.eye(2), L=build_path(5), cd=1.5),
    )
    field = assemble(model, SignPolicy())
    x = np.tile([0.4, -0.7], 5)
    dx = field(x, 0.0)
    per_node = eval_field(spec, np.array([0.4, -0.7]))
    assert np.max(np.abs(dx - np.tile(per_node, 5))) <= 1e-8


def test_sync_manifold_is_invariant():
    model = NetworkModel(
        node_field=builtin_spec("sprott"),
        N=4,
        coupling=MultiplexCoupling(c=1.0, Gamma=np.eye(3), L=build_ring_k_nearest(4, 1), cd=0.5),
    )
    x0 = np.tile([0.3, 0.1, 0.2], 4)
    traj, metrics = simulate(model, x0, IntegratorConfig(t_end=2.0, dt=1e-3))
    assert np.max(metrics.e_s) <= 1e-8


def test_zero_gains_decouple_the_nodes():
    spec = builtin_spec("relay")
    model = NetworkModel(
        node_field=spec,
        N=3,
        coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(2), L=build_path(3), cd=0.0),
    )
    rng = np.random.default_rng(1)
    x0 = rng.random(6)
    cfg = IntegratorConfig(t_end=1.0, dt=1e-3)
    traj, _ = simulate(model, x0, cfg)
    for i in range(3):
        solo = integrate(lambda x, t: eval_field(spec, x, t), x0[2 * i : 2 * i + 2], cfg)
        assert np.allclose(traj.states[:, 2 * i : 2 * i + 2], solo.states, atol=1e-12)


def test_coupling_contributions_sum_to_zero():
    # both layers are antisymmetric in (i, j), so summing the coupling part
    # of the rhs over nodes must vanish identically
    spec = builtin_spec("sprott")
    model = NetworkModel(
        node_field=spec,
        N=6,
        coupling=MultiplexCoupling(
            c=1.3,
            Gamma=np.array([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]),
            L=build_ring_k_nearest(6, 2),
            cd=0.8,
        ),
    )
    field = assemble(model, SignPolicy())
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = rng.standard_normal(18)
        coupling_part = field(x, 0.0) - eval_field(spec, x.reshape(6, 3)).ravel()
        total = coupling_part.reshape(6, 3).sum(axis=0)
        assert np.max(np.abs(total)) <= 1e-10


def test_ring_rotation_equivariance():
    # rotating node labels around the ring is a graph automorphism, so the
    # rhs must commute with the corresponding permutation of the stack
    spec = builtin_spec("relay")
    N = 6
    model = NetworkModel(
        node_field=spec,
        N=N,
        coupling=MultiplexCoupling(c=0.9, Gamma=np.eye(2), L=build_ring_k_nearest(N, 2), cd=0.4),
    )
    field = assemble(model, SignPolicy())
    rng = np.random.default_rng(2)
    x = rng.standard_normal(N * 2).reshape(N, 2)
    perm = np.roll(np.arange(N), 1)
    lhs = field(x[perm].ravel(), 0.0).reshape(N, 2)
    rhs = field(x.ravel(), 0.0).reshape(N, 2)[perm]
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_sync_error_oracle():
    states = np.array([1.0, 0.0, 3.0, 4.0])  # two nodes in R^2, mean (2, 2)
    expected = 0.5 * (np.hypot(1.0, 2.0) + np.hypot(1.0, 2.0))
    assert sync_error(states, 2) == pytest.approx(expected)
    assert sync_error(np.tile([0.3, 0.4], 7), 2) <= 1e-15
    with pytest.raises(ParameterError):
        sync_error(np.zeros(5), 2)


def test_batch_matches_single_simulations():
    model = _two_node_model(c=0.0, cd=0.0)  # gains come from the batch
    cfg = IntegratorConfig(t_end=1.0, dt=1e-2, record_stride=2)
    gains = np.array([[0.9, 0.2], [0.1, 0.0]])
    rng = np.random.default_rng(6)
    ics = rng.random((2, 6))
    batch = simulate_batch(model, gains, ics, cfg, window_fraction=0.5)
    for b in range(2):
        m = _two_node_model(c=gains[b, 0], cd=gains[b, 1])
        _, metrics = simulate(m, ics[b], cfg)
        n_tail = max(1, int(round(0.5 * len(metrics.e_s))))
        assert batch.tail_mean_e_s[b] == pytest.approx(
            float(np.mean(metrics.e_s[-n_tail:])), abs=1e-12
        )
    assert not batch.diverged.any()


def test_batch_flags_divergence_without_poisoning_neighbours():
    # an unstable custom node field: one entry blows up, the other must come
    # out identical to its solo run
    from pwsnet.dynamics import AffineRelay

    unstable = AffineRelay(A=[[2.0]], b=[0.0], name="unstable")
    model = NetworkModel(
        node_field=unstable,
        N=2,
        coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(1), L=build_single_link(2)),
    )
    cfg = IntegratorConfig(t_end=15.0, dt=1e-2, record_stride=10)
    gains = np.zeros((2, 2))
    ics = np.array([[1.0, 2.0], [1e-9, 1e-9]])
    batch = simulate_batch(model, gains, ics, cfg)
    assert batch.diverged[0] and not batch.diverged[1]
    assert np.isnan(batch.tail_mean_e_s[0]) and np.isfinite(batch.blowup_times[0])
    solo = simulate_batch(model, gains[1:], ics[1:], cfg)
    assert batch.tail_mean_e_s[1] == solo.tail_mean_e_s[0]


def test_hysteresis_band_reduces_switching():
    # with a latch the relay output is constant inside the band, so the
    # field is smoother along a chattering trajectory
    model = _two_node_model(name="bistable", c=0.0, cd=1.0)
    x0 = np.array([0.5, 0.0, -0.5, 0.0])
    crisp = IntegratorConfig(t_end=5.0, dt=1e-3)
    latched = IntegratorConfig(
        t_end=5.0, dt=1e-3, sign_policy=SignPolicy(hysteresis_band=0.05)
    )
    _, m_crisp = simulate(model, x0, crisp)
    _, m_latched = simulate(model, x0, latched)
    assert np.isfinite(m_latched.e_s).all()
    # the latch admits excursions up to the band; the crisp policy chatters tighter
    assert m_latched.e_s[-1] <= 0.2


def test_validation_errors():
    spec = builtin_spec("relay")
    with pytest.raises(ParameterError):
        MultiplexCoupling(c=-1.0, Gamma=np.eye(2), L=build_path(3))
    with pytest.raises(ParameterError):
        NetworkModel(node_field=spec, N=4, coupling=MultiplexCoupling(c=1.0, Gamma=np.eye(2), L=build_path(3)))
    with pytest.raises(ParameterError):
        NetworkModel(node_field=spec, N=3, coupling=MultiplexCoupling(c=1.0, Gamma=np.eye(3), L=build_path(3)))
    model = _two_node_model()
    with pytest.raises(ParameterError):
        simulate(model, np.zeros(5), IntegratorConfig(t_end=1.0))


def test_simulation_csv_schema():
    model = _two_node_model(name="relay")
    traj, metrics = simulate(model, np.array([0.1, 0.2, 0.3, 0.4]), IntegratorConfig(t_end=0.1, dt=0.01))
    lines = list(simulation_csv_lines(traj, metrics))
    assert lines[0] == "t,e_s,x_1_1,x_1_2,x_2_1,x_2_2"
    slim = list(simulation_csv_lines(traj, metrics, include_states=False))
    assert slim[0] == "t,e_s"
    assert len(lines) == len(slim) == 1 + len(traj)
