"""End-to-end acceptance checks for the library.

Each test prints one `An: PASS` / `An: FAIL` line (run with `pytest -s`
to see them on success). Numeric targets marked in comments as reference
values are frozen here with their tolerances.
"""
import numpy as np
import pytest

from pwsnet.dynamics import SignPolicy, builtin_spec, eval_field
from pwsnet.errors import DivergenceError
from pwsnet.integrate import IntegratorConfig, integrate
from pwsnet.matgraph import (
    build_complete,
    build_erdos_renyi,
    build_path,
    build_ring_k_nearest,
    build_single_link,
    spectral_norm,
    sym_eigen,
)
from pwsnet.network import (
    MultiplexCoupling,
    NetworkModel,
    assemble,
    simulate,
    simulate_batch,
)
from pwsnet.quad import QSplit, check_quad, threshold_t1, threshold_t2, threshold_t3
from pwsnet.rng import make_generator
from pwsnet.sweep import SweepSpec, export_csv, run_sweep

LAMBDA2_REPORTED = 14.80  # algebraic connectivity of the reference ER(50, 0.5) realization


def _report(name: str, body) -> None:
    try:
        body()
    except BaseException as exc:
        print(f"{name}: FAIL ({exc})")
        raise
    print(f"{name}: PASS")


def _sym(A):
    return 0.5 * (A + A.T)


def test_a1_relay_critical_gain_definite_case():
    def body():
        relay = builtin_spec("relay")
        rep = threshold_t1(_sym(relay.A), LAMBDA2_REPORTED, np.eye(2))
        assert rep.c_star == pytest.approx(0.2068, abs=0.005), rep.c_star

    _report("A1", body)


def test_a2_relay_critical_gain_indefinite_case():
    def body():
        split = QSplit(Qminus=-np.eye(2), Qprime=np.diag([0.0, 4.0]))
        rep = threshold_t2(split, np.diag([0.0, 1.0]), LAMBDA2_REPORTED)
        assert rep.c_star == pytest.approx(0.2703, abs=0.005), rep.c_star

    _report("A2", body)


def test_a3_sprott_two_node_thresholds():
    def body():
        sprott = builtin_spec("sprott")
        assert spectral_norm(sprott.A) == pytest.approx(1.70, abs=0.01)
        rep = threshold_t3(
            sprott.A,
            m=np.array([2.0, 0.0, 0.0]),
            P=np.eye(3),
            Gamma=np.eye(3),
            Gamma_d=np.eye(3),
        )
        assert rep.c_star == pytest.approx(0.85, abs=0.005), rep.c_star
        assert rep.cd_star == 1.0

    _report("A3", body)


def test_a4_two_node_sprott_above_and_below_threshold():
    def body():
        sprott = builtin_spec("sprott")
        c_star = spectral_norm(sprott.A) / 2.0
        cd_star = 1.0
        model = NetworkModel(
            node_field=sprott,
            N=2,
            coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(3), L=build_single_link(2)),
        )
        x0 = np.array([0.8, 0.2, 0.2, 0.5, 0.1, 0.1])
        gains = np.array(
            [
                [1.002 * c_star, 1.002 * cd_star],
                [0.002 * c_star, 0.002 * cd_star],
            ]
        )
        cfg = IntegratorConfig(t_end=100.0, dt=1e-3, record_stride=10)
        batch = simulate_batch(model, gains, np.tile(x0, (2, 1)), cfg, window_fraction=0.1)
        assert not batch.diverged.any()
        above, below = batch.tail_mean_e_s
        assert above < 1e-3, f"just-above-threshold trailing e_s = {above:.3e}"
        assert below > 1e-2, f"far-below-threshold trailing e_s = {below:.3e}"

    _report("A4", body)


def test_a5_relay_network_on_random_graph():
    def body():
        relay = builtin_spec("relay")
        L = build_erdos_renyi(50, 0.5, seed=2018)
        c_star = spectral_norm(_sym(relay.A)) / L.lambda2
        x0 = (make_generator(42).random((50, 2)) * 4.0 - 2.0).ravel()
        cfg = IntegratorConfig(t_end=50.0, dt=1e-3, record_stride=10)

        model_hi = NetworkModel(
            node_field=relay,
            N=50,
            coupling=MultiplexCoupling(c=1.2 * c_star, Gamma=np.eye(2), L=L),
        )
        _, metrics = simulate(model_hi, x0, cfg)
        n_tail = max(1, len(metrics.e_s) // 10)
        tail = float(np.mean(metrics.e_s[-n_tail:]))
        assert tail < 1e-2, f"above-threshold trailing e_s = {tail:.3e}"

        model_lo = NetworkModel(
            node_field=relay,
            N=50,
            coupling=MultiplexCoupling(c=0.25 * c_star, Gamma=np.eye(2), L=L),
        )
        try:
            _, metrics_lo = simulate(model_lo, x0, cfg)
        except DivergenceError:
            pass  # blow-up is an accepted failure-to-synchronize outcome
        else:
            tail_lo = float(np.mean(metrics_lo.e_s[-n_tail:]))
            assert tail_lo > 1e-2, f"below-threshold trailing e_s = {tail_lo:.3e}"

    _report("A5", body)


def test_a6_bistable_needs_both_layers():
    def body():
        bistable = builtin_spec("bistable")
        L = build_path(10)
        model = NetworkModel(
            node_field=bistable,
            N=10,
            coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(2), L=L, L_d=L),
        )
        # half the nodes at each stable equilibrium
        x0 = np.concatenate([np.tile([1.0, 0.0], 5), np.tile([-1.0, 0.0], 5)])
        c_row = [0.5, 1.0, 2.0, 5.0, 10.0]
        gains = np.array([[c, 0.0] for c in c_row] + [[1.0, 1.0]])
        cfg = IntegratorConfig(t_end=100.0, dt=2e-3, record_stride=10)
        batch = simulate_batch(
            model, gains, np.tile(x0, (len(gains), 1)), cfg, window_fraction=0.1
        )
        assert not batch.diverged.any()
        failures = []
        for c, e_s in zip(c_row, batch.tail_mean_e_s[:-1]):
            if not e_s > 0.5:
                failures.append(f"diffusive-only c={c}: e_s = {e_s:.3f} (expected > 0.5)")
        both = batch.tail_mean_e_s[-1]
        if not both < 1e-2:
            failures.append(f"both layers (c=1, c_d=1): e_s = {both:.3f} (expected < 1e-2)")
        assert not failures, "; ".join(failures)

    _report("A6", body)


def test_a7_denser_discontinuous_layer_synchronizes_no_fewer_cells():
    def body():
        sprott = builtin_spec("sprott")
        L = build_ring_k_nearest(10, 3)
        grid = np.linspace(0.0, 2.0, 11)
        cfg = IntegratorConfig(t_end=30.0, dt=5e-3, record_stride=10)
        ic_box = np.array([[0.0, 1.0], [0.0, 0.5], [0.0, 0.5]])
        counts = {}
        for label, L_d in (("full", L), ("sparse", build_single_link(10, 0, 1))):
            model = NetworkModel(
                node_field=sprott,
                N=10,
                coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(3), L=L, L_d=L_d),
            )
            spec = SweepSpec(
                model=model,
                c_grid=grid,
                cd_grid=grid,
                cfg=cfg,
                seed=7,
                n_ic=2,
                ic_box=ic_box,
                window_fraction=0.2,
            )
            # tolerance sits above the chattering floor of the discontinuous
            # layer at this step size and below any unsynchronized plateau
            counts[label] = run_sweep(spec).synchronized_count(tol=3e-2)
        assert counts["full"] >= counts["sparse"], counts

    _report("A7", body)


def test_a8_property_suite(tmp_path):
    def body():
        # Laplacian invariants on every construction
        for lap in (
            build_ring_k_nearest(10, 3),
            build_path(10),
            build_complete(6),
            build_single_link(5, 0, 4),
            build_erdos_renyi(15, 0.4, seed=3),
        ):
            M = lap.matrix
            assert np.allclose(M, M.T)
            assert np.max(np.abs(M.sum(axis=1))) <= 1e-10
            off = M[~np.eye(lap.N, dtype=bool)]
            assert set(np.unique(off)).issubset({0.0, -1.0})
            assert abs(lap.spectrum.eigenvalues[0]) <= 1e-9

        # eigensolver agrees with an independent oracle for n <= 4
        rng = np.random.default_rng(0)
        for n in (2, 3, 4):
            for _ in range(10):
                A = rng.standard_normal((n, n))
                A = 0.5 * (A + A.T)
                assert np.allclose(
                    sym_eigen(A).eigenvalues, np.linalg.eigvalsh(A), atol=1e-7
                )

        # the increment bound is an identity for linear fields with Q = sym(A)
        from pwsnet.dynamics import AffineRelay

        A = np.array([[-1.0, 2.0], [0.5, -3.0]])
        rep = check_quad(
            AffineRelay(A=A, b=np.zeros(2), name="linear"),
            np.eye(2),
            _sym(A),
            np.array([[-5.0, 5.0], [-5.0, 5.0]]),
            n_samples=20_000,
        )
        assert abs(rep.min_margin) <= 1e-9

        # 4th-order convergence against the matrix-exponential oracle
        from scipy.linalg import expm

        Alin = np.array([[0.0, 1.0], [-4.0, -0.4]])
        x0 = np.array([1.0, -0.5])
        exact = expm(Alin) @ x0

        def err(dt):
            cfg = IntegratorConfig(t_end=1.0, dt=dt, record_stride=int(round(1.0 / dt)))
            return np.linalg.norm(integrate(lambda x, t: Alin @ x, x0, cfg).states[-1] - exact)

        assert err(0.02) / err(0.01) >= 2.0**4 * 0.8

        # coupling contributions cancel across the network
        sprott = builtin_spec("sprott")
        model = NetworkModel(
            node_field=sprott,
            N=6,
            coupling=MultiplexCoupling(
                c=1.1, Gamma=np.eye(3), L=build_ring_k_nearest(6, 2), cd=0.7
            ),
        )
        net = assemble(model, SignPolicy())
        for _ in range(100):
            x = rng.standard_normal(18)
            coupling_part = net(x, 0.0) - eval_field(sprott, x.reshape(6, 3)).ravel()
            assert np.max(np.abs(coupling_part.reshape(6, 3).sum(axis=0))) <= 1e-10

        # the synchronization manifold is invariant
        x_sync = np.tile([0.3, 0.1, 0.2], 6)
        _, metrics = simulate(model, x_sync, IntegratorConfig(t_end=2.0, dt=1e-3))
        assert np.max(metrics.e_s) <= 1e-8

        # worker count cannot change sweep output bytes
        sw = SweepSpec(
            model=model,
            c_grid=np.array([0.0, 1.0]),
            cd_grid=np.array([0.0, 0.5]),
            cfg=IntegratorConfig(t_end=0.5, dt=1e-2, record_stride=5),
            seed=5,
            n_ic=2,
            ic_box=np.array([[0.0, 1.0], [0.0, 0.5], [0.0, 0.5]]),
        )
        p1, p2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
        export_csv(run_sweep(sw, workers=1), p1)
        export_csv(run_sweep(sw, workers=2), p2)
        assert p1.read_bytes() == p2.read_bytes()

    _report("A8", body)
