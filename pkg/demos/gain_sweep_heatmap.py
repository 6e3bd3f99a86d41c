"""A small (c, c_d) gain sweep producing a heatmap-ready CSV.

Ten Sprott circuits on a 3-nearest-neighbour ring; each grid cell averages
the steady-state synchronization error over two random initial conditions.
The CSV schema is `c,c_d,e_s_mean,n_diverged` (nan where every run blew up).
"""
import numpy as np

from pwsnet import IntegratorConfig, MultiplexCoupling, NetworkModel, builtin_spec
from pwsnet.matgraph import build_ring_k_nearest
from pwsnet.sweep import SweepSpec, export_csv, run_sweep, write_manifest

L = build_ring_k_nearest(10, 3)
model = NetworkModel(
    node_field=builtin_spec("sprott"),
    N=10,
    coupling=MultiplexCoupling(c=0.0, Gamma=np.eye(3), L=L),
)
spec = SweepSpec(
    model=model,
    c_grid=np.linspace(0.0, 2.0, 6),
    cd_grid=np.linspace(0.0, 2.0, 6),
    cfg=IntegratorConfig(t_end=30.0, dt=5e-3, record_stride=10),
    seed=7,
    n_ic=2,
    ic_box=np.array([[0.0, 1.0], [0.0, 0.5], [0.0, 0.5]]),
    window_fraction=0.2,
)
result = run_sweep(spec)
export_csv(result, "gain_sweep.csv")
write_manifest(spec, "gain_sweep_manifest.json")
print(f"synchronized cells (e_s < 3e-2): {result.synchronized_count(3e-2)} / {result.e_s_mean.size}")
print("wrote gain_sweep.csv and gain_sweep_manifest.json")
