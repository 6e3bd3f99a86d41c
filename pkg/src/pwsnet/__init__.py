"""pwsnet: synchronization analysis and simulation for networks of
piecewise-smooth systems.

Subpackages:
- matgraph: dense symmetric eigensolvers and graph Laplacians
- dynamics: piecewise-smooth node vector fields and sign policies
- quad: QUAD-type condition falsifiers and coupling-gain thresholds
- integrate: fixed-step integration of discontinuous right-hand sides
- network: coupled multiplex network assembly and simulation
- sweep: deterministic (c, c_d) parameter sweeps
- cli: the `pwsnet` command-line entry point
"""
from .dynamics import (
    AffineRelay,
    PwsOscillator,
    RelayTerm,
    SignPolicy,
    builtin_spec,
    eval_field,
    signum,
)
from .errors import (
    ConfigError,
    ConnectivityError,
    DivergenceError,
    HypothesisViolationError,
    ParameterError,
    PwsnetError,
    SymmetryError,
)
from .integrate import IntegratorConfig, Trajectory, integrate, steady_state_stat
from .matgraph import (
    Laplacian,
    Spectrum,
    build_complete,
    build_erdos_renyi,
    build_path,
    build_ring_k_nearest,
    build_single_link,
    load_edge_list,
    save_edge_list,
    spectral_norm,
    sym_eigen,
)
from .network import (
    MultiplexCoupling,
    NetworkModel,
    assemble,
    simulate,
    simulate_batch,
    sync_error,
)
from .quad import (
    QSplit,
    QuadReport,
    ThresholdReport,
    check_coupling_assumption,
    check_quad,
    check_relaxed_quad,
    simultaneous_diag,
    threshold_c1,
    threshold_t1,
    threshold_t2,
    threshold_t3,
    threshold_t4,
)
from .sweep import SweepResult, SweepSpec, export_csv, run_sweep

__version__ = "0.1.0"
