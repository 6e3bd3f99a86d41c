"""Command-line entry point: reproducible experiments from INI config files.

One experiment = one config file; individual keys can be overridden with
repeated `--set section.key=value` flags (flag > file > default). Exit
codes: 0 success, 2 config error, 3 theorem-hypothesis violation,
4 divergence.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from . import matgraph
from .dynamics import AffineRelay, BUILTIN_NAMES, RelayTerm, SignPolicy, builtin_spec
from .errors import (
    ConfigError,
    ConnectivityError,
    DivergenceError,
    HypothesisViolationError,
    ParameterError,
    PwsnetError,
)
from .integrate import IntegratorConfig
from .network import (
    MultiplexCoupling,
    NetworkModel,
    simulate,
    write_simulation_csv,
)
from .quad import QSplit, threshold_c1, threshold_t1, threshold_t2, threshold_t3, threshold_t4
from .rng import make_generator, mix_seed
from .sweep import SweepSpec, export_csv, run_sweep, write_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_DIVERGENCE = 4

# Every recognized config key, with a short description; --help prints this
# and the loader rejects anything not listed here.
SCHEMA: dict[str, dict[str, str]] = {
    "system": {
        "name": f"builtin system, one of {', '.join(BUILTIN_NAMES)}",
        "a": "state matrix rows for a custom system, rows separated by ';'",
        "b": "constant drift vector for a custom system",
        "relay_d_<k>": "gain vector of the k-th relay term (k = 1, 2, ...)",
        "relay_w_<k>": "switching row of the k-th relay term",
    },
    "graph": {
        "kind": "ring | path | complete | single_link | er | edge_list",
        "n": "node count",
        "k": "neighbours per side (ring)",
        "p": "edge probability (er)",
        "seed": "graph seed (er)",
        "file": "edge-list path (edge_list)",
        "i": "first endpoint (single_link)",
        "j": "second endpoint (single_link)",
        "d_kind": "second (discontinuous) layer topology; defaults to the first layer",
        "d_k": "neighbours per side for the second layer",
        "d_p": "edge probability for the second layer",
        "d_seed": "graph seed for the second layer",
        "d_file": "edge-list path for the second layer",
        "d_i": "first endpoint for a single_link second layer",
        "d_j": "second endpoint for a single_link second layer",
    },
    "coupling": {
        "c": "diffusive gain",
        "cd": "discontinuous gain",
        "gamma": "inner coupling matrix (rows ';'-separated) or diagonal list",
        "gamma_d": "discontinuous inner coupling matrix or diagonal list",
    },
    "integrate": {
        "dt": "step size",
        "t_end": "horizon",
        "scheme": "rk4 | euler",
        "record_stride": "store every k-th step",
        "sign_at_zero": "value assigned to sign(0), in [-1, 1]",
        "hysteresis_band": "relay latch band (0 disables)",
    },
    "ics": {
        "x0": "explicit stacked initial state (N*n numbers)",
        "box": "per-coordinate sampling box, one 'lo hi' row per coordinate",
        "seed": "master seed for sampled initial conditions",
    },
    "sweep": {
        "c_grid": "ascending diffusive-gain grid",
        "cd_grid": "ascending discontinuous-gain grid",
        "n_ic": "initial conditions per cell",
        "window": "trailing window fraction for the steady-state statistic",
    },
    "thresholds": {
        "theorem": "T1 | T2 | C1 | T3 | T4",
        "q": "Q matrix (T1, T3)",
        "g": "G matrix (T1, T2)",
        "p": "P matrix (T3, T4); defaults to identity",
        "q_minus": "negative-definite part of Q (T2, T4)",
        "q_prime": "symmetric remainder of Q (T2, T4)",
        "q_diag": "diagonal q vector (C1)",
        "gamma_diag": "diagonal gamma vector (C1)",
        "m": "relaxed-QUAD slack vector (T3, T4)",
        "lambda2": "use this algebraic connectivity instead of the [graph] one",
    },
}


def _parse_matrix(text: str) -> np.ndarray:
    try:
        rows = [[float(v) for v in row.split()] for row in text.split(";")]
        M = np.array(rows)
    except ValueError as exc:
        raise ConfigError(f"cannot parse matrix {text!r}: {exc}") from None
    return M


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split()])
    except ValueError as exc:
        raise ConfigError(f"cannot parse vector {text!r}: {exc}") from None


def _parse_square_or_diag(text: str, n: int, what: str) -> np.ndarray:
    M = _parse_matrix(text)
    if M.shape == (1, n):
        return np.diag(M[0])
    if M.shape == (n, n):
        return M
    raise ConfigError(f"{what} must be a diagonal list of {n} values or an {n}x{n} matrix")


class Config:
    """Validated view over an INI experiment file plus --set overrides."""

    def __init__(self, path: str | None, overrides: list[str]):
        self.parser = configparser.ConfigParser()
        self.parser.optionxform = str.lower
        if path is not None:
            if not os.path.exists(path):
                raise ConfigError(f"config file not found: {path}")
            self.parser.read(path)
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(f"--set expects section.key=value, got {item!r}")
            target, value = item.split("=", 1)
            section, key = target.split(".", 1)
            if not self.parser.has_section(section):
                self.parser.add_section(section)
            self.parser.set(section, key.lower(), value)
        self._validate()

    def _validate(self):
        for section in self.parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            known = SCHEMA[section]
            for key in self.parser[section]:
                if key in known:
                    continue
                if section == "system" and (key.startswith("relay_d_") or key.startswith("relay_w_")):
                    continue
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    def get(self, section, key, default=None):
        return self.parser.get(section, key, fallback=default)

    def getfloat(self, section, key, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a number, got {raw!r}") from None

    def getint(self, section, key, default=None):
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from None

    def require(self, section, key):
        raw = self.get(section, key)
        if raw is None:
            raise ConfigError(f"missing required key {key!r} in section [{section}]")
        return raw


def build_system(cfg: Config):
    name = cfg.get("system", "name")
    if name is not None:
        return builtin_spec(name)
    A = _parse_matrix(cfg.require("system", "a"))
    n = A.shape[0]
    b_raw = cfg.get("system", "b")
    b = _parse_vector(b_raw) if b_raw else np.zeros(n)
    terms = []
    k = 1
    while cfg.get("system", f"relay_d_{k}") is not None:
        d = _parse_vector(cfg.require("system", f"relay_d_{k}"))
        w = _parse_vector(cfg.require("system", f"relay_w_{k}"))
        terms.append(RelayTerm(d=d, w=w))
        k += 1
    return AffineRelay(A=A, b=b, relay_terms=tuple(terms), name="custom")


def _build_layer(cfg: Config, prefix: str = "") -> matgraph.Laplacian | None:
    kind = cfg.get("graph", prefix + "kind")
    if kind is None:
        return None
    N = cfg.getint("graph", "n")
    if N is None and kind != "edge_list":
        raise ConfigError("[graph] n is required")
    if kind == "ring":
        return matgraph.build_ring_k_nearest(N, cfg.getint("graph", prefix + "k", 1))
    if kind == "path":
        return matgraph.build_path(N)
    if kind == "complete":
        return matgraph.build_complete(N)
    if kind == "single_link":
        return matgraph.build_single_link(
            N, cfg.getint("graph", prefix + "i", 0), cfg.getint("graph", prefix + "j", 1)
        )
    if kind == "er":
        p = cfg.getfloat("graph", prefix + "p")
        seed = cfg.getint("graph", prefix + "seed", 0)
        if p is None:
            raise ConfigError("[graph] er needs p")
        return matgraph.build_erdos_renyi(N, p, seed)
    if kind == "edge_list":
        return matgraph.load_edge_list(cfg.require("graph", prefix + "file"))
    raise ConfigError(f"unknown graph kind {kind!r}")


def build_graphs(cfg: Config) -> tuple[matgraph.Laplacian, matgraph.Laplacian | None]:
    L = _build_layer(cfg)
    if L is None:
        raise ConfigError("[graph] kind is required")
    return L, _build_layer(cfg, prefix="d_")


def build_integrator(cfg: Config) -> IntegratorConfig:
    policy = SignPolicy(
        at_zero=cfg.getfloat("integrate", "sign_at_zero", 0.0),
        hysteresis_band=cfg.getfloat("integrate", "hysteresis_band", 0.0),
    )
    t_end = cfg.getfloat("integrate", "t_end")
    if t_end is None:
        raise ConfigError("[integrate] t_end is required")
    return IntegratorConfig(
        t_end=t_end,
        dt=cfg.getfloat("integrate", "dt", 1e-3),
        scheme=cfg.get("integrate", "scheme", "rk4"),
        sign_policy=policy,
        record_stride=cfg.getint("integrate", "record_stride", 10),
    )


def build_model(cfg: Config) -> NetworkModel:
    spec = build_system(cfg)
    L, L_d = build_graphs(cfg)
    n = spec.n
    gamma_raw = cfg.get("coupling", "gamma")
    Gamma = _parse_square_or_diag(gamma_raw, n, "gamma") if gamma_raw else np.eye(n)
    gamma_d_raw = cfg.get("coupling", "gamma_d")
    Gamma_d = _parse_square_or_diag(gamma_d_raw, n, "gamma_d") if gamma_d_raw else np.eye(n)
    coupling = MultiplexCoupling(
        c=cfg.getfloat("coupling", "c", 0.0),
        Gamma=Gamma,
        L=L,
        cd=cfg.getfloat("coupling", "cd", 0.0),
        Gamma_d=Gamma_d,
        L_d=L_d,
    )
    return NetworkModel(node_field=spec, N=L.N, coupling=coupling)


def build_x0(cfg: Config, model: NetworkModel, seed_override: int | None) -> np.ndarray:
    x0_raw = cfg.get("ics", "x0")
    if x0_raw is not None:
        x0 = _parse_vector(x0_raw)
        if x0.shape != (model.dim,):
            raise ConfigError(f"[ics] x0 must hold {model.dim} numbers")
        return x0
    box_raw = cfg.get("ics", "box")
    if box_raw is None:
        raise ConfigError("[ics] needs either x0 or box")
    box = _parse_matrix(box_raw)
    if box.shape != (model.n, 2):
        raise ConfigError(f"[ics] box must have {model.n} 'lo hi' rows")
    seed = seed_override if seed_override is not None else cfg.getint("ics", "seed", 0)
    rng = make_generator(mix_seed(seed))
    lo, hi = box[:, 0], box[:, 1]
    return (lo + (hi - lo) * rng.random((model.N, model.n))).ravel()


def _write_report_csv(reports, path):
    keys = list(reports[0].as_dict())
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for rep in reports:
            d = rep.as_dict()
            fh.write(",".join(str(d.get(k, "")) for k in keys) + "\n")


def cmd_thresholds(cfg: Config, out_dir: str, args) -> int:
    theorem = cfg.require("thresholds", "theorem").upper()
    lam2_raw = cfg.getfloat("thresholds", "lambda2")
    L = lam2_raw if lam2_raw is not None else build_graphs(cfg)[0]
    spec = build_system(cfg) if (cfg.get("system", "name") or cfg.get("system", "a")) else None
    n = spec.n if spec is not None else None

    def matrix(key, required=True, default_identity=False):
        raw = cfg.get("thresholds", key)
        if raw is None:
            if default_identity and n is not None:
                return np.eye(n)
            if required:
                raise ConfigError(f"[thresholds] {key} is required for {theorem}")
            return None
        M = _parse_matrix(raw)
        return np.diag(M[0]) if M.shape[0] == 1 and M.shape[1] != 1 else M

    if theorem == "T1":
        Q = matrix("q")
        G = cfg.get("thresholds", "g")
        G = _parse_matrix(G) if G else np.eye(Q.shape[0])
        rep = threshold_t1(Q, L, G)
    elif theorem == "T2":
        rep = threshold_t2(QSplit(matrix("q_minus"), matrix("q_prime")), matrix("g"), L)
    elif theorem == "C1":
        rep = threshold_c1(
            _parse_vector(cfg.require("thresholds", "q_diag")),
            _parse_vector(cfg.require("thresholds", "gamma_diag")),
            L,
        )
    elif theorem in ("T3", "T4"):
        m = _parse_vector(cfg.require("thresholds", "m"))
        nn = len(m)
        P_raw = cfg.get("thresholds", "p")
        P = _parse_matrix(P_raw) if P_raw else np.eye(nn)
        gamma_raw = cfg.get("coupling", "gamma")
        Gamma = _parse_square_or_diag(gamma_raw, nn, "gamma") if gamma_raw else np.eye(nn)
        gamma_d_raw = cfg.get("coupling", "gamma_d")
        Gamma_d = _parse_square_or_diag(gamma_d_raw, nn, "gamma_d") if gamma_d_raw else np.eye(nn)
        if theorem == "T3":
            rep = threshold_t3(matrix("q"), m, P, Gamma, Gamma_d)
        else:
            rep = threshold_t4(QSplit(matrix("q_minus"), matrix("q_prime")), m, P, Gamma, Gamma_d)
    else:
        raise ConfigError(f"unknown theorem {theorem!r}")

    sys.stdout.write(rep.to_kv_text())
    summary = f"c* = {rep.c_star:.6g} (compare c {rep.c_comparison} c*)"
    if rep.cd_star is not None:
        summary += f", c_d* = {rep.cd_star:.6g} (compare c_d {rep.cd_comparison} c_d*)"
    print(summary)
    _write_report_csv([rep], os.path.join(out_dir, "thresholds.csv"))
    return EXIT_OK


def cmd_simulate(cfg: Config, out_dir: str, args) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg)
    x0 = build_x0(cfg, model, args.seed)
    traj, metrics = simulate(model, x0, icfg)
    path = os.path.join(out_dir, "trajectory.csv")
    write_simulation_csv(path, traj, metrics, include_states=not args.no_states)
    n_tail = max(1, int(round(0.1 * len(metrics.e_s))))
    tail = float(np.mean(metrics.e_s[-n_tail:]))
    print(f"simulated t_end={icfg.t_end} dt={icfg.dt} N={model.N}; trailing e_s = {tail:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(cfg: Config, out_dir: str, args) -> int:
    model = build_model(cfg)
    icfg = build_integrator(cfg)
    c_grid = _parse_vector(cfg.require("sweep", "c_grid"))
    cd_grid = _parse_vector(cfg.require("sweep", "cd_grid"))
    n_ic = cfg.getint("sweep", "n_ic", 5)
    seed = args.seed if args.seed is not None else cfg.getint("ics", "seed", 0)
    x0_raw = cfg.get("ics", "x0")
    explicit = None
    ic_box = None
    if x0_raw is not None:
        explicit = np.tile(_parse_vector(x0_raw), (n_ic, 1))
    else:
        box_raw = cfg.get("ics", "box")
        if box_raw is None:
            raise ConfigError("[ics] needs either x0 or box")
        ic_box = _parse_matrix(box_raw)
    spec = SweepSpec(
        model=model,
        c_grid=c_grid,
        cd_grid=cd_grid,
        cfg=icfg,
        seed=seed,
        n_ic=n_ic,
        ic_box=ic_box,
        explicit_ics=explicit,
        window_fraction=cfg.getfloat("sweep", "window", 0.1),
    )
    result = run_sweep(spec, workers=args.workers)
    csv_path = os.path.join(out_dir, "sweep.csv")
    export_csv(result, csv_path)
    write_manifest(spec, os.path.join(out_dir, "sweep_manifest.json"))
    n_div = int(result.n_diverged.sum())
    print(f"swept {len(c_grid)}x{len(cd_grid)} cells, {n_ic} ICs each; {n_div} diverged runs")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_graph(cfg: Config, out_dir: str, args) -> int:
    L, L_d = build_graphs(cfg)
    path = os.path.join(out_dir, "graph.edges")
    matgraph.save_edge_list(L, path)
    print(f"N = {L.N}, edges = {len(L.edges())}, lambda_2 = {L.lambda2!r}")
    print("spectrum = " + " ".join(repr(float(v)) for v in L.spectrum.eigenvalues))
    if not L.is_connected():
        print("warning: graph is disconnected (lambda_2 ~ 0)")
    if L_d is not None:
        d_path = os.path.join(out_dir, "graph_d.edges")
        matgraph.save_edge_list(L_d, d_path)
        print(f"second layer: N = {L_d.N}, edges = {len(L_d.edges())}, lambda_2 = {L_d.lambda2!r}")
    print(f"wrote {path}")
    return EXIT_OK


def _schema_epilog() -> str:
    lines = ["config keys (INI sections):"]
    for section, keys in SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, desc in keys.items():
            lines.append(f"    {key}: {desc}")
    return "\n".join(lines)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwsnet",
        description="Synchronization toolkit for networks of piecewise-smooth systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "thresholds": "compute critical coupling gains from the configured matrices",
        "simulate": "integrate the configured network and export a trajectory CSV",
        "sweep": "run a (c, c_d) grid sweep and export the heatmap CSV",
        "graph": "build the configured graph and report its spectrum",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(
            name,
            help=help_text,
            epilog=_schema_epilog(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", help="experiment config file (INI)")
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override one config key (repeatable)",
        )
        p.add_argument(
            "--no-states",
            action="store_true",
            help="omit per-node state columns from trajectory CSVs",
        )
    return parser


_COMMANDS = {
    "thresholds": cmd_thresholds,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "graph": cmd_graph,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = Config(args.config, args.set)
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](cfg, args.out, args)
    except (ConfigError, ParameterError, ConnectivityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolationError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except PwsnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
