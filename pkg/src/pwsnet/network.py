"""Coupled-network vector fields, simulation, and synchronization metrics.

Node i obeys
    dx_i/dt = f(x_i; t) + c sum_j a_ij Gamma (x_j - x_i)
              + c_d sum_j ad_ij Gamma_d sign(x_j - x_i),
with componentwise sign and (possibly) different adjacency structures
a, ad for the diffusive and discontinuous layers. Both sums are
evaluated in difference form, so identical node states give exactly
zero coupling and the synchronization manifold is invariant to the
last bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import AffineRelay, SignPolicy, VectorFieldSpec, eval_field, signum
from .errors import DivergenceError, ParameterError
from .integrate import DIVERGENCE_NORM, IntegratorConfig, Trajectory, integrate
from .matgraph import Laplacian


@dataclass
class MultiplexCoupling:
    """Gains, inner coupling matrices, and per-layer Laplacians."""

    c: float
    Gamma: np.ndarray
    L: Laplacian
    cd: float = 0.0
    Gamma_d: Optional[np.ndarray] = None
    L_d: Optional[Laplacian] = None

    def __post_init__(self):
        if self.c < 0.0 or self.cd < 0.0:
            raise ParameterError("coupling gains must be nonnegative")
        self.Gamma = np.asarray(self.Gamma, dtype=float)
        if self.Gamma_d is None:
            self.Gamma_d = np.eye(self.Gamma.shape[0])
        else:
            self.Gamma_d = np.asarray(self.Gamma_d, dtype=float)
        if self.L_d is None:
            self.L_d = self.L
        if self.L_d.N != self.L.N:
            raise ParameterError("both coupling layers must have the same node count")


@dataclass
class NetworkModel:
    node_field: VectorFieldSpec
    N: int
    coupling: MultiplexCoupling

    def __post_init__(self):
        n = self.node_field.n
        if self.coupling.L.N != self.N:
            raise ParameterError(f"Laplacian size {self.coupling.L.N} != N = {self.N}")
        for name, M in (("Gamma", self.coupling.Gamma), ("Gamma_d", self.coupling.Gamma_d)):
            if M.shape != (n, n):
                raise ParameterError(f"{name} must be {n}x{n}, got {M.shape}")

    @property
    def n(self) -> int:
        return self.node_field.n

    @property
    def dim(self) -> int:
        return self.N * self.n


@dataclass
class SyncMetrics:
    """Global synchronization error per recorded sample (plus per-node norms)."""

    times: np.ndarray
    e_s: np.ndarray
    per_node: np.ndarray  # (n_samples, N) per-node error norms


def sync_error(states: np.ndarray, n: int) -> float:
    """e_s = mean over nodes of || x_i - mean_j(x_j) ||_2 for one stacked state."""
    e_s, _ = sync_error_detail(states, n)
    return e_s


def sync_error_detail(states: np.ndarray, n: int) -> tuple[float, np.ndarray]:
    states = np.asarray(states, dtype=float)
    if states.size % n != 0:
        raise ParameterError(f"state length {states.size} is not a multiple of n = {n}")
    X = states.reshape(-1, n)
    E = X - X.mean(axis=0)
    norms = np.linalg.norm(E, axis=1)
    return float(norms.mean()), E


class NetworkField:
    """Evaluatable right-hand side of the coupled network on R^{N n}.

    Accepts flat stacked states of shape (N*n,) or batches (B, N*n); the
    per-node relay latch (hysteresis) is carried here, per trajectory, and
    committed only at step boundaries via end_step.
    """

    def __init__(self, model: NetworkModel, policy: SignPolicy):
        self.model = model
        self.policy = policy
        cp = model.coupling
        # adjacency (difference) form: exactly zero coupling on the
        # synchronization manifold, no sign(0) contribution from i = j
        self._adj = np.diag(np.diag(cp.L.matrix)) - cp.L.matrix
        self._adj_d = np.diag(np.diag(cp.L_d.matrix)) - cp.L_d.matrix
        self._relay = model.node_field if isinstance(model.node_field, AffineRelay) else None
        self._use_latch = self.policy.hysteresis_band > 0.0 and self._relay is not None
        self._latch = None  # (node, relay term) latched signs, seeded on first eval

    def _node_field(self, X: np.ndarray, t: float) -> np.ndarray:
        spec = self.model.node_field
        if not self._use_latch:
            return eval_field(spec, X, t, self.policy)
        # hysteresis path: affine part plus latched relay terms
        if self._latch is None:
            self._latch = np.stack(
                [signum(X @ term.w, self.policy) for term in self._relay.relay_terms], axis=-1
            )
        band = self.policy.hysteresis_band
        dx = X @ self._relay.A.T + self._relay.b
        for k, term in enumerate(self._relay.relay_terms):
            arg = X @ term.w
            fresh = signum(arg, self.policy)
            s = np.where(np.abs(arg) > band, fresh, self._latch[..., k])
            dx = dx + s[..., None] * term.d
        return dx

    def end_step(self, x_flat: np.ndarray, t: float) -> None:
        if self._latch is None:
            return
        band = self.policy.hysteresis_band
        X = x_flat.reshape(-1, self.model.n)
        for k, term in enumerate(self._relay.relay_terms):
            arg = X @ term.w
            outside = np.abs(arg) > band
            self._latch[..., k] = np.where(outside, np.sign(arg), self._latch[..., k])

    def __call__(self, x_flat: np.ndarray, t: float) -> np.ndarray:
        model, cp = self.model, self.model.coupling
        N, n = model.N, model.n
        batched = x_flat.ndim == 2
        X = x_flat.reshape(-1, N, n) if batched else x_flat.reshape(N, n)
        dX = self._node_field(X, t)
        if cp.c != 0.0 or cp.cd != 0.0:
            if batched:
                diff = X[:, None, :, :] - X[:, :, None, :]  # (B, i, j, n) = x_j - x_i
                sig = "ij,bijh->bih"
            else:
                diff = X[None, :, :] - X[:, None, :]
                sig = "ij,ijh->ih"
            if cp.c != 0.0:
                dX = dX + cp.c * np.einsum(sig, self._adj, diff) @ cp.Gamma.T
            if cp.cd != 0.0:
                acc = np.einsum(sig, self._adj_d, signum(diff, self.policy))
                dX = dX + cp.cd * acc @ cp.Gamma_d.T
        return dX.reshape(x_flat.shape)


def assemble(model: NetworkModel, policy: SignPolicy = SignPolicy()) -> NetworkField:
    return NetworkField(model, policy)


def simulate(
    model: NetworkModel, x0: np.ndarray, cfg: IntegratorConfig
) -> tuple[Trajectory, SyncMetrics]:
    """Integrate the assembled network and compute e_s on recorded samples."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.dim,):
        raise ParameterError(f"x0 must have shape ({model.dim},), got {x0.shape}")
    field = assemble(model, cfg.sign_policy)
    traj = integrate(field, x0, cfg)
    n = model.n
    e_s = np.empty(len(traj))
    per_node = np.empty((len(traj), model.N))
    for i, row in enumerate(traj.states):
        es, E = sync_error_detail(row, n)
        e_s[i] = es
        per_node[i] = np.linalg.norm(E, axis=1)
    return traj, SyncMetrics(times=traj.times, e_s=e_s, per_node=per_node)


@dataclass
class BatchResult:
    """Trailing-window mean e_s per batch entry, with divergence flags."""

    tail_mean_e_s: np.ndarray  # nan where diverged
    diverged: np.ndarray  # bool per entry
    blowup_times: np.ndarray  # nan where finite


def simulate_batch(
    model: NetworkModel,
    gains: np.ndarray,  # (B, 2) columns (c, cd); overrides the model's gains
    ics: np.ndarray,  # (B, N*n)
    cfg: IntegratorConfig,
    window_fraction: float = 0.1,
) -> BatchResult:
    """Integrate B independent copies of the network in one vectorized loop.

    Each batch entry has its own (c, cd) and initial condition. Diverged
    entries are frozen and flagged; the returned statistic is the mean of
    e_s over the trailing window of recorded samples. Results are a pure
    function of the arguments (no scheduling sensitivity).
    """
    gains = np.asarray(gains, dtype=float)
    ics = np.asarray(ics, dtype=float)
    B = gains.shape[0]
    if ics.shape != (B, model.dim):
        raise ParameterError(f"ics must have shape ({B}, {model.dim})")
    N, n = model.N, model.n
    cp = model.coupling
    adj = np.diag(np.diag(cp.L.matrix)) - cp.L.matrix
    adj_d = np.diag(np.diag(cp.L_d.matrix)) - cp.L_d.matrix
    Gamma_T, Gamma_d_T = cp.Gamma.T.copy(), cp.Gamma_d.T.copy()
    c = gains[:, 0][:, None, None]
    cd = gains[:, 1][:, None, None]
    any_cd = bool(np.any(gains[:, 1] != 0.0))
    policy = cfg.sign_policy
    spec = model.node_field

    def rhs(X: np.ndarray, t: float) -> np.ndarray:  # X: (B, N, n)
        dX = eval_field(spec, X, t, policy)
        diff = X[:, None, :, :] - X[:, :, None, :]  # (B, i, j, n) = x_j - x_i
        dX = dX + c * (np.einsum("ij,bijh->bih", adj, diff) @ Gamma_T)
        if any_cd:
            acc = np.einsum("ij,bijh->bih", adj_d, signum(diff, policy))
            dX = dX + cd * (acc @ Gamma_d_T)
        return dX

    X = ics.reshape(B, N, n).copy()
    alive = np.ones(B, dtype=bool)
    blowup = np.full(B, np.nan)
    n_steps = cfg.n_steps
    stride = cfg.record_stride
    dt = cfg.dt
    recorded = [_batch_e_s(X)]
    for i in range(1, n_steps + 1):
        if cfg.scheme == "rk4":
            t = (i - 1) * dt
            k1 = rhs(X, t)
            k2 = rhs(X + 0.5 * dt * k1, t + 0.5 * dt)
            k3 = rhs(X + 0.5 * dt * k2, t + 0.5 * dt)
            k4 = rhs(X + dt * k3, t + dt)
            X_new = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            X_new = X + dt * rhs(X, (i - 1) * dt)
        finite = np.isfinite(X_new).all(axis=(1, 2))
        norms = np.where(finite, np.linalg.norm(np.nan_to_num(X_new), axis=(1, 2)), np.inf)
        ok = finite & (norms <= DIVERGENCE_NORM)
        newly_dead = alive & ~ok
        if np.any(newly_dead):
            blowup[newly_dead] = i * dt
            X_new[newly_dead] = 0.0  # freeze to keep the batch arithmetic finite
            alive = alive & ok
        X = np.where(alive[:, None, None], X_new, X)
        if i % stride == 0:
            recorded.append(_batch_e_s(X))
    rec = np.asarray(recorded)  # (n_rec, B)
    n_tail = max(1, int(round(window_fraction * rec.shape[0])))
    tail = rec[-n_tail:].mean(axis=0)
    tail = np.where(alive, tail, np.nan)
    return BatchResult(tail_mean_e_s=tail, diverged=~alive, blowup_times=blowup)


def _batch_e_s(X: np.ndarray) -> np.ndarray:
    E = X - X.mean(axis=1, keepdims=True)
    return np.linalg.norm(E, axis=2).mean(axis=1)


def simulation_csv_lines(traj: Trajectory, metrics: SyncMetrics, include_states: bool = True):
    """CSV lines `t,e_s[,x_1_1,...,x_N_n]`, one row per recorded sample."""
    d = traj.states.shape[1]
    N = metrics.per_node.shape[1]
    n = d // N
    header = ["t", "e_s"]
    if include_states:
        header += [f"x_{i + 1}_{h + 1}" for i in range(N) for h in range(n)]
    yield ",".join(header)
    for i, t in enumerate(traj.times):
        row = [repr(float(t)), repr(float(metrics.e_s[i]))]
        if include_states:
            row += [repr(float(v)) for v in traj.states[i]]
        yield ",".join(row)


def write_simulation_csv(path, traj: Trajectory, metrics: SyncMetrics, include_states: bool = True):
    with open(path, "w") as fh:
        for line in simulation_csv_lines(traj, metrics, include_states):
            fh.write(line + "\n")
