"""Fixed-step integration of discontinuous right-hand sides.

Classical explicit schemes (RK4 by default) with the sign policy applied
at every stage; trajectories on switching surfaces therefore chatter
within a band proportional to the step size rather than sliding exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import SignPolicy
from .errors import DivergenceError, ParameterError

DIVERGENCE_NORM = 1e9

SCHEMES = ("rk4", "euler")


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    dt: float = 1e-3
    scheme: str = "rk4"
    sign_policy: SignPolicy = field(default_factory=SignPolicy)
    record_stride: int = 10

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.t_end <= 0.0:
            raise ParameterError(f"t_end must be positive, got {self.t_end}")
        if self.record_stride < 1:
            raise ParameterError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, d)
    dt_used: float
    scheme_used: str

    def __len__(self) -> int:
        return len(self.times)


def rk4_step(f: Callable, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    k1 = f(x, t)
    k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f: Callable, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    return x + dt * f(x, t)


_STEPPERS = {"rk4": rk4_step, "euler": euler_step}


def integrate(field: Callable, x0: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    """Integrate dx/dt = field(x, t) from x0 over [0, t_end].

    field may carry an optional end_step(x, t) attribute (used for the
    hysteresis latch), invoked once per accepted step. Raises
    DivergenceError with the blow-up time if the state leaves the ball of
    radius DIVERGENCE_NORM or turns non-finite.
    """
    x = np.asarray(x0, dtype=float).copy()
    step = _STEPPERS[cfg.scheme]
    end_step = getattr(field, "end_step", None)
    n_steps = cfg.n_steps
    stride = cfg.record_stride
    times = [0.0]
    states = [x.copy()]
    t = 0.0
    for i in range(1, n_steps + 1):
        x = step(field, x, t, cfg.dt)
        t = i * cfg.dt
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > DIVERGENCE_NORM:
            raise DivergenceError(f"trajectory diverged at t = {t:.6g}", t=t)
        if end_step is not None:
            end_step(x, t)
        if i % stride == 0:
            times.append(t)
            states.append(x.copy())
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        dt_used=cfg.dt,
        scheme_used=cfg.scheme,
    )


def steady_state_stat(
    traj: Trajectory, metric: Callable[[np.ndarray], float], window_fraction: float
) -> float:
    """Mean of metric(state) over the trailing window_fraction of samples."""
    if not 0.0 < window_fraction <= 1.0:
        raise ParameterError(f"window_fraction must be in (0, 1], got {window_fraction}")
    if len(traj) == 0:
        raise ParameterError("empty trajectory")
    n_tail = max(1, int(round(window_fraction * len(traj))))
    tail = traj.states[-n_tail:]
    return float(np.mean([metric(row) for row in tail]))


def trajectory_csv_lines(traj: Trajectory, extra: dict[str, np.ndarray] | None = None):
    """CSV lines `t,x_1,...,x_d` (plus optional named columns after t)."""
    d = traj.states.shape[1]
    extra = extra or {}
    header = ["t"] + list(extra) + [f"x_{i + 1}" for i in range(d)]
    yield ",".join(header)
    for i, t in enumerate(traj.times):
        row = [repr(float(t))]
        row += [repr(float(col[i])) for col in extra.values()]
        row += [repr(float(v)) for v in traj.states[i]]
        yield ",".join(row)


def write_trajectory_csv(traj: Trajectory, path, extra: dict[str, np.ndarray] | None = None):
    with open(path, "w") as fh:
        for line in trajectory_csv_lines(traj, extra):
            fh.write(line + "\n")
