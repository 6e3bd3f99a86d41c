"""Deterministic (c, c_d) grid sweeps over random initial conditions.

Initial conditions are keyed by (master seed, c index, cd index, ic index)
through the documented splitmix64 mixing, so every cell's draws are
independent of grid shape, execution order, and worker count. Cells are
integrated in fixed-size batches; batching is part of the spec, not of
the scheduling, so results are byte-reproducible.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .integrate import IntegratorConfig
from .network import MultiplexCoupling, NetworkModel, simulate_batch
from .rng import make_generator, mix_seed

BATCH_SIZE = 64


@dataclass
class SweepSpec:
    model: NetworkModel  # gains in model.coupling are ignored; grids rule
    c_grid: np.ndarray
    cd_grid: np.ndarray
    cfg: IntegratorConfig
    seed: int = 0
    n_ic: int = 5
    ic_box: Optional[np.ndarray] = None  # (n, 2) per-coordinate box, same for every node
    explicit_ics: Optional[np.ndarray] = None  # (n_ic, N*n); overrides ic_box
    window_fraction: float = 0.1

    def __post_init__(self):
        self.c_grid = np.asarray(self.c_grid, dtype=float)
        self.cd_grid = np.asarray(self.cd_grid, dtype=float)
        for name, g in (("c_grid", self.c_grid), ("cd_grid", self.cd_grid)):
            if g.size == 0 or np.any(np.diff(g) < 0):
                raise ParameterError(f"{name} must be a nonempty ascending list")
        if self.n_ic < 1:
            raise ParameterError("n_ic must be >= 1")
        if self.explicit_ics is not None:
            self.explicit_ics = np.asarray(self.explicit_ics, dtype=float)
            if self.explicit_ics.shape != (self.n_ic, self.model.dim):
                raise ParameterError(
                    f"explicit_ics must have shape ({self.n_ic}, {self.model.dim})"
                )
        elif self.ic_box is None:
            raise ParameterError("either ic_box or explicit_ics is required")
        else:
            self.ic_box = np.asarray(self.ic_box, dtype=float)
            if self.ic_box.shape != (self.model.n, 2):
                raise ParameterError(f"ic_box must have shape ({self.model.n}, 2)")

    def initial_condition(self, ci: int, cdi: int, ic: int) -> np.ndarray:
        if self.explicit_ics is not None:
            return self.explicit_ics[ic]
        rng = make_generator(mix_seed(self.seed, ci, cdi, ic))
        lo, hi = self.ic_box[:, 0], self.ic_box[:, 1]
        return (lo + (hi - lo) * rng.random((self.model.N, self.model.n))).ravel()

    def provenance(self) -> dict:
        return {
            "seed": self.seed,
            "dt": self.cfg.dt,
            "t_end": self.cfg.t_end,
            "scheme": self.cfg.scheme,
            "record_stride": self.cfg.record_stride,
            "n_ic": self.n_ic,
            "window_fraction": self.window_fraction,
            "c_grid": self.c_grid.tolist(),
            "cd_grid": self.cd_grid.tolist(),
            "N": self.model.N,
            "node_field": self.model.node_field.name,
            "explicit_ics": self.explicit_ics is not None,
            "ic_box": None if self.ic_box is None else self.ic_box.tolist(),
        }


@dataclass
class SweepResult:
    c_grid: np.ndarray
    cd_grid: np.ndarray
    e_s_mean: np.ndarray  # (len(c_grid), len(cd_grid)); nan where every run diverged
    n_diverged: np.ndarray  # int matrix
    provenance: dict = field(default_factory=dict)

    def synchronized_count(self, tol: float) -> int:
        with np.errstate(invalid="ignore"):
            return int(np.sum(self.e_s_mean < tol))


def _run_chunk(payload) -> np.ndarray:
    model, cfg, window_fraction, gains, ics = payload
    res = simulate_batch(model, gains, ics, cfg, window_fraction)
    return res.tail_mean_e_s


def run_sweep(spec: SweepSpec, workers: int = 1, batch_size: int = BATCH_SIZE) -> SweepResult:
    """Run every (c, cd, ic) combination and aggregate trailing-window e_s.

    Diverged runs are excluded from the cell mean and counted; a cell where
    every run diverged carries nan. workers > 1 distributes fixed chunks
    to a process pool; the chunking (and thus every floating-point
    operation) is independent of the worker count.
    """
    nc, ncd = len(spec.c_grid), len(spec.cd_grid)
    tasks = [
        (ci, cdi, ic)
        for ci in range(nc)
        for cdi in range(ncd)
        for ic in range(spec.n_ic)
    ]
    chunks = [tasks[i : i + batch_size] for i in range(0, len(tasks), batch_size)]
    payloads = []
    for chunk in chunks:
        gains = np.array([[spec.c_grid[ci], spec.cd_grid[cdi]] for ci, cdi, _ in chunk])
        ics = np.array([spec.initial_condition(ci, cdi, ic) for ci, cdi, ic in chunk])
        payloads.append((spec.model, spec.cfg, spec.window_fraction, gains, ics))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk_results = list(pool.map(_run_chunk, payloads))
    else:
        chunk_results = [_run_chunk(p) for p in payloads]

    per_run = np.concatenate(chunk_results)  # same order as tasks
    e_s_mean = np.full((nc, ncd), np.nan)
    n_diverged = np.zeros((nc, ncd), dtype=int)
    per_run = per_run.reshape(nc, ncd, spec.n_ic)
    for ci in range(nc):
        for cdi in range(ncd):
            vals = per_run[ci, cdi]
            ok = np.isfinite(vals)
            n_diverged[ci, cdi] = int(np.sum(~ok))
            if np.any(ok):
                e_s_mean[ci, cdi] = float(vals[ok].mean())
    return SweepResult(
        c_grid=spec.c_grid.copy(),
        cd_grid=spec.cd_grid.copy(),
        e_s_mean=e_s_mean,
        n_diverged=n_diverged,
        provenance=spec.provenance(),
    )


def export_csv(result: SweepResult, path) -> None:
    """CSV `c,c_d,e_s_mean,n_diverged`, row-major over c then cd.

    Fully diverged cells carry `nan` in e_s_mean; the flag column
    n_diverged distinguishes blow-up from merely large error.
    """
    with open(path, "w") as fh:
        fh.write("c,c_d,e_s_mean,n_diverged\n")
        for ci, c in enumerate(result.c_grid):
            for cdi, cd in enumerate(result.cd_grid):
                e = result.e_s_mean[ci, cdi]
                e_str = "nan" if np.isnan(e) else repr(float(e))
                fh.write(f"{repr(float(c))},{repr(float(cd))},{e_str},{result.n_diverged[ci, cdi]}\n")


def load_csv(path) -> SweepResult:
    """Parse a sweep CSV back into matrices (inverse of export_csv)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "c,c_d,e_s_mean,n_diverged":
            raise ParameterError(f"{path}: unexpected sweep CSV header {header!r}")
        for line in fh:
            c, cd, e, nd = line.strip().split(",")
            rows.append((float(c), float(cd), float(e), int(nd)))
    c_grid = sorted({r[0] for r in rows})
    cd_grid = sorted({r[1] for r in rows})
    e_s = np.full((len(c_grid), len(cd_grid)), np.nan)
    ndiv = np.zeros((len(c_grid), len(cd_grid)), dtype=int)
    ci_of = {c: i for i, c in enumerate(c_grid)}
    cdi_of = {cd: i for i, cd in enumerate(cd_grid)}
    for c, cd, e, nd in rows:
        e_s[ci_of[c], cdi_of[cd]] = e
        ndiv[ci_of[c], cdi_of[cd]] = nd
    return SweepResult(
        c_grid=np.asarray(c_grid),
        cd_grid=np.asarray(cd_grid),
        e_s_mean=e_s,
        n_diverged=ndiv,
    )


def write_manifest(spec: SweepSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.provenance(), fh, indent=2, sort_keys=True)
        fh.write("\n")
