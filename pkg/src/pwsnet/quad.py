"""QUAD-type condition checking and closed-form coupling-gain thresholds.

The condition checkers are sampled falsifiers: a "passed" verdict means no
violation was found in the given domain at the given sample size, never a
proof. The threshold operations are exact formulas in the spectra of the
supplied matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import SignPolicy, VectorFieldSpec, eval_field
from .errors import HypothesisViolationError, ParameterError
from .matgraph import Laplacian, Spectrum, require_symmetric, spectral_norm, sym_eigen
from .rng import make_generator

PASS_TOL = -1e-9  # min_margin at or above this counts as "no violation found"
POSITIVE_EIG_TOL = 1e-12
DEFAULT_N_SAMPLES = 100_000
N_TIME_POINTS = 32


@dataclass(frozen=True)
class QuadReport:
    """Outcome of one sampled condition check.

    min_margin is the most-violating slack over all samples (negative
    means the condition was falsified); witness is the (xi1, xi2, t)
    triple achieving it. sampled_only records the falsifier caveat: a
    pass is evidence, not a proof.
    """

    condition: str  # "quad" | "relaxed_quad" | "coupling"
    samples: int
    min_margin: float
    witness: tuple[np.ndarray, np.ndarray, float]
    sampled_only: bool = True

    @property
    def passed(self) -> bool:
        return self.min_margin >= PASS_TOL

    def as_dict(self) -> dict:
        xi1, xi2, t = self.witness
        return {
            "condition": self.condition,
            "samples": self.samples,
            "min_margin": self.min_margin,
            "passed": self.passed,
            "sampled_only": self.sampled_only,
            "witness_xi1": " ".join(repr(float(v)) for v in xi1),
            "witness_xi2": " ".join(repr(float(v)) for v in xi2),
            "witness_t": t,
        }

    def to_kv_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in self.as_dict().items()) + "\n"


@dataclass(frozen=True)
class ThresholdReport:
    """Computed critical coupling gain(s) for one theorem."""

    theorem: str  # "T1" | "T2" | "C1" | "T3" | "T4"
    c_star: float
    c_comparison: str  # ">" or ">="
    cd_star: Optional[float] = None
    cd_comparison: Optional[str] = None
    inputs_digest: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.cd_star is not None) != (self.theorem in ("T3", "T4")):
            raise ParameterError("cd_star is present exactly for theorems T3 and T4")

    def as_dict(self) -> dict:
        out = {
            "theorem": self.theorem,
            "c_star": self.c_star,
            "c_comparison": self.c_comparison,
        }
        if self.cd_star is not None:
            out["cd_star"] = self.cd_star
            out["cd_comparison"] = self.cd_comparison
        out.update({f"input_{k}": v for k, v in self.inputs_digest.items()})
        return out

    def to_kv_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in self.as_dict().items()) + "\n"


@dataclass(frozen=True)
class QSplit:
    """Decomposition Q = Qminus + Qprime with Qminus negative definite."""

    Qminus: np.ndarray
    Qprime: np.ndarray

    def __post_init__(self):
        Qm = np.asarray(self.Qminus, dtype=float)
        Qp = require_symmetric(self.Qprime)
        if sym_eigen(0.5 * (Qm + Qm.T)).lambda_max >= 0.0:
            raise ParameterError("Qminus must be negative definite")
        object.__setattr__(self, "Qminus", Qm)
        object.__setattr__(self, "Qprime", Qp)

    @classmethod
    def of(cls, Q: np.ndarray, Qminus: np.ndarray, Qprime: np.ndarray) -> "QSplit":
        split = cls(Qminus, Qprime)
        if np.max(np.abs(np.asarray(Q, float) - (split.Qminus + split.Qprime))) > 1e-12:
            raise ParameterError("Qminus + Qprime does not reproduce Q")
        return split


def _require_pd(M: np.ndarray, what: str) -> Spectrum:
    spec = sym_eigen(M)
    if spec.lambda_min <= 0.0:
        raise ParameterError(f"{what} must be positive definite (lambda_min = {spec.lambda_min:.3e})")
    return spec


def _reflect(points: np.ndarray, w: np.ndarray, offset: float) -> np.ndarray:
    """Reflect each row of points across the plane w . x = offset."""
    proj = (points @ w - offset) / float(w @ w)
    return points - 2.0 * np.outer(proj, w)


def _sample_pairs(
    spec: VectorFieldSpec,
    domain: np.ndarray,
    t_range: tuple[float, float],
    n_samples: int,
    seed: int,
):
    """Stratified sample pairs: half uniform, half reflected across switching planes."""
    domain = np.asarray(domain, dtype=float)
    if domain.shape != (spec.n, 2):
        raise ParameterError(f"domain must be an ({spec.n}, 2) box, got shape {domain.shape}")
    lo, hi = domain[:, 0], domain[:, 1]
    rng = make_generator(seed)
    xi1 = lo + (hi - lo) * rng.random((n_samples, spec.n))
    xi2 = lo + (hi - lo) * rng.random((n_samples, spec.n))
    planes = spec.switching_planes()
    if planes:
        n_refl = n_samples // 2
        for k, (w, offset) in enumerate(planes):
            sel = np.arange(k, n_refl, len(planes))
            xi2[sel] = _reflect(xi1[sel], w, offset)
    if spec.autonomous:
        ts = np.zeros(n_samples)
    else:
        grid = np.linspace(t_range[0], t_range[1], N_TIME_POINTS)
        ts = grid[np.arange(n_samples) % N_TIME_POINTS]
    return xi1, xi2, ts


def _field_increments(spec, xi1, xi2, ts, policy) -> np.ndarray:
    if spec.autonomous:
        return eval_field(spec, xi1, 0.0, policy) - eval_field(spec, xi2, 0.0, policy)
    out = np.empty_like(xi1)
    for t in np.unique(ts):
        sel = ts == t
        out[sel] = eval_field(spec, xi1[sel], float(t), policy) - eval_field(spec, xi2[sel], float(t), policy)
    return out


def _margin_report(condition, margins, xi1, xi2, ts) -> QuadReport:
    imin = int(np.argmin(margins))
    return QuadReport(
        condition=condition,
        samples=len(margins),
        min_margin=float(margins[imin]),
        witness=(xi1[imin].copy(), xi2[imin].copy(), float(ts[imin])),
    )


def check_quad(
    spec: VectorFieldSpec,
    P: np.ndarray,
    Q: np.ndarray,
    domain: np.ndarray,
    t_range: tuple[float, float] = (0.0, 2.0 * np.pi),
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
    policy: SignPolicy = SignPolicy(),
) -> QuadReport:
    """Sampled falsification of the one-sided quadratic increment bound.

    Per-sample margin: e^T Q e - e^T P [f(xi1;t) - f(xi2;t)], e = xi1 - xi2;
    nonnegative margins mean the bound held at that sample.
    """
    _require_pd(P, "P")
    Q = np.asarray(Q, dtype=float)
    xi1, xi2, ts = _sample_pairs(spec, domain, t_range, n_samples, seed)
    e = xi1 - xi2
    df = _field_increments(spec, xi1, xi2, ts, policy)
    margins = np.einsum("ij,ij->i", e @ Q.T, e) - np.einsum("ij,ij->i", e @ P.T, df)
    return _margin_report("quad", margins, xi1, xi2, ts)


def check_relaxed_quad(
    spec: VectorFieldSpec,
    P: np.ndarray,
    Q: np.ndarray,
    m: np.ndarray,
    domain: np.ndarray,
    t_range: tuple[float, float] = (0.0, 2.0 * np.pi),
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
    policy: SignPolicy = SignPolicy(),
) -> QuadReport:
    """Like check_quad but with the additive slack m^T |xi1 - xi2| allowed."""
    _require_pd(P, "P")
    m = np.asarray(m, dtype=float)
    if m.shape != (spec.n,):
        raise ParameterError(f"m must be a length-{spec.n} vector")
    if np.any(m < 0.0):
        raise ParameterError("m must be componentwise nonnegative")
    Q = np.asarray(Q, dtype=float)
    xi1, xi2, ts = _sample_pairs(spec, domain, t_range, n_samples, seed)
    e = xi1 - xi2
    df = _field_increments(spec, xi1, xi2, ts, policy)
    margins = (
        np.einsum("ij,ij->i", e @ Q.T, e)
        + np.abs(e) @ m
        - np.einsum("ij,ij->i", e @ P.T, df)
    )
    return _margin_report("relaxed_quad", margins, xi1, xi2, ts)


def check_coupling_assumption(
    Gamma: np.ndarray,
    c: float,
    P: np.ndarray,
    domain: np.ndarray,
    G: np.ndarray | None = None,
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
) -> QuadReport:
    """Check the coupling assumption for linear diffusive g = c Gamma (xi2 - xi1).

    (i) g(xi, xi) = 0 and (ii) antisymmetry hold structurally and are
    asserted exactly at the samples; (iii) the quadratic lower bound with
    G = sym(P Gamma) (unless supplied) is sampled like the QUAD margins.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    P = np.asarray(P, dtype=float)
    n = Gamma.shape[0]
    if G is None:
        PG = P @ Gamma
        G = 0.5 * (PG + PG.T)
    G = require_symmetric(G)
    domain = np.asarray(domain, dtype=float)
    if domain.shape != (n, 2):
        raise ParameterError(f"domain must be an ({n}, 2) box")
    rng = make_generator(seed)
    lo, hi = domain[:, 0], domain[:, 1]
    xi1 = lo + (hi - lo) * rng.random((n_samples, n))
    xi2 = lo + (hi - lo) * rng.random((n_samples, n))

    def g(a, b):
        return c * (b - a) @ Gamma.T

    if np.max(np.abs(g(xi1, xi1))) != 0.0:
        raise HypothesisViolationError("coupling violates g(xi, xi) = 0")
    if np.max(np.abs(g(xi1, xi2) + g(xi2, xi1))) != 0.0:
        raise HypothesisViolationError("coupling is not antisymmetric")
    e = xi1 - xi2
    lhs = np.einsum("ij,ij->i", (xi2 - xi1) @ P.T, g(xi1, xi2))
    rhs = c * np.einsum("ij,ij->i", e @ G, e)
    ts = np.zeros(n_samples)
    return _margin_report("coupling", lhs - rhs, xi1, xi2, ts)


def simultaneous_diag(Qprime: np.ndarray, G: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthogonal T with T^T Qprime T and T^T G T both diagonal.

    Exists iff the (symmetric) pair commutes; built from the eigenbasis of
    G, refined inside each repeated-eigenvalue block by diagonalizing the
    restriction of Qprime. Raises HypothesisViolationError (reporting the
    commutator norm) for a non-commuting pair.
    """
    Qprime = require_symmetric(Qprime)
    G = require_symmetric(G)
    comm = Qprime @ G - G @ Qprime
    comm_norm = spectral_norm(comm)
    bound = rtol * (spectral_norm(Qprime) * spectral_norm(G) + 1.0)
    if comm_norm > bound:
        raise HypothesisViolationError(
            f"matrices do not commute (||Q'G - GQ'|| = {comm_norm:.3e} > {bound:.3e})"
        )
    gspec = sym_eigen(G)
    T = gspec.eigenvectors.copy()
    lam = gspec.eigenvalues
    scale = max(1.0, abs(lam[-1]), abs(lam[0]))
    # group repeated eigenvalues of G and diagonalize Q' inside each block
    start = 0
    for stop in range(1, len(lam) + 1):
        if stop == len(lam) or lam[stop] - lam[start] > 1e-9 * scale:
            block = T[:, start:stop]
            if stop - start > 1:
                sub = sym_eigen(block.T @ Qprime @ block)
                T[:, start:stop] = block @ sub.eigenvectors
            start = stop
    for name, M in (("Qprime", Qprime), ("G", G)):
        D = T.T @ M @ T
        off = D - np.diag(np.diag(D))
        if np.max(np.abs(off)) > 1e-8 * max(1.0, np.max(np.abs(D))):
            raise HypothesisViolationError(f"failed to jointly diagonalize {name}")
    return T


def _require_connected(L) -> float:
    """Accepts a Laplacian or a bare lambda_2 value (e.g. a reported one)."""
    lam2 = L.lambda2 if isinstance(L, Laplacian) else float(L)
    if lam2 <= 0.0:
        raise HypothesisViolationError(f"graph is disconnected (lambda_2 = {lam2:.3e})")
    return lam2


def threshold_t1(Q: np.ndarray, L, G: np.ndarray) -> ThresholdReport:
    """c* = ||Q|| / (lambda_2(L) lambda_min(G)); requires G > 0, L connected."""
    gspec = sym_eigen(G)
    if gspec.lambda_min <= 0.0:
        raise HypothesisViolationError(f"G must be positive definite (lambda_min = {gspec.lambda_min:.3e})")
    lam2 = _require_connected(L)
    norm_q = spectral_norm(Q)
    return ThresholdReport(
        theorem="T1",
        c_star=norm_q / (lam2 * gspec.lambda_min),
        c_comparison=">",
        inputs_digest={"norm_Q": norm_q, "lambda2_L": lam2, "lambda_min_G": gspec.lambda_min},
    )


def _paired_ratio_max(Qprime: np.ndarray, G: np.ndarray) -> tuple[float, bool]:
    """max over common-eigenvector indices h with lambda_h(Q') > 0 of the
    ratio lambda_h(Q') / lambda_h(G); the eigenvalues are paired through
    the shared basis columns, not by sorted order."""
    T = simultaneous_diag(Qprime, G)
    lam_q = np.diag(T.T @ Qprime @ T)
    lam_g = np.diag(T.T @ G @ T)
    pos = lam_q > POSITIVE_EIG_TOL
    if not np.any(pos):
        return 0.0, False
    if np.any(lam_g[pos] <= 0.0):
        raise HypothesisViolationError(
            "lambda_h(G) must be positive wherever lambda_h(Q') > 0"
        )
    return float(np.max(lam_q[pos] / lam_g[pos])), True


def threshold_t2(qsplit: QSplit, G: np.ndarray, L) -> ThresholdReport:
    """Indefinite-G variant: c* = max_h lambda_h(Q')/lambda_h(G) / lambda_2(L)."""
    lam2 = _require_connected(L)
    ratio, any_pos = _paired_ratio_max(qsplit.Qprime, require_symmetric(G))
    return ThresholdReport(
        theorem="T2",
        c_star=ratio / lam2 if any_pos else 0.0,
        c_comparison=">=",
        inputs_digest={"max_ratio": ratio, "lambda2_L": lam2},
    )


def threshold_c1(q: np.ndarray, gamma: np.ndarray, L) -> ThresholdReport:
    """Diagonal corollary of the indefinite-G threshold."""
    q = np.asarray(q, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if q.shape != gamma.shape or q.ndim != 1:
        raise ParameterError("q and gamma must be equal-length vectors")
    if np.any(gamma < 0.0):
        raise HypothesisViolationError("gamma must be componentwise nonnegative")
    pos = q > POSITIVE_EIG_TOL
    if np.any(pos & (gamma <= 0.0)):
        raise HypothesisViolationError("gamma_h must be positive wherever q_h > 0")
    lam2 = _require_connected(L)
    c_star = float(np.max(q[pos] / gamma[pos])) / lam2 if np.any(pos) else 0.0
    return ThresholdReport(
        theorem="C1",
        c_star=c_star,
        c_comparison=">=",
        inputs_digest={"lambda2_L": lam2},
    )


def _discontinuous_gain(m: np.ndarray, P: np.ndarray, Gamma_d: np.ndarray) -> tuple[float, np.ndarray]:
    """cd* = max_h m_h / (2 gamma_d_h) over h with m_h > 0; checks that
    P Gamma_d is diagonal, nonnegative, and positive where m_h > 0."""
    m = np.asarray(m, dtype=float)
    if not np.any(m != 0.0):
        raise ParameterError("m must be a nonzero vector")
    PGd = np.asarray(P, float) @ np.asarray(Gamma_d, float)
    off = PGd - np.diag(np.diag(PGd))
    if np.max(np.abs(off)) > 1e-12:
        raise HypothesisViolationError("P Gamma_d must be diagonal")
    gamma_d = np.diag(PGd)
    if np.any(gamma_d < 0.0):
        raise HypothesisViolationError("diag(P Gamma_d) must be nonnegative")
    pos = m > 0.0
    if np.any(pos & (gamma_d <= 0.0)):
        raise HypothesisViolationError("gamma_d_h must be positive wherever m_h > 0")
    cd_star = 0.5 * float(np.max(m[pos] / gamma_d[pos])) if np.any(pos) else 0.0
    return cd_star, gamma_d


def threshold_t3(
    Q: np.ndarray, m: np.ndarray, P: np.ndarray, Gamma: np.ndarray, Gamma_d: np.ndarray
) -> ThresholdReport:
    """Two-node thresholds with definite sym(P Gamma):
    c* = ||Q|| / (2 lambda_min(sym(P Gamma))), cd* = max_h m_h / (2 gamma_d_h)."""
    _require_pd(P, "P")
    PG = np.asarray(P, float) @ np.asarray(Gamma, float)
    sym_pg = 0.5 * (PG + PG.T)
    lam_min = sym_eigen(sym_pg).lambda_min
    if lam_min <= 0.0:
        raise HypothesisViolationError(f"sym(P Gamma) must be positive definite (lambda_min = {lam_min:.3e})")
    cd_star, gamma_d = _discontinuous_gain(m, P, Gamma_d)
    norm_q = spectral_norm(Q)
    return ThresholdReport(
        theorem="T3",
        c_star=norm_q / (2.0 * lam_min),
        c_comparison=">",
        cd_star=cd_star,
        cd_comparison=">=",
        inputs_digest={
            "norm_Q": norm_q,
            "lambda_min_sym_PGamma": lam_min,
            "m": " ".join(repr(float(v)) for v in np.asarray(m, float)),
            "gamma_d": " ".join(repr(float(v)) for v in gamma_d),
        },
    )


def threshold_t4(
    qsplit: QSplit, m: np.ndarray, P: np.ndarray, Gamma: np.ndarray, Gamma_d: np.ndarray
) -> ThresholdReport:
    """Two-node thresholds with indefinite G = P Gamma:
    c* = max_h lambda_h(Q')/lambda_h(G) / 2, cd* as in the definite case."""
    _require_pd(P, "P")
    G = np.asarray(P, float) @ np.asarray(Gamma, float)
    G = require_symmetric(G)  # theorem works with the symmetric pair (Q', P Gamma)
    ratio, any_pos = _paired_ratio_max(qsplit.Qprime, G)
    cd_star, gamma_d = _discontinuous_gain(m, P, Gamma_d)
    return ThresholdReport(
        theorem="T4",
        c_star=0.5 * ratio if any_pos else 0.0,
        c_comparison=">",
        cd_star=cd_star,
        cd_comparison=">=",
        inputs_digest={
            "max_ratio": ratio,
            "m": " ".join(repr(float(v)) for v in np.asarray(m, float)),
            "gamma_d": " ".join(repr(float(v)) for v in gamma_d),
        },
    )
