"""Piecewise-smooth node vector fields and the sign-at-zero policy.

The discontinuous examples (relay, Sprott circuit, bistable harvester) all
share the normal form  dx/dt = A x + b + sum_k d_k * sign(w_k^T x); the
continuous-but-nonsmooth oscillator keeps its explicit branch form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class SignPolicy:
    """How sign(.) is evaluated on and near its discontinuity.

    at_zero is the value assigned to sign(0) (a selection from the Filippov
    interval [-1, 1]); hysteresis_band > 0 makes the relay output latch
    until the switching argument leaves the band.
    """

    at_zero: float = 0.0
    hysteresis_band: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.at_zero <= 1.0:
            raise ParameterError(f"sign(0) value must lie in [-1, 1], got {self.at_zero}")
        if self.hysteresis_band < 0.0:
            raise ParameterError("hysteresis band must be >= 0")


def signum(values: np.ndarray, policy: SignPolicy) -> np.ndarray:
    """Elementwise sign with the policy's value at exactly zero."""
    values = np.asarray(values, dtype=float)
    out = np.sign(values)
    if policy.at_zero != 0.0:
        out = np.where(values == 0.0, policy.at_zero, out)
    return out


@dataclass(frozen=True)
class RelayTerm:
    """One discontinuous contribution d * sign(w . x)."""

    d: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if self.d.shape != self.w.shape or self.d.ndim != 1:
            raise ParameterError("relay term needs d and w as equal-length vectors")


@dataclass(frozen=True)
class AffineRelay:
    """Affine dynamics plus relay terms: f(x) = A x + b + sum_k d_k sign(w_k . x)."""

    A: np.ndarray
    b: np.ndarray
    relay_terms: tuple[RelayTerm, ...] = ()
    name: str = "affine_relay"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError(f"A must be square, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise ParameterError(f"b must have length {A.shape[0]}, got shape {b.shape}")
        for term in self.relay_terms:
            if term.d.shape != (A.shape[0],):
                raise ParameterError("relay term dimension does not match A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "relay_terms", tuple(self.relay_terms))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def autonomous(self) -> bool:
        return True

    def switching_planes(self) -> list[tuple[np.ndarray, float]]:
        """(normal, offset) pairs of the surfaces w . x = offset."""
        return [(term.w, 0.0) for term in self.relay_terms]


@dataclass(frozen=True)
class PwsOscillator:
    """Nonautonomous planar oscillator, continuous but not differentiable.

    dx1/dt = -x1 + 2 x2 sin(t); dx2/dt is piecewise linear with stable
    equilibria at x2 = -2 and x2 = +2.
    """

    name: str = "pws_oscillator"

    @property
    def n(self) -> int:
        return 2

    @property
    def autonomous(self) -> bool:
        return False

    @staticmethod
    def f2(x2: np.ndarray) -> np.ndarray:
        x2 = np.asarray(x2, dtype=float)
        return np.where(x2 <= -1.0, -x2 - 2.0, np.where(x2 >= 1.0, -x2 + 2.0, x2))

    def switching_planes(self) -> list[tuple[np.ndarray, float]]:
        e2 = np.array([0.0, 1.0])
        return [(e2, -1.0), (e2, 1.0)]


VectorFieldSpec = AffineRelay | PwsOscillator

BUILTIN_NAMES = ("relay", "pws_oscillator", "sprott", "bistable")


def builtin_spec(name: str) -> VectorFieldSpec:
    """The four example systems, discontinuous ones in AffineRelay normal form."""
    if name == "relay":
        return AffineRelay(
            A=[[-1.0, -1.0], [2.0, 3.0]],
            b=[0.0, 0.0],
            relay_terms=(RelayTerm(d=[0.0, -2.0], w=[1.0, 1.0]),),
            name="relay",
        )
    if name == "sprott":
        return AffineRelay(
            A=[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -1.0, -0.5]],
            b=[0.0, 0.0, 0.0],
            relay_terms=(RelayTerm(d=[0.0, 0.0, 1.0], w=[1.0, 0.0, 0.0]),),
            name="sprott",
        )
    if name == "bistable":
        return AffineRelay(
            A=[[0.0, 1.0], [-1.0, -1.0]],
            b=[0.0, 0.0],
            relay_terms=(RelayTerm(d=[0.0, 1.0], w=[1.0, 0.0]),),
            name="bistable",
        )
    if name == "pws_oscillator":
        return PwsOscillator()
    raise ParameterError(f"unknown builtin system {name!r}; choose one of {BUILTIN_NAMES}")


class RelayLatch:
    """Per-trajectory hysteresis state for an AffineRelay's sign outputs.

    With band == 0 the latch is inert and sign is evaluated pointwise.
    The latch is updated at integration step boundaries only.
    """

    def __init__(self, spec: AffineRelay, policy: SignPolicy, x0: np.ndarray):
        self.policy = policy
        self.spec = spec
        self.values = [
            float(signum(np.dot(term.w, x0), policy)) for term in spec.relay_terms
        ]

    def sign_of(self, k: int, arg: np.ndarray) -> np.ndarray:
        band = self.policy.hysteresis_band
        fresh = signum(arg, self.policy)
        if band == 0.0:
            return fresh
        return np.where(np.abs(arg) > band, fresh, self.values[k])

    def commit(self, x: np.ndarray) -> None:
        band = self.policy.hysteresis_band
        if band == 0.0:
            return
        for k, term in enumerate(self.spec.relay_terms):
            arg = float(np.dot(term.w, x))
            if abs(arg) > band:
                self.values[k] = float(np.sign(arg))


def eval_field(
    spec: VectorFieldSpec,
    x: np.ndarray,
    t: float = 0.0,
    policy: SignPolicy = SignPolicy(),
    latch: RelayLatch | None = None,
) -> np.ndarray:
    """Evaluate f(x; t). x may be a single state (n,) or a batch (..., n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.n:
        raise ParameterError(f"state dimension {x.shape[-1]} != field dimension {spec.n}")
    if isinstance(spec, PwsOscillator):
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([-x1 + 2.0 * x2 * np.sin(t), spec.f2(x2)], axis=-1)
    dx = x @ spec.A.T + spec.b
    for k, term in enumerate(spec.relay_terms):
        arg = x @ term.w
        s = latch.sign_of(k, arg) if latch is not None else signum(arg, policy)
        dx = dx + np.multiply.outer(s, term.d) if x.ndim > 1 else dx + s * term.d
    return dx
