"""Unreduced matrix phase space: points, parameters, moment map, pairing.

The phase space is a pair of n x n complex matrices (q, p) with symplectic
form Tr dp ^ dq.  GL(n) acts by simultaneous conjugation; its moment map is
the commutator [p, q], and the Calogero-type level set fixes

    [p, q] = i g (1 - v^T v),   v = (1, ..., 1),

whose right-hand side has zeros on the diagonal and -i g elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch


def _as_square_complex(m, name: str) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class MatrixPhasePoint:
    """A point (q, p) of gl(n) x gl(n) together with the Painlevé time t."""

    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = _as_square_complex(self.q, "q")
        p = _as_square_complex(self.p, "p")
        if q.shape != p.shape:
            raise DimensionMismatch(f"q has shape {q.shape}, p has shape {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class TangentPair:
    """Tangent vector (dq, dp) at a matrix phase point."""

    dq: np.ndarray
    dp: np.ndarray

    def __post_init__(self):
        dq = _as_square_complex(self.dq, "dq")
        dp = _as_square_complex(self.dp, "dp")
        if dq.shape != dp.shape:
            raise DimensionMismatch("dq and dp must share a shape")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", dp)


@dataclass(frozen=True)
class Coupling:
    """Calogero coupling constant g > 0."""

    g: float

    def __post_init__(self):
        g = float(self.g)
        if not np.isfinite(g) or g <= 0:
            raise ValueError(f"coupling must be finite and positive, got {g}")
        object.__setattr__(self, "g", g)


def coupling_value(g) -> float:
    """Accept either a Coupling or a bare positive float."""
    if isinstance(g, Coupling):
        return g.g
    return Coupling(float(g)).g


class SystemKind(Enum):
    P_I = "P_I"
    P_II = "P_II"
    P_II_POLY = "P_II_poly"
    P_IV = "P_IV"
    HARM_OSC = "HarmOsc"
    FREE = "Free"


@dataclass(frozen=True)
class SystemSpec:
    """Which Hamiltonian system, with its parameter record.

    Parameters not used by `kind` are stored but ignored.  Autonomous forms
    freeze the time dependence at tau.
    """

    kind: SystemKind
    autonomous: bool = False
    theta: complex = 0.0      # P_II / P_II_poly linear coefficient
    theta0: complex = 0.0     # P_IV
    theta1: complex = 0.0     # P_IV
    alpha: complex = 0.0      # stored alias used by some reduced forms
    tau: float | None = None  # frozen time for autonomous forms
    omega: float = 1.0        # harmonic oscillator frequency

    def __post_init__(self):
        if self.autonomous and self.tau is None:
            raise ValueError("autonomous systems require tau")
        for name in ("theta", "theta0", "theta1", "alpha"):
            if not np.isfinite(complex(getattr(self, name))):
                raise ValueError(f"{name} must be finite")
        if self.kind is SystemKind.HARM_OSC and not np.isfinite(self.omega):
            raise ValueError("omega must be finite")

    def time(self, t: float) -> float:
        """Effective time entering Hamiltonians and Lax matrices."""
        return self.tau if self.autonomous else t


def moment_map(pt: MatrixPhasePoint) -> np.ndarray:
    """mu = [p, q] = p q - q p; traceless by construction."""
    return pt.p @ pt.q - pt.q @ pt.p


def level_set_target(n: int, g) -> np.ndarray:
    """i g (1 - v^T v): zero diagonal, -i g off the diagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gv = coupling_value(g)
    target = np.full((n, n), -1j * gv, dtype=complex)
    np.fill_diagonal(target, 0.0)
    return target


def on_level_set(pt: MatrixPhasePoint, g, tol: float) -> tuple[bool, float]:
    """Max-norm test of the moment-map constraint; returns (ok, deviation)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    dev = float(np.abs(moment_map(pt) - level_set_target(pt.n, g)).max())
    return dev < tol, dev


def symplectic_pairing(u: TangentPair, w: TangentPair) -> complex:
    """omega(u, w) = Tr(dp_u dq_w) - Tr(dp_w dq_u)."""
    if u.dq.shape != w.dq.shape:
        raise DimensionMismatch("tangent pairs live at different dimensions")
    return complex(np.trace(u.dp @ w.dq) - np.trace(w.dp @ u.dq))
