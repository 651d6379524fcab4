"""Seeded generators for well-separated random states.

Positions sit on a jittered grid so collision guards never fire; level-set
points can be dressed by a random stabilizer conjugation (any G with v as
simultaneous left/right eigenvector preserves 1 - v^T v, hence the level
set), producing generic orbit representatives that are diagonal in neither
q nor p.
"""
from __future__ import annotations

import numpy as np

from .phase import MatrixPhasePoint, SystemKind, SystemSpec
from .reduction import ReducedPoint, Slice, embed


def random_reduced(rng: np.random.Generator, n: int, g: float,
                   slice: Slice = Slice.Q_DIAG, t: float = 0.0,
                   spread: float = 1.5, jitter: float = 0.3,
                   complex_positions: bool = True,
                   mom_scale: float = 1.0) -> ReducedPoint:
    base = spread * np.arange(n)
    pos = base + rng.uniform(-jitter, jitter, n)
    if complex_positions:
        pos = pos + 1j * rng.uniform(-jitter, jitter, n)
    mom = mom_scale * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return ReducedPoint(pos, mom, g, t, slice)


def stabilizer_element(rng: np.random.Generator, n: int,
                       scale: float = 0.4) -> np.ndarray:
    """Random G = exp(B) with B annihilated by v on both sides."""
    v = np.ones((n, 1))
    proj = np.eye(n) - (v @ v.T) / n
    B = proj @ (scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))) @ proj
    G = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 16):
        term = term @ B / k
        G = G + term
    return G


def random_level_set_point(rng: np.random.Generator, n: int, g: float,
                           t: float = 0.0, dress: bool = True) -> MatrixPhasePoint:
    """Generic point of the level set (neither q nor p diagonal for n > 1)."""
    x = random_reduced(rng, n, g, Slice.Q_DIAG, t)
    pt = embed(x)
    if not dress or n == 1:
        return pt
    G = stabilizer_element(rng, n)
    Gi = np.linalg.inv(G)
    return MatrixPhasePoint(Gi @ pt.q @ G, Gi @ pt.p @ G, t)


def random_matrix_point(rng: np.random.Generator, n: int,
                        t: float = 0.0) -> MatrixPhasePoint:
    return MatrixPhasePoint(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)),
                            rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)),
                            t)


def spec_for(kind: SystemKind, autonomous: bool = False,
             tau: float | None = None) -> SystemSpec:
    """Generic nonzero parameters for each kind, used by randomized checks."""
    params = {
        SystemKind.FREE: {},
        SystemKind.HARM_OSC: {"omega": 1.3},
        SystemKind.P_I: {},
        SystemKind.P_II: {"theta": 0.31 + 0.12j},
        SystemKind.P_II_POLY: {"theta": 0.27 - 0.09j},
        SystemKind.P_IV: {"theta0": 0.41 + 0.05j, "theta1": -0.63 + 0.21j},
    }[kind]
    return SystemSpec(kind, autonomous=autonomous, tau=tau, **params)
