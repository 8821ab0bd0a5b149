"""Closed-form reference states and standard shapes.

The circular two-body orbit is the package's main analytic anchor: for the
relative separation rho the angular rate obeys
omega^2 = alpha (m1 + m2) / rho^(alpha + 2), and both bodies move on
circles about the fixed center of mass.
"""

from __future__ import annotations

import math

import numpy as np

from .configspace import normalize_to_sphere
from .dynamics import PhasePoint, PotentialParams

__all__ = ["circular_two_body", "shape_preset", "SHAPE_PRESETS"]


def circular_two_body(
    alpha: float = 0.5,
    masses: tuple[float, float] = (1.0, 1.0),
    separation: float = 1.0,
    speed_factor: float = 1.0,
) -> tuple[PhasePoint, PotentialParams, float]:
    """Planar two-body state on (or scaled off) the circular orbit.

    Args:
        alpha: Force exponent in (0, 1).
        masses: The two masses.
        separation: Initial body separation rho > 0.
        speed_factor: Tangential speed as a fraction of the circular value;
            1 gives the circular orbit, < 1 starts at apoapsis of a bound
            noncircular orbit.

    Returns:
        (state, params, period) where period is the circular period
        2 pi / omega regardless of speed_factor (a convenient timescale).
    """
    if separation <= 0.0:
        raise ValueError("separation must be positive")
    params = PotentialParams(alpha, np.asarray(masses, dtype=float))
    m1, m2 = params.masses
    total = m1 + m2
    omega = math.sqrt(alpha * total) * separation ** (-(alpha + 2.0) / 2.0)
    period = 2.0 * math.pi / omega
    v_rel = speed_factor * omega * separation

    x1 = np.array([m2 / total * separation, 0.0])
    x2 = np.array([-m1 / total * separation, 0.0])
    v1 = np.array([0.0, m2 / total * v_rel])
    v2 = np.array([0.0, -m1 / total * v_rel])
    state = PhasePoint(np.stack([x1, x2]), np.stack([v1, v2]))
    return state, params, period


def _antipodal(masses: np.ndarray) -> np.ndarray:
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    return normalize_to_sphere(x, masses)


def _triangle(masses: np.ndarray) -> np.ndarray:
    x = np.array(
        [
            [1.0, 0.0],
            [-0.5, math.sqrt(3.0) / 2.0],
            [-0.5, -math.sqrt(3.0) / 2.0],
        ]
    )
    return normalize_to_sphere(x, masses)


def _collinear(masses: np.ndarray) -> np.ndarray:
    x = np.array([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    return normalize_to_sphere(x, masses)


SHAPE_PRESETS = {
    "antipodal": (2, _antipodal),
    "triangle": (3, _triangle),
    "collinear": (3, _collinear),
}


def shape_preset(name: str, masses) -> np.ndarray:
    """Named unit shape for the given masses.

    Raises:
        ValueError: On an unknown name or a mass count mismatch.
    """
    if name not in SHAPE_PRESETS:
        raise ValueError(f"unknown shape preset {name!r}; choices: {sorted(SHAPE_PRESETS)}")
    n_required, builder = SHAPE_PRESETS[name]
    m = np.asarray(masses, dtype=float)
    if m.size != n_required:
        raise ValueError(f"shape preset {name!r} needs {n_required} masses, got {m.size}")
    return builder(m)
