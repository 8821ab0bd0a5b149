"""Weak-force potential, energies, and trajectory integration.

The interaction potential is

    U(x) = sum_{i<j} m_i m_j / |x_i - x_j|^alpha,      0 < alpha < 1,

a positive function blowing up at collisions. Newton's equations
m_i a_i = dU/dx_i give the per-body acceleration

    a_i = alpha * sum_{j != i} m_j (x_j - x_i) / |x_j - x_i|^(alpha + 2),

which conserves total momentum and the energy h = K - U with kinetic energy
K = ||v||^2 in the weighted norm of :mod:`weakforce.configspace`.

Two integrators are provided: an adaptive embedded Runge-Kutta 5(4) scheme
(the workhorse, via scipy) with a terminal close-approach event, and a
fixed-step leapfrog used as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .configspace import mass_vector, pair_indices, weighted_norm

__all__ = [
    "CollisionError",
    "IntegrationError",
    "PotentialParams",
    "PhasePoint",
    "ToleranceSettings",
    "Trajectory",
    "potential",
    "potential_gradient",
    "acceleration",
    "kinetic_energy",
    "lagrangian",
    "total_energy",
    "total_momentum",
    "angular_momentum",
    "integrate",
    "integrate_leapfrog",
]


class CollisionError(ValueError):
    """Raised when a quantity is evaluated at (or below) a collision."""


class IntegrationError(RuntimeError):
    """Raised when the ODE solver fails or exceeds its step budget."""


@dataclass(frozen=True)
class PotentialParams:
    """Problem parameters: force exponent and masses.

    Args:
        alpha: Homogeneity exponent, strictly inside (0, 1).
        masses: Positive masses; rescaled so the smallest is 1.
    """

    alpha: float
    masses: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.alpha}")
        object.__setattr__(self, "masses", mass_vector(self.masses))
        i, j = pair_indices(self.masses.size)
        products = self.masses[i] * self.masses[j]
        products.setflags(write=False)
        object.__setattr__(self, "_pair_products", products)

    @property
    def n_bodies(self) -> int:
        return int(self.masses.size)

    @property
    def pair_products(self) -> np.ndarray:
        """m_i * m_j for every unordered pair, in triu order."""
        return self._pair_products  # type: ignore[attr-defined]


@dataclass(frozen=True)
class PhasePoint:
    """A state (positions, velocities), both of shape (N, n)."""

    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        v = np.asarray(self.velocities, dtype=float)
        if x.shape != v.shape or x.ndim != 2:
            raise ValueError(
                f"positions and velocities must share an (N, n) shape, got {x.shape} and {v.shape}"
            )
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "velocities", v)


def _pair_geometry(x: np.ndarray, params: PotentialParams):
    """Relative vectors and distances for all pairs; raises at collisions."""
    i, j = pair_indices(params.n_bodies)
    rel = np.take(x, i, axis=-2) - np.take(x, j, axis=-2)
    dist = np.sqrt(np.einsum("...pk,...pk->...p", rel, rel))
    if np.any(dist == 0.0):
        raise CollisionError("configuration has two bodies at the same point")
    return i, j, rel, dist


def potential(x: np.ndarray, params: PotentialParams):
    """U(x). Accepts (N, n) or a batch (..., N, n); scalar in, scalar out."""
    _, _, _, dist = _pair_geometry(x, params)
    u = np.einsum("p,...p->...", params.pair_products, dist ** -params.alpha)
    return float(u) if np.ndim(u) == 0 else u


def potential_gradient(x: np.ndarray, params: PotentialParams) -> np.ndarray:
    """dU/dx, shaped like x. Batched along leading axes."""
    i, j, rel, dist = _pair_geometry(x, params)
    # dU/dx_i picks up -alpha m_i m_j (x_i - x_j)/d^(alpha+2) from pair (i, j).
    w = -params.alpha * params.pair_products * dist ** -(params.alpha + 2.0)
    contrib = w[..., None] * rel
    grad = np.zeros_like(x)
    for p, (a, b) in enumerate(zip(*pair_indices(params.n_bodies))):
        grad[..., a, :] += contrib[..., p, :]
        grad[..., b, :] -= contrib[..., p, :]
    return grad


def acceleration(x: np.ndarray, params: PotentialParams) -> np.ndarray:
    """Per-body acceleration a_i = (1/m_i) dU/dx_i. Batched along leading axes."""
    return potential_gradient(x, params) / params.masses[:, None]


def potential_hessian_vec(x: np.ndarray, vec: np.ndarray, params: PotentialParams) -> np.ndarray:
    """Hessian-vector product (d2U/dx2) vec, shaped like x. Batched.

    Per pair with r = x_i - x_j, d = |r|, w = vec_i - vec_j the block action
    is m_i m_j (-alpha d^-(alpha+2) w + alpha (alpha+2) d^-(alpha+4) (r.w) r)
    applied with opposite signs at i and j.
    """
    i, j, rel, dist = _pair_geometry(x, params)
    w = np.take(vec, i, axis=-2) - np.take(vec, j, axis=-2)
    a = params.alpha
    c = params.pair_products
    rw = np.einsum("...pk,...pk->...p", rel, w)
    coef1 = -a * c * dist ** -(a + 2.0)
    coef2 = a * (a + 2.0) * c * dist ** -(a + 4.0) * rw
    block = coef1[..., None] * w + coef2[..., None] * rel
    out = np.zeros_like(x)
    for p, (bi, bj) in enumerate(zip(i, j)):
        out[..., bi, :] += block[..., p, :]
        out[..., bj, :] -= block[..., p, :]
    return out


def kinetic_energy(velocities: np.ndarray, masses: np.ndarray) -> float:
    """K = ||v||^2 in the weighted norm."""
    return weighted_norm(velocities, masses) ** 2


def lagrangian(state: PhasePoint, params: PotentialParams) -> float:
    """L = ||v||^2 + U(x)."""
    return kinetic_energy(state.velocities, params.masses) + potential(state.positions, params)


def total_energy(state: PhasePoint, params: PotentialParams) -> float:
    """Conserved energy h = ||v||^2 - U(x)."""
    return kinetic_energy(state.velocities, params.masses) - potential(state.positions, params)


def total_momentum(state: PhasePoint, masses: np.ndarray) -> np.ndarray:
    """Total linear momentum sum_i m_i v_i, shape (n,)."""
    return np.einsum("i,ik->k", masses, state.velocities)


def angular_momentum(state: PhasePoint, masses: np.ndarray) -> np.ndarray:
    """Angular momentum as the antisymmetric (n, n) matrix sum_i m_i x_i ^ v_i.

    Works in any dimension; in the plane the single independent entry is the
    usual scalar, in 3-d the three independent entries are the usual vector.
    """
    mixed = np.einsum("i,ij,ik->jk", masses, state.positions, state.velocities)
    return mixed - mixed.T


@dataclass(frozen=True)
class ToleranceSettings:
    """Integration controls.

    collision_eps defaults (when None) to 1e-8 times the initial minimum
    separation; the run halts when any pair gets that close. max_steps is an
    approximate cap enforced through the derivative-evaluation budget.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    collision_eps: float | None = None
    max_steps: int = 1_000_000


@dataclass(frozen=True)
class Trajectory:
    """Sampled trajectory with conservation diagnostics.

    energy_drift is relative to the initial energy scale; momentum and
    angular-momentum drifts are Frobenius norms of the change, scaled by the
    initial momentum scale (or 1 if starting at rest).
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    energy: np.ndarray
    energy_drift: np.ndarray
    momentum_drift: np.ndarray
    angular_momentum_drift: np.ndarray
    halted: bool = False
    halt_reason: str | None = None
    n_steps: int = 0

    @property
    def final_state(self) -> PhasePoint:
        return PhasePoint(self.positions[-1], self.velocities[-1])


def _diagnostics(times, xs, vs, params: PotentialParams):
    m = params.masses
    kin = 0.5 * np.einsum("i,tik,tik->t", m, vs, vs)
    i, j = pair_indices(params.n_bodies)
    rel = xs[:, i, :] - xs[:, j, :]
    dist = np.sqrt(np.einsum("tpk,tpk->tp", rel, rel))
    pot = np.einsum("p,tp->t", params.pair_products, dist ** -params.alpha)
    energy = kin - pot
    e_scale = max(abs(energy[0]), 1e-30)
    e_drift = np.abs(energy - energy[0]) / e_scale

    mom = np.einsum("i,tik->tk", m, vs)
    p_scale = max(1.0, float(np.abs(m[:, None] * vs[0]).sum()))
    p_drift = np.linalg.norm(mom - mom[0], axis=1) / p_scale

    mixed = np.einsum("i,tij,tik->tjk", m, xs, vs)
    ang = mixed - np.swapaxes(mixed, 1, 2)
    l_drift = np.linalg.norm((ang - ang[0]).reshape(len(times), -1), axis=1) / p_scale
    return energy, e_drift, p_drift, l_drift


def integrate(
    state: PhasePoint,
    t_end: float,
    params: PotentialParams,
    settings: ToleranceSettings = ToleranceSettings(),
    t_eval: np.ndarray | None = None,
) -> Trajectory:
    """Integrate Newton's equations from ``state`` over [0, t_end].

    Uses an adaptive embedded Runge-Kutta 5(4) pair with dense event
    detection. The run terminates early (with ``halted=True``) if any
    pairwise separation falls to the collision threshold.

    Args:
        state: Initial phase point; must be collision-free.
        t_end: Final time, > 0.
        params: Exponent and masses.
        settings: Tolerances, collision threshold, step budget.
        t_eval: Optional explicit sample times within [0, t_end].

    Returns:
        A :class:`Trajectory` sampled at solver steps (or t_eval).

    Raises:
        CollisionError: If the initial state is already at/below threshold.
        IntegrationError: On solver failure or step-budget exhaustion.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    x0 = state.positions
    n_bodies, dim = x0.shape
    if n_bodies != params.n_bodies:
        raise ValueError(f"state has {n_bodies} bodies but params has {params.n_bodies}")
    i, j = pair_indices(n_bodies)
    r0 = float(np.sqrt(((x0[i] - x0[j]) ** 2).sum(axis=1)).min())
    eps = settings.collision_eps if settings.collision_eps is not None else 1e-8 * r0
    if r0 <= eps:
        raise CollisionError(
            f"initial minimum separation {r0:.3e} is not above the collision threshold {eps:.3e}"
        )

    size = n_bodies * dim
    budget = 8 * settings.max_steps
    evals = 0

    def rhs(t, y):
        nonlocal evals
        evals += 1
        if evals > budget:
            raise IntegrationError(f"step budget exceeded ({settings.max_steps} steps)")
        x = y[:size].reshape(n_bodies, dim)
        a = acceleration(x, params)
        return np.concatenate([y[size:], a.ravel()])

    def close_approach(t, y):
        x = y[:size].reshape(n_bodies, dim)
        return float(np.sqrt(((x[i] - x[j]) ** 2).sum(axis=1)).min()) - eps

    close_approach.terminal = True
    close_approach.direction = -1

    y0 = np.concatenate([x0.ravel(), state.velocities.ravel()])
    try:
        sol = solve_ivp(
            rhs,
            (0.0, float(t_end)),
            y0,
            method="RK45",
            rtol=settings.rtol,
            atol=settings.atol,
            t_eval=t_eval,
            events=[close_approach],
        )
    except CollisionError:
        raise
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}")

    times = sol.t
    ys = sol.y.T
    halted = sol.status == 1
    if halted and sol.t_events[0].size and (times.size == 0 or times[-1] < sol.t_events[0][0]):
        # with t_eval the event time itself is not in sol.t; append it
        times = np.append(times, sol.t_events[0][0])
        ys = np.vstack([ys, sol.y_events[0][0]])
    xs = ys[:, :size].reshape(-1, n_bodies, dim)
    vs = ys[:, size:].reshape(-1, n_bodies, dim)
    energy, e_drift, p_drift, l_drift = _diagnostics(times, xs, vs, params)
    return Trajectory(
        times=times,
        positions=xs,
        velocities=vs,
        energy=energy,
        energy_drift=e_drift,
        momentum_drift=p_drift,
        angular_momentum_drift=l_drift,
        halted=halted,
        halt_reason=(
            f"close approach: minimum separation reached {eps:.6e}" if halted else None
        ),
        n_steps=max(0, times.size - 1),
    )


def integrate_leapfrog(
    state: PhasePoint,
    t_end: float,
    dt: float,
    params: PotentialParams,
    collision_eps: float | None = None,
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step kick-drift-kick leapfrog; independent of :func:`integrate`.

    Second-order symplectic scheme. Meant for cross-checks, not precision
    work; halts like :func:`integrate` when separations reach the threshold.
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("t_end and dt must be positive")
    x = state.positions.copy()
    v = state.velocities.copy()
    n_bodies, dim = x.shape
    i, j = pair_indices(n_bodies)
    r0 = float(np.sqrt(((x[i] - x[j]) ** 2).sum(axis=1)).min())
    eps = collision_eps if collision_eps is not None else 1e-8 * r0
    if r0 <= eps:
        raise CollisionError("initial state is at/below the collision threshold")

    n_total = int(round(t_end / dt))
    times = [0.0]
    xs = [x.copy()]
    vs = [v.copy()]
    halted = False
    a = acceleration(x, params)
    for k in range(1, n_total + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        r = float(np.sqrt(((x[i] - x[j]) ** 2).sum(axis=1)).min())
        if r <= eps:
            halted = True
            break
        a = acceleration(x, params)
        v = v_half + 0.5 * dt * a
        if k % record_every == 0 or k == n_total:
            times.append(k * dt)
            xs.append(x.copy())
            vs.append(v.copy())

    times_arr = np.asarray(times)
    xs_arr = np.asarray(xs)
    vs_arr = np.asarray(vs)
    energy, e_drift, p_drift, l_drift = _diagnostics(times_arr, xs_arr, vs_arr, params)
    return Trajectory(
        times=times_arr,
        positions=xs_arr,
        velocities=vs_arr,
        energy=energy,
        energy_drift=e_drift,
        momentum_drift=p_drift,
        angular_momentum_drift=l_drift,
        halted=halted,
        halt_reason="close approach during leapfrog step" if halted else None,
        n_steps=len(times) - 1,
    )
