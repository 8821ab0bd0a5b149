"""Discrete action functional and free-time minimization.

A path from x to y is discretized as M+1 nodes on a uniform time grid over
[0, T]. The fixed-energy action of a piecewise-linear path is

    A_E = sum_k ||d_k||^2 / dt  +  dt * trapezoid(U)  +  E * T,

with d_k the node differences and the weighted norm throughout. The kinetic
term is exact for piecewise-linear paths and the trapezoid rule
overestimates the potential term (each pair separation is convex along a
straight segment and s -> s^(-alpha) is convex decreasing), so every
discrete value respects the continuum lower bounds

    A_E >= E * T   and   A_E >= 2 sqrt(E) ||x - y||.

Minimization is an inner/outer scheme: interior nodes by preconditioned
L-BFGS at fixed T, then a bracketed golden-section search over T followed
by a secant polish that drives the interior-node energy h = K - U to E
(the first-order optimality condition in T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from . import optimize
from .configspace import (
    min_separation,
    pair_indices,
    weighted_distance,
    weighted_norm,
)
from .dynamics import (
    CollisionError,
    PotentialParams,
    acceleration,
    potential,
    potential_gradient,
    potential_hessian_vec,
)

__all__ = [
    "DiscretePath",
    "ActionValue",
    "SolverSettings",
    "MinimizeResult",
    "straight_path",
    "path_action",
    "path_action_gradient",
    "energy_profile",
    "el_residual",
    "discretization_scale",
    "minimize_fixed_time",
    "minimize_free_time",
    "maupertuis_lower_bound",
]


@dataclass(frozen=True)
class DiscretePath:
    """Piecewise-linear path: M+1 nodes of shape (N, n) on [0, total_time]."""

    total_time: float
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 3 or nodes.shape[0] < 2:
            raise ValueError(f"nodes must be (M+1, N, n) with M >= 1, got shape {nodes.shape}")
        if not self.total_time > 0.0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("path nodes must be finite")
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_segments(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def dt(self) -> float:
        return self.total_time / self.n_segments

    @property
    def start(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def end(self) -> np.ndarray:
        return self.nodes[-1]

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.total_time, self.n_segments + 1)

    def reversed(self) -> "DiscretePath":
        """The same geometric path traversed backwards."""
        return DiscretePath(self.total_time, self.nodes[::-1].copy())

    def refined(self) -> "DiscretePath":
        """Double the segment count by inserting linear midpoints."""
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        out = np.empty((2 * self.n_segments + 1,) + self.nodes.shape[1:])
        out[0::2] = self.nodes
        out[1::2] = mids
        return DiscretePath(self.total_time, out)

    def sample(self, times: np.ndarray) -> np.ndarray:
        """Linear interpolation at given times (clipped to [0, T])."""
        t = np.clip(np.asarray(times, dtype=float), 0.0, self.total_time)
        pos = t / self.dt
        idx = np.minimum(pos.astype(int), self.n_segments - 1)
        frac = (pos - idx)[:, None, None]
        return self.nodes[idx] + frac * (self.nodes[idx + 1] - self.nodes[idx])


def straight_path(x: np.ndarray, y: np.ndarray, total_time: float, n_segments: int) -> DiscretePath:
    """Uniform straight-line path from x to y."""
    s = np.linspace(0.0, 1.0, n_segments + 1)[:, None, None]
    return DiscretePath(total_time, (1.0 - s) * x + s * y)


@dataclass(frozen=True)
class ActionValue:
    """Action of one path at one energy, with its breakdown.

    value = kinetic + potential + energy_term, where energy_term = E * T.
    """

    value: float
    kinetic: float
    potential: float
    energy_term: float


def maupertuis_lower_bound(x: np.ndarray, y: np.ndarray, masses: np.ndarray, energy: float) -> float:
    """2 sqrt(E) ||x - y||: a lower bound for the action of any path x -> y."""
    return 2.0 * math.sqrt(energy) * weighted_distance(x, y, masses)


def _node_potentials(nodes: np.ndarray, params: PotentialParams) -> np.ndarray:
    u = potential(nodes, params)
    return np.atleast_1d(u)


def path_action(path: DiscretePath, energy: float, params: PotentialParams) -> ActionValue:
    """Evaluate the discrete fixed-energy action of a path.

    Raises:
        CollisionError: If any node has two bodies at the same point.
        ValueError: If energy is not positive.
    """
    if energy <= 0.0:
        raise ValueError(f"energy must be positive, got {energy}")
    dt = path.dt
    d = np.diff(path.nodes, axis=0)
    kinetic = 0.5 * float(np.einsum("i,sic,sic->", params.masses, d, d)) / dt
    u = _node_potentials(path.nodes, params)
    pot = dt * float(u[0] / 2.0 + u[1:-1].sum() + u[-1] / 2.0)
    e_term = energy * path.total_time
    return ActionValue(
        value=kinetic + pot + e_term, kinetic=kinetic, potential=pot, energy_term=e_term
    )


def _value_grad_parts(nodes: np.ndarray, total_time: float, energy: float, params: PotentialParams):
    """Action value, interior-node gradient, and dA/dT in one pass."""
    m_seg = nodes.shape[0] - 1
    dt = total_time / m_seg
    masses = params.masses
    d = np.diff(nodes, axis=0)
    kinetic = 0.5 * float(np.einsum("i,sic,sic->", masses, d, d)) / dt
    u = _node_potentials(nodes, params)
    pot = dt * float(u[0] / 2.0 + u[1:-1].sum() + u[-1] / 2.0)
    value = kinetic + pot + energy * total_time

    du_interior = potential_gradient(nodes[1:-1], params)
    second = 2.0 * nodes[1:-1] - nodes[:-2] - nodes[2:]
    grad = (masses[None, :, None] / dt) * second + dt * du_interior
    da_dt = (pot - kinetic) / total_time + energy
    return value, grad, da_dt, kinetic, pot


def path_action_gradient(
    path: DiscretePath, energy: float, params: PotentialParams
) -> tuple[np.ndarray, float]:
    """Gradient of the action: (interior-node gradient of shape (M-1, N, n), dA/dT)."""
    _, grad, da_dt, _, _ = _value_grad_parts(path.nodes, path.total_time, energy, params)
    return grad, da_dt


def energy_profile(path: DiscretePath, params: PotentialParams) -> np.ndarray:
    """h = K - U at interior nodes, with central-difference velocities. Shape (M-1,)."""
    dt = path.dt
    v = (path.nodes[2:] - path.nodes[:-2]) / (2.0 * dt)
    kin = 0.5 * np.einsum("i,sic,sic->s", params.masses, v, v)
    u = _node_potentials(path.nodes[1:-1], params)
    return kin - u


def el_residual(path: DiscretePath, params: PotentialParams) -> float:
    """Worst interior-node defect of the equations of motion.

    Returns max_k || (gamma_{k+1} - 2 gamma_k + gamma_{k-1}) / dt^2 - a(gamma_k) ||
    in the weighted norm; near zero exactly when the nodes sample a solution.
    """
    dt = path.dt
    second = (path.nodes[2:] - 2.0 * path.nodes[1:-1] + path.nodes[:-2]) / dt**2
    defect = second - acceleration(path.nodes[1:-1], params)
    norms = np.sqrt(0.5 * np.einsum("i,sic,sic->s", params.masses, defect, defect))
    return float(norms.max())


def discretization_scale(path: DiscretePath, params: PotentialParams) -> float:
    """Expected size of el_residual for nodes sampling a smooth solution.

    The three-point second difference of a smooth curve carries an error
    ~ ||gamma''''|| dt^2 / 12; the fourth derivative is estimated from
    fourth differences of the nodes themselves.
    """
    if path.n_segments < 4:
        raise ValueError("need at least 4 segments to estimate the discretization scale")
    nodes = path.nodes
    fourth = nodes[4:] - 4.0 * nodes[3:-1] + 6.0 * nodes[2:-2] - 4.0 * nodes[1:-3] + nodes[:-4]
    norms = np.sqrt(0.5 * np.einsum("i,sic,sic->s", params.masses, fourth, fourth))
    return float(norms.max()) / (12.0 * path.dt**2)


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and guards for the path minimizers.

    energy_tol is relative: the free-time result is accepted when the
    interior-node energy satisfies |h - E| <= energy_tol * E. The collision
    floor (absolute, or scale * min endpoint separation when None) vetoes
    any iterate with a closer node pair.
    """

    grad_tol: float = 1e-8
    energy_tol: float = 1e-3
    max_iterations: int = 1500
    memory: int = 12
    collision_floor: float | None = None
    collision_floor_scale: float = 1e-3
    time_floor: float = 1e-4
    time_bracket_tol: float = 1e-3
    max_polish: int = 12
    # drive |median(h) - E| this far below energy_tol; residual timing noise
    # otherwise dominates comparisons between independently solved paths
    polish_rtol: float = 1e-6
    # rounds of exact-Hessian conjugate-gradient cleanup after the
    # quasi-newton stage (0 disables). Long paths leave the limited-memory
    # solver with residual error along low-frequency modes whose curvature
    # scales like 1/T^2; comparing two such paths pointwise needs it removed.
    newton_polish: int = 0
    newton_cg_tol: float = 1e-3
    newton_max_cg: int = 250


@dataclass(frozen=True)
class MinimizeResult:
    """Outcome of a path minimization.

    The action value is an upper bound for the infimum over all paths (it is
    the best path found, not a certificate). status values: "converged",
    "inner-not-converged", "line-search-failure", "transversality-miss",
    "degenerate-endpoints", "boundary-time-floor", "bracket-failure".
    """

    path: DiscretePath
    action: ActionValue
    converged: bool
    status: str
    grad_norm: float
    iterations: int
    energy_profile: np.ndarray
    el_residual: float
    dA_dT: float
    min_sep: float
    degenerate: bool = False
    restart_index: int = 0

    @property
    def value(self) -> float:
        return self.action.value


def _kinetic_preconditioner(n_interior: int, n_bodies: int, dim: int, dt: float, masses):
    """Exact inverse of the kinetic Hessian block as an operator on flats.

    The kinetic part of the action has Hessian (m_i/dt) * tridiag(-1, 2, -1)
    in each body coordinate; its inverse application is a banded Cholesky
    solve shared across all N*n coordinate columns.
    """
    ab = np.zeros((2, n_interior))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0
    factor = cholesky_banded(ab)

    def apply(q: np.ndarray) -> np.ndarray:
        cols = q.reshape(n_interior, n_bodies * dim)
        sol = cho_solve_banded((factor, False), cols)
        z = sol.reshape(n_interior, n_bodies, dim) * (dt / masses[None, :, None])
        return z.ravel()

    return apply


def _check_endpoints(x: np.ndarray, y: np.ndarray, params: PotentialParams) -> float:
    rx = min_separation(x)
    ry = min_separation(y)
    if rx <= 0.0 or ry <= 0.0:
        raise CollisionError("endpoint configuration has two bodies at the same point")
    return min(rx, ry)


def _floor_for(x, y, params, settings: SolverSettings) -> float:
    if settings.collision_floor is not None:
        return settings.collision_floor
    return settings.collision_floor_scale * _check_endpoints(x, y, params)


def _bumped_nodes(nodes: np.ndarray, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Perturb interior nodes with a sine envelope, keeping endpoints fixed."""
    m_plus_1 = nodes.shape[0]
    envelope = np.sin(np.pi * np.linspace(0.0, 1.0, m_plus_1))[:, None, None]
    noise = rng.standard_normal(nodes.shape)
    return nodes + scale * envelope * noise


def _nodes_min_sep(nodes: np.ndarray) -> float:
    return float(min_separation(nodes).min())


def _feasible_nodes(
    nodes: np.ndarray, floor: float, scale: float, rng: np.random.Generator
) -> np.ndarray:
    """Bump an initial path until every node clears the collision floor.

    Straight initial paths can pass through (or too near) a collision, e.g.
    when the endpoints swap two bodies. Random sine-enveloped bumps of
    growing amplitude almost surely fix that.
    """
    if _nodes_min_sep(nodes) > 1.5 * floor:
        return nodes
    for amplitude in (0.05, 0.1, 0.2, 0.4, 0.8, 1.6):
        candidate = _bumped_nodes(nodes, amplitude * scale, rng)
        if _nodes_min_sep(candidate) > 1.5 * floor:
            return candidate
    raise CollisionError(
        "could not find a collision-free initial path between these endpoints"
    )


def _hessian_operator(nodes: np.ndarray, total_time: float, params: PotentialParams):
    """Exact action Hessian at fixed T as an operator on interior-node flats."""
    m_plus_1, n_bodies, dim = nodes.shape
    n_interior = m_plus_1 - 2
    dt = total_time / (m_plus_1 - 1)
    masses = params.masses
    interior = nodes[1:-1]

    def apply(q: np.ndarray) -> np.ndarray:
        v = q.reshape(n_interior, n_bodies, dim)
        kin = 2.0 * v
        kin[1:] -= v[:-1]
        kin[:-1] -= v[1:]
        out = (masses[None, :, None] / dt) * kin
        out += dt * potential_hessian_vec(interior, v, params)
        return out.ravel()

    return apply


def _pcg(apply_h, rhs: np.ndarray, apply_m_inv, rel_tol: float, max_iter: int):
    """Preconditioned conjugate gradients for H d = rhs; stops on curvature <= 0."""
    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = apply_m_inv(r)
    rz = float(r @ z)
    if rz <= 0.0:
        return x
    p = z.copy()
    target = rel_tol * rel_tol * rz
    for _ in range(max_iter):
        hp = apply_h(p)
        php = float(p @ hp)
        if php <= 0.0:
            break
        a = rz / php
        x += a * p
        r -= a * hp
        z = apply_m_inv(r)
        rz_new = float(r @ z)
        if rz_new <= target:
            break
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def _newton_polish(
    nodes: np.ndarray,
    total_time: float,
    energy: float,
    params: PotentialParams,
    floor: float,
    settings: SolverSettings,
    apply_h0,
):
    """Newton-CG cleanup of a converged interior solve; returns (nodes, grad norm)."""
    n_interior = nodes.shape[0] - 2
    shape = nodes[1:-1].shape
    best = nodes.copy()
    _, grad, _, _, _ = _value_grad_parts(best, total_time, energy, params)
    gnorm = float(np.linalg.norm(grad.ravel()))
    for _ in range(settings.newton_polish):
        if gnorm == 0.0:
            break
        hess = _hessian_operator(best, total_time, params)
        step = _pcg(
            hess,
            -grad.ravel(),
            apply_h0,
            rel_tol=settings.newton_cg_tol,
            max_iter=settings.newton_max_cg,
        )
        improved = False
        alpha = 1.0
        for _ in range(12):
            trial = best.copy()
            trial[1:-1] = best[1:-1] + alpha * step.reshape(shape)
            if _nodes_min_sep(trial) > floor:
                _, tgrad, _, _, _ = _value_grad_parts(trial, total_time, energy, params)
                tnorm = float(np.linalg.norm(tgrad.ravel()))
                if tnorm < gnorm:
                    best, grad, gnorm = trial, tgrad, tnorm
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            break
    return best, gnorm


def _solve_interior(
    nodes0: np.ndarray,
    total_time: float,
    energy: float,
    params: PotentialParams,
    floor: float,
    settings: SolverSettings,
):
    """Inner minimization over interior nodes at fixed T."""
    m_plus_1, n_bodies, dim = nodes0.shape
    n_interior = m_plus_1 - 2
    dt = total_time / (m_plus_1 - 1)
    i, j = pair_indices(n_bodies)
    endpoints = (nodes0[0].copy(), nodes0[-1].copy())
    template = nodes0.copy()

    def assemble(z):
        template[1:-1] = z.reshape(n_interior, n_bodies, dim)
        return template

    def fun_grad(z):
        nodes = assemble(z)
        rel = nodes[:, i, :] - nodes[:, j, :]
        dist2 = np.einsum("kpc,kpc->kp", rel, rel)
        if dist2.min() < floor * floor:
            return math.inf, None
        value, grad, _, _, _ = _value_grad_parts(nodes, total_time, energy, params)
        return value, grad.ravel()

    apply_h0 = _kinetic_preconditioner(n_interior, n_bodies, dim, dt, params.masses)
    outcome = optimize.lbfgs(
        fun_grad,
        nodes0[1:-1].ravel(),
        grad_tol=settings.grad_tol,
        max_iterations=settings.max_iterations,
        memory=settings.memory,
        apply_h0=apply_h0,
    )
    nodes = nodes0.copy()
    nodes[1:-1] = outcome.x.reshape(n_interior, n_bodies, dim)
    nodes[0], nodes[-1] = endpoints
    if settings.newton_polish > 0 and outcome.converged:
        nodes, gnorm = _newton_polish(
            nodes, total_time, energy, params, floor, settings, apply_h0
        )
        if gnorm < outcome.grad_norm:
            outcome = replace(outcome, x=nodes[1:-1].ravel(), grad_norm=gnorm)
    return nodes, outcome


def _assemble_result(
    nodes, total_time, energy, params, outcome, status, degenerate=False, restart_index=0
) -> MinimizeResult:
    path = DiscretePath(total_time, nodes)
    act = path_action(path, energy, params)
    _, _, da_dt, _, _ = _value_grad_parts(nodes, total_time, energy, params)
    prof = energy_profile(path, params)
    return MinimizeResult(
        path=path,
        action=act,
        converged=status == "converged",
        status=status,
        grad_norm=outcome.grad_norm,
        iterations=outcome.iterations,
        energy_profile=prof,
        el_residual=el_residual(path, params),
        dA_dT=da_dt,
        min_sep=float(min_separation(path.nodes).min()),
        degenerate=degenerate,
        restart_index=restart_index,
    )


def minimize_fixed_time(
    x: np.ndarray,
    y: np.ndarray,
    total_time: float,
    energy: float,
    params: PotentialParams,
    n_segments: int = 200,
    settings: SolverSettings | None = None,
    init_nodes: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> MinimizeResult:
    """Minimize the action over paths x -> y with the duration held fixed.

    Args:
        x, y: Endpoint configurations, collision-free.
        total_time: Path duration T > 0.
        energy: Fixed energy level E > 0.
        params: Exponent and masses.
        n_segments: Node count is n_segments + 1 (ignored when init_nodes
            is given).
        settings: Solver tolerances; defaults when None.
        init_nodes: Optional warm-start nodes; endpoints are overwritten.
        rng: Source for feasibility bumps of the initial path.

    Returns:
        A :class:`MinimizeResult`; check ``converged``.
    """
    settings = settings or SolverSettings()
    if energy <= 0.0:
        raise ValueError(f"energy must be positive, got {energy}")
    if total_time <= 0.0:
        raise ValueError(f"total_time must be positive, got {total_time}")
    floor = _floor_for(x, y, params, settings)
    if init_nodes is None:
        nodes0 = straight_path(x, y, total_time, n_segments).nodes
    else:
        nodes0 = np.array(init_nodes, dtype=float)
        nodes0[0], nodes0[-1] = x, y
    rng = rng if rng is not None else np.random.default_rng(0)
    bump_scale = max(weighted_distance(x, y, params.masses), 1.0)
    nodes0 = _feasible_nodes(nodes0, floor, bump_scale, rng)
    nodes, outcome = _solve_interior(nodes0, total_time, energy, params, floor, settings)
    status = "converged" if outcome.converged else (
        outcome.status if outcome.status != "max-iterations" else "inner-not-converged"
    )
    return _assemble_result(nodes, total_time, energy, params, outcome, status)


def minimize_free_time(
    x: np.ndarray,
    y: np.ndarray,
    energy: float,
    params: PotentialParams,
    n_segments: int = 200,
    settings: SolverSettings | None = None,
    restarts: int = 1,
    rng: np.random.Generator | None = None,
    init_nodes: np.ndarray | None = None,
) -> MinimizeResult:
    """Minimize the action over paths x -> y and over the duration.

    The outer search brackets the optimal T around the free-particle guess
    ||x - y|| / sqrt(E), shrinks by golden section, then polishes T until the
    interior-node energy agrees with E (transversality). Near-coincident
    endpoints short-circuit to a degenerate result at the time floor.

    Args:
        x, y: Endpoint configurations, collision-free.
        energy: Fixed energy level E > 0.
        params: Exponent and masses.
        n_segments: Segments per path.
        settings: Solver tolerances; defaults when None.
        restarts: Independent starts (first straight, later ones perturbed);
            the best converged result wins.
        rng: Source for restart perturbations; a fixed default otherwise.
        init_nodes: Optional warm-start nodes of shape (n_segments+1, N, n)
            for the first attempt; endpoints are overwritten with x and y.

    Returns:
        A :class:`MinimizeResult` whose ``action.value`` estimates the
        distance phi_E(x, y) from above.
    """
    settings = settings or SolverSettings()
    if energy <= 0.0:
        raise ValueError(f"energy must be positive, got {energy}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    floor = _floor_for(x, y, params, settings)
    d = weighted_distance(x, y, params.masses)
    scale = 1.0 + max(weighted_norm(x, params.masses), weighted_norm(y, params.masses))
    if d <= 1e-9 * scale:
        nodes0 = straight_path(x, y, settings.time_floor, n_segments).nodes
        nodes, outcome = _solve_interior(
            nodes0, settings.time_floor, energy, params, floor, settings
        )
        return _assemble_result(
            nodes, settings.time_floor, energy, params, outcome,
            "degenerate-endpoints", degenerate=True,
        )

    if init_nodes is not None:
        init_nodes = np.array(init_nodes, dtype=float)
        if init_nodes.shape != (n_segments + 1,) + x.shape:
            raise ValueError(
                f"init_nodes must have shape {(n_segments + 1,) + x.shape}, "
                f"got {init_nodes.shape}"
            )
        init_nodes[0], init_nodes[-1] = x, y

    rng = rng if rng is not None else np.random.default_rng(0)
    best: MinimizeResult | None = None
    for attempt in range(restarts):
        result = _free_time_single(
            x, y, energy, params, n_segments, settings, floor, d, attempt, rng,
            init_nodes if attempt == 0 else None,
        )
        if best is None:
            best = result
        elif result.converged and (not best.converged or result.value < best.value):
            best = result
        elif not best.converged and result.value < best.value:
            best = result
    assert best is not None
    return best


def _free_time_single(
    x, y, energy, params, n_segments, settings: SolverSettings, floor, dist, attempt, rng,
    init_nodes=None,
) -> MinimizeResult:
    t_guess = max(dist / math.sqrt(energy), 10.0 * settings.time_floor)
    if init_nodes is not None:
        warm = {"nodes": init_nodes}
    else:
        warm = {"nodes": straight_path(x, y, t_guess, n_segments).nodes}
        if attempt > 0:
            warm["nodes"] = _bumped_nodes(warm["nodes"], 0.1 * dist / math.sqrt(2.0), rng)
    warm["nodes"] = _feasible_nodes(warm["nodes"], floor, max(dist, 1.0), rng)
    cache: dict[float, tuple] = {}

    def solve_at(total_time: float):
        if total_time in cache:
            return cache[total_time]
        nodes, outcome = _solve_interior(
            warm["nodes"], total_time, energy, params, floor, settings
        )
        if outcome.converged:
            warm["nodes"] = nodes
        cache[total_time] = (nodes, outcome)
        return cache[total_time]

    def value_at(total_time: float) -> float:
        nodes, _ = solve_at(total_time)
        value, _, _, _, _ = _value_grad_parts(nodes, total_time, energy, params)
        return value

    lo, mid, hi = 0.5 * t_guess, t_guess, 2.0 * t_guess
    lo = max(lo, settings.time_floor)
    f_lo, f_mid, f_hi = value_at(lo), value_at(mid), value_at(hi)
    boundary = False
    for _ in range(80):
        if f_lo < f_mid:
            if lo <= settings.time_floor * (1.0 + 1e-12):
                boundary = True
                break
            hi, f_hi, mid, f_mid = mid, f_mid, lo, f_lo
            lo = max(0.5 * lo, settings.time_floor)
            f_lo = value_at(lo)
        elif f_hi < f_mid:
            lo, f_lo, mid, f_mid = mid, f_mid, hi, f_hi
            hi *= 2.0
            if hi > 1e7 * t_guess:
                nodes, outcome = solve_at(mid)
                return _assemble_result(
                    nodes, mid, energy, params, outcome, "bracket-failure",
                    restart_index=attempt,
                )
            f_hi = value_at(hi)
        else:
            break

    if boundary:
        nodes, outcome = solve_at(settings.time_floor)
        return _assemble_result(
            nodes, settings.time_floor, energy, params, outcome,
            "boundary-time-floor", degenerate=True, restart_index=attempt,
        )

    t_best, _ = optimize.golden_section(
        value_at, lo, hi, rel_tol=settings.time_bracket_tol
    )

    # transversality polish: the interior-node energy level is monotone
    # decreasing in T, so a safeguarded secant drives median(h) to E
    def mismatch(total_time: float) -> float:
        nodes, _ = solve_at(total_time)
        path = DiscretePath(total_time, nodes)
        return float(np.median(energy_profile(path, params))) - energy

    tol_abs = settings.energy_tol * energy
    polish_target = min(0.25 * tol_abs, settings.polish_rtol * energy)
    t_cur = t_best
    g_cur = mismatch(t_cur)
    t_prev, g_prev = None, None
    for _ in range(settings.max_polish):
        if abs(g_cur) <= polish_target:
            break
        if t_prev is None or g_cur == g_prev:
            step = 0.02 * t_cur * (1.0 if g_cur > 0.0 else -1.0)
            t_next = t_cur + step
        else:
            t_next = t_cur - g_cur * (t_cur - t_prev) / (g_cur - g_prev)
            t_next = min(max(t_next, 0.5 * t_cur), 2.0 * t_cur)
        t_next = max(t_next, settings.time_floor)
        t_prev, g_prev = t_cur, g_cur
        t_cur = t_next
        g_cur = mismatch(t_cur)

    nodes, outcome = solve_at(t_cur)
    path = DiscretePath(t_cur, nodes)
    prof = energy_profile(path, params)
    max_miss = float(np.max(np.abs(prof - energy)))
    if not outcome.converged:
        status = outcome.status if outcome.status != "max-iterations" else "inner-not-converged"
    elif max_miss > tol_abs:
        status = "transversality-miss"
    else:
        status = "converged"
    return _assemble_result(nodes, t_cur, energy, params, outcome, status, restart_index=attempt)
