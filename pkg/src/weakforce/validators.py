"""Randomized validation of explicit configuration-space inequalities.

Three families of bounds tie the weighted norm to pairwise separations and
control how rays and perturbations behave far from collisions. All require
masses normalized so min(m) = 1 (which :func:`weakforce.configspace.mass_vector`
guarantees):

* norm bounds: |x_i| <= sqrt(2) ||x|| per body and R(x) <= 2 sqrt(2) ||x||;
* ray estimates: for t > 70 (1 + ||x||) / r(a) and unit collision-free a,
  the normalized ray point stays within r(a)/30 of a and
  r(x + t a) >= (67/70) r(a) t > 67;
* perturbation estimates: for ||x' - a|| <= lambda r(a), lambda < 1/2,
  separations obey r(x') > (1 - 3 lambda) r(a), relative body directions
  tilt by at most cos >= 1 - 6 lambda, and unit x' keeps
  <a, x'> >= 1 - (9/2) lambda^2.

The ray hypothesis factor 70 and the perturbation constant 3 are the
sharp-enough forms the package asserts; the looser "stated" variants
(factor 1 hypothesis, constant 2) are measured and reported only, since
the first admits counterexamples and the second is not what the triangle
inequality actually yields.

Checkers return margins (slack >= 0 means the inequality holds); suites
draw seeded random samples and aggregate violation counts with replayable
(stream, index) keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .configspace import (
    mass_vector,
    min_separation,
    pair_indices,
    weighted_inner,
    weighted_norm,
)
from .seeding import substream

__all__ = [
    "NormBoundMargins",
    "RayMargins",
    "PerturbationMargins",
    "check_norm_bounds",
    "check_ray_estimates",
    "check_perturbation_estimates",
    "sample_masses",
    "sample_shape",
    "SuiteConfig",
    "SuiteReport",
    "run_norm_suite",
    "run_ray_suite",
    "run_perturbation_suite",
    "run_all_suites",
    "render_geometry_report",
]

RAY_HYPOTHESIS_FACTOR = 70.0
RAY_DIRECTION_DENOM = 30.0
RAY_SEPARATION_FACTOR = 67.0 / 70.0
PERTURBATION_SEPARATION_CONST = 3.0
PERTURBATION_SEPARATION_STATED = 2.0
PERTURBATION_COSINE_CONST = 6.0
PERTURBATION_INNER_CONST = 4.5


def _require_normalized(masses: np.ndarray) -> np.ndarray:
    m = np.asarray(masses, dtype=float)
    if abs(float(m.min()) - 1.0) > 1e-12:
        raise ValueError("masses must be normalized so the smallest equals 1")
    return m


@dataclass(frozen=True)
class NormBoundMargins:
    """Slacks of the per-body and pairwise norm bounds (>= 0 means holds)."""

    body_slack: float
    pair_slack: float

    @property
    def worst(self) -> float:
        return min(self.body_slack, self.pair_slack)


def check_norm_bounds(x: np.ndarray, masses: np.ndarray) -> NormBoundMargins:
    """Margins of |x_i| <= sqrt(2)||x|| and R(x) <= 2 sqrt(2)||x||."""
    m = _require_normalized(masses)
    nrm = weighted_norm(x, m)
    body_max = float(np.linalg.norm(x, axis=1).max())
    i, j = pair_indices(x.shape[0])
    pair_max = float(np.linalg.norm(x[i] - x[j], axis=1).max())
    return NormBoundMargins(
        body_slack=math.sqrt(2.0) * nrm - body_max,
        pair_slack=2.0 * math.sqrt(2.0) * nrm - pair_max,
    )


@dataclass(frozen=True)
class RayMargins:
    """Slacks of the ray-direction and ray-separation estimates."""

    direction_slack: float
    separation_slack: float
    absolute_floor_slack: float

    @property
    def worst(self) -> float:
        return min(self.direction_slack, self.separation_slack, self.absolute_floor_slack)


def check_ray_estimates(
    x: np.ndarray, shape: np.ndarray, masses: np.ndarray, t: float
) -> RayMargins:
    """Margins of the far-ray estimates at the point x + t * shape.

    Requires the growth hypothesis t > 70 (1 + ||x||) / r(shape); the
    conclusions are ||w/||w|| - shape|| <= r(shape)/30 with w = x + t shape,
    r(w) >= (67/70) r(shape) t, and r(w) > 67.

    Raises:
        ValueError: If the hypothesis fails (the estimates are simply not
            claimed there) or the shape is not unit/collision-free.
    """
    m = _require_normalized(masses)
    nrm_a = weighted_norm(shape, m)
    if abs(nrm_a - 1.0) > 1e-9:
        raise ValueError(f"shape must be unit in the weighted norm, got {nrm_a!r}")
    r_a = min_separation(shape)
    if r_a <= 0.0:
        raise ValueError("shape has a collision")
    threshold = RAY_HYPOTHESIS_FACTOR * (1.0 + weighted_norm(x, m)) / r_a
    if not t > threshold:
        raise ValueError(
            f"ray estimates need t > {threshold!r} (70 (1+||x||)/r(shape)), got t = {t!r}"
        )
    w = x + t * shape
    w_unit = w / weighted_norm(w, m)
    direction_err = weighted_norm(w_unit - shape, m)
    r_w = min_separation(w)
    return RayMargins(
        direction_slack=r_a / RAY_DIRECTION_DENOM - direction_err,
        separation_slack=r_w - RAY_SEPARATION_FACTOR * r_a * t,
        absolute_floor_slack=r_w - 67.0,
    )


@dataclass(frozen=True)
class PerturbationMargins:
    """Slacks of the perturbation estimates around a unit shape.

    separation_slack uses the asserted constant 3; stated_separation_slack
    uses the looser constant 2 and is reported, never asserted. inner_slack
    is None unless x' is itself unit (the inner-product estimate presumes
    that).
    """

    separation_slack: float
    stated_separation_slack: float
    cosine_slack: float
    inner_slack: float | None

    @property
    def worst(self) -> float:
        vals = [self.separation_slack, self.cosine_slack]
        if self.inner_slack is not None:
            vals.append(self.inner_slack)
        return min(vals)


def check_perturbation_estimates(
    shape: np.ndarray, perturbed: np.ndarray, lam: float, masses: np.ndarray
) -> PerturbationMargins:
    """Margins of the estimates for x' with ||x' - shape|| <= lambda r(shape).

    Args:
        shape: Unit collision-free configuration a.
        perturbed: The configuration x'.
        lam: The lambda in the hypothesis, 0 < lambda < 1/2.
        masses: Normalized masses.

    Raises:
        ValueError: If lambda is out of range or x' violates the distance
            hypothesis.
    """
    m = _require_normalized(masses)
    nrm_a = weighted_norm(shape, m)
    if abs(nrm_a - 1.0) > 1e-9:
        raise ValueError(f"shape must be unit in the weighted norm, got {nrm_a!r}")
    r_a = min_separation(shape)
    if r_a <= 0.0:
        raise ValueError("shape has a collision")
    if not 0.0 < lam < 0.5:
        raise ValueError(f"lambda must lie in (0, 1/2), got {lam}")
    dist = weighted_norm(perturbed - shape, m)
    if dist > lam * r_a * (1.0 + 1e-12):
        raise ValueError(
            f"perturbation {dist!r} exceeds the hypothesis bound {lam * r_a!r}"
        )

    r_p = min_separation(perturbed)
    i, j = pair_indices(shape.shape[0])
    rel_a = shape[i] - shape[j]
    rel_p = perturbed[i] - perturbed[j]
    na = np.linalg.norm(rel_a, axis=1)
    npn = np.linalg.norm(rel_p, axis=1)
    cosines = np.einsum("pk,pk->p", rel_a, rel_p) / (na * npn)
    cosine_slack = float(cosines.min()) - (1.0 - PERTURBATION_COSINE_CONST * lam)

    inner_slack = None
    if abs(weighted_norm(perturbed, m) - 1.0) <= 1e-9:
        inner = weighted_inner(shape, perturbed, m)
        inner_slack = inner - (1.0 - PERTURBATION_INNER_CONST * lam**2)

    return PerturbationMargins(
        separation_slack=r_p - (1.0 - PERTURBATION_SEPARATION_CONST * lam) * r_a,
        stated_separation_slack=r_p - (1.0 - PERTURBATION_SEPARATION_STATED * lam) * r_a,
        cosine_slack=cosine_slack,
        inner_slack=inner_slack,
    )


def sample_masses(rng: np.random.Generator, n_bodies: int) -> np.ndarray:
    """Log-uniform masses in [1, 10], renormalized so the minimum is 1."""
    return mass_vector(10.0 ** rng.uniform(0.0, 1.0, n_bodies))


def sample_shape(
    rng: np.random.Generator,
    n_bodies: int,
    dim: int,
    masses: np.ndarray,
    min_sep: float = 0.05,
    max_tries: int = 1000,
) -> np.ndarray:
    """Unit-sphere Gaussian shape, rejected until r(a) >= min_sep."""
    for _ in range(max_tries):
        g = rng.standard_normal((n_bodies, dim))
        nrm = weighted_norm(g, masses)
        if nrm < 1e-12:
            continue
        a = g / nrm
        if min_separation(a) >= min_sep:
            return a
    raise RuntimeError("shape sampling kept hitting near-collisions; loosen min_sep")


@dataclass(frozen=True)
class SuiteConfig:
    """Sampling plan for the geometry suites.

    Each (n_bodies, dim) cell gets ``samples`` draws. Ray times are the
    hypothesis threshold times a log-uniform multiplier in
    t_multiplier_range; lambdas are uniform in lambda_range.
    """

    seed: int = 0
    samples: int = 200
    body_counts: tuple[int, ...] = (2, 3, 5)
    dims: tuple[int, ...] = (2, 3)
    shape_min_sep: float = 0.05
    lambda_range: tuple[float, float] = (0.01, 0.49)
    t_multiplier_range: tuple[float, float] = (1.0 + 1e-6, 100.0)
    position_scale_range: tuple[float, float] = (0.1, 10.0)


@dataclass(frozen=True)
class SuiteReport:
    """Aggregated outcome of one inequality family."""

    name: str
    checked: int
    skipped: int
    violations: int
    worst_margin: float
    stated_violations: int = 0  # measured-only variants (never asserted)
    replay: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.violations == 0


_REPLAY_CAP = 20


def run_norm_suite(cfg: SuiteConfig) -> SuiteReport:
    """Check the norm bounds on random configurations (collisions allowed)."""
    checked = 0
    violations = 0
    worst = math.inf
    replay = []
    for nb in cfg.body_counts:
        for dim in cfg.dims:
            stream = f"norm-{nb}-{dim}"
            rng = substream(cfg.seed, stream)
            masses = sample_masses(rng, nb)
            lo, hi = cfg.position_scale_range
            for k in range(cfg.samples):
                scale = math.exp(rng.uniform(math.log(lo), math.log(hi)))
                x = scale * rng.standard_normal((nb, dim))
                margins = check_norm_bounds(x, masses)
                checked += 1
                worst = min(worst, margins.worst)
                if margins.worst < 0.0:
                    violations += 1
                    if len(replay) < _REPLAY_CAP:
                        replay.append((stream, k))
    return SuiteReport(
        name="norm-bounds", checked=checked, skipped=0, violations=violations,
        worst_margin=worst, replay=tuple(replay),
    )


def run_ray_suite(cfg: SuiteConfig) -> SuiteReport:
    """Check the ray estimates at hypothesis-satisfying times."""
    checked = 0
    violations = 0
    worst = math.inf
    replay = []
    for nb in cfg.body_counts:
        for dim in cfg.dims:
            stream = f"ray-{nb}-{dim}"
            rng = substream(cfg.seed, stream)
            masses = sample_masses(rng, nb)
            lo, hi = cfg.position_scale_range
            mlo, mhi = cfg.t_multiplier_range
            for k in range(cfg.samples):
                a = sample_shape(rng, nb, dim, masses, cfg.shape_min_sep)
                scale = math.exp(rng.uniform(math.log(lo), math.log(hi)))
                x = scale * rng.standard_normal((nb, dim))
                r_a = min_separation(a)
                threshold = RAY_HYPOTHESIS_FACTOR * (1.0 + weighted_norm(x, masses)) / r_a
                mult = math.exp(rng.uniform(math.log(mlo), math.log(mhi)))
                t = threshold * mult
                margins = check_ray_estimates(x, a, masses, t)
                checked += 1
                worst = min(worst, margins.worst)
                if margins.worst < 0.0:
                    violations += 1
                    if len(replay) < _REPLAY_CAP:
                        replay.append((stream, k))
    return SuiteReport(
        name="ray-estimates", checked=checked, skipped=0, violations=violations,
        worst_margin=worst, replay=tuple(replay),
    )


def run_perturbation_suite(cfg: SuiteConfig) -> SuiteReport:
    """Check the perturbation estimates, including the unit-projected case.

    Each draw checks a generic x' inside the lambda r(a) ball; every other
    draw also projects x' back to the unit sphere (with its effective
    lambda) to exercise the inner-product estimate. Projections whose
    effective lambda leaves (0, 1/2) are skipped, not counted.
    """
    checked = 0
    skipped = 0
    violations = 0
    stated_violations = 0
    worst = math.inf
    replay = []
    for nb in cfg.body_counts:
        for dim in cfg.dims:
            stream = f"perturb-{nb}-{dim}"
            rng = substream(cfg.seed, stream)
            masses = sample_masses(rng, nb)
            llo, lhi = cfg.lambda_range
            for k in range(cfg.samples):
                a = sample_shape(rng, nb, dim, masses, cfg.shape_min_sep)
                r_a = min_separation(a)
                lam = rng.uniform(llo, lhi)
                u = rng.standard_normal((nb, dim))
                u /= weighted_norm(u, masses)
                radius = rng.uniform(0.5, 1.0) * lam * r_a
                xp = a + radius * u
                margins = check_perturbation_estimates(a, xp, lam, masses)
                checked += 1
                worst = min(worst, margins.worst)
                if margins.worst < 0.0:
                    violations += 1
                    if len(replay) < _REPLAY_CAP:
                        replay.append((stream, k))
                if margins.stated_separation_slack < 0.0:
                    stated_violations += 1

                if k % 2 == 0:
                    xp_unit = xp / weighted_norm(xp, masses)
                    lam_eff = weighted_norm(xp_unit - a, masses) / r_a
                    if not 0.0 < lam_eff < 0.5:
                        skipped += 1
                        continue
                    margins_u = check_perturbation_estimates(a, xp_unit, lam_eff, masses)
                    checked += 1
                    worst = min(worst, margins_u.worst)
                    if margins_u.worst < 0.0:
                        violations += 1
                        if len(replay) < _REPLAY_CAP:
                            replay.append((stream + "-unit", k))
                    if margins_u.stated_separation_slack < 0.0:
                        stated_violations += 1
    return SuiteReport(
        name="perturbation-estimates", checked=checked, skipped=skipped,
        violations=violations, worst_margin=worst,
        stated_violations=stated_violations, replay=tuple(replay),
    )


def run_all_suites(cfg: SuiteConfig) -> tuple[SuiteReport, ...]:
    return (run_norm_suite(cfg), run_ray_suite(cfg), run_perturbation_suite(cfg))


def render_geometry_report(reports: tuple[SuiteReport, ...], cfg: SuiteConfig) -> str:
    """Deterministic plain-text rendering of geometry suite results."""
    lines = [
        "geometry validation suites",
        f"seed = {cfg.seed}  samples per cell = {cfg.samples}",
        f"body counts = {list(cfg.body_counts)}  dims = {list(cfg.dims)}",
        "",
    ]
    total_violations = 0
    for rep in reports:
        total_violations += rep.violations
        lines.append(f"[{rep.name}]")
        lines.append(f"  checked = {rep.checked}  skipped = {rep.skipped}")
        lines.append(f"  violations = {rep.violations}")
        lines.append(f"  worst margin = {rep.worst_margin!r}")
        if rep.name == "perturbation-estimates":
            lines.append(
                f"  stated-constant (2 lambda) violations, reported only = {rep.stated_violations}"
            )
        for stream, idx in rep.replay:
            lines.append(f"  replay: substream {stream!r} sample {idx}")
        lines.append("")
    lines.append("status: " + ("PASS" if total_violations == 0 else "FAIL"))
    return "\n".join(lines) + "\n"
