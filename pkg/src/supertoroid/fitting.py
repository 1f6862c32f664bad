"""Two-stage supertoroid recovery from point clouds.

Stage 1 finds the hole location and axis: from three axis starts (x, y, z)
it fits the mean superellipse to the cloud, minimizing squared in-plane
radial residuals plus squared out-of-plane offsets over the extrinsics and
(a1, a2, a4, one exponent).  Stage 2 minimizes the squared meridian radial
distance over all 12 model parameters, optionally with a hole-opening term
that rewards larger a4 (useful for partial clouds).

Both stages run a bounded trust-region least-squares solver with
finite-difference Jacobians.  The quaternion is kept on the unit sphere by
normalizing inside the objective plus a soft norm residual that pins the
scale gauge.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .cloud import PointCloud, downsample_random
from .errors import AllStartsFailed, OptimizerFailure, TooFewPoints
from .geometry import (EPS_MAX, EPS_MIN, Intrinsics, Pose, SupertoroidModel,
                       quat_multiply, quat_rotation_z_to, quat_to_matrix,
                       rotation_angle_between)
from .meridian import signed_residuals

_AXIS_X = (1.0, 0.0, 0.0)
_AXIS_Y = (0.0, 1.0, 0.0)
_AXIS_Z = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the two-stage fit."""

    stage1_points: int = 150
    stage2_points: int = 1000
    seeds: tuple = (0,)
    eps1_bounds: tuple = (EPS_MIN, EPS_MAX)
    eps2_bounds: tuple = (EPS_MIN, EPS_MAX)
    a4_lambda: float = 0.0        # weight of the hole-opening reward
    a4_lambda_auto: bool = False  # size the reward at ~1% of initial cost
    a4_min: float = 1.05          # lower bound; set 0 < x <= 1 for holeless fits
    a4_max: float = 20.0
    a3_init: float | None = None  # None: half the extent along the start axis
    stage1_max_nfev: int = 4000
    stage2_max_nfev: int = 12000
    convergence_tol: float = 1e-12
    axis_starts: tuple = (_AXIS_X, _AXIS_Y, _AXIS_Z)
    stage1_exponent: str = "eps2"  # exponent freed in stage 1 ("eps1"|"eps2")
    inlier_tau: float | None = None  # None: 0.02 * recovered a1
    diff_step: float = 1e-7

    def __post_init__(self):
        if self.stage1_points > self.stage2_points:
            raise ValueError("stage1_points must not exceed stage2_points")
        for name in ("eps1_bounds", "eps2_bounds"):
            lo, hi = getattr(self, name)
            if not (EPS_MIN <= lo < hi <= EPS_MAX):
                raise ValueError(f"{name} must satisfy "
                                 f"{EPS_MIN} <= lo < hi <= {EPS_MAX}")
        if self.stage1_exponent not in ("eps1", "eps2"):
            raise ValueError("stage1_exponent must be 'eps1' or 'eps2'")
        if self.a4_lambda < 0:
            raise ValueError("a4_lambda must be non-negative")


@dataclass(frozen=True)
class Stage1Result:
    """Winning coarse model plus per-start diagnostics."""

    model: SupertoroidModel
    cost: float
    start_costs: tuple
    nfev: int


@dataclass(frozen=True)
class FitReport:
    """Outcome of a fit: recovered model plus residual diagnostics."""

    model: SupertoroidModel
    stage1_cost: float
    stage2_cost: float
    rms_residual: float
    inlier_fraction: float
    inlier_tau: float
    iterations: tuple            # residual evaluations per stage
    wall_time: tuple             # (t_stage1, t_stage2, t_total) seconds
    degenerate_point_count: int
    converged: bool
    stage1_start_costs: tuple = ()
    quality: str = ""


def _cloud_scale(points: np.ndarray) -> float:
    centered = points - points.mean(axis=0)
    return max(float(np.median(np.linalg.norm(centered, axis=1))), 1e-9)


def _clip_into_bounds(x0, lb, ub):
    lb = np.asarray(lb, float)
    ub = np.asarray(ub, float)
    span = np.where(np.isfinite(ub - lb), ub - lb, 1.0)
    return np.minimum(np.maximum(x0, lb + 1e-12 * span), ub - 1e-12 * span)


def initial_guess(cloud: PointCloud, cfg: FitConfig, axis) -> SupertoroidModel:
    """Coarse model: centroid translation, hole axis along ``axis``,
    ring radius from the median radial extent, unit exponents."""
    pts = cloud.points
    if pts.shape[0] < 12:
        raise TooFewPoints("need at least 12 points to initialize a fit")
    centroid = pts.mean(axis=0)
    quat = quat_rotation_z_to(axis)
    local = (pts - centroid) @ quat_to_matrix(quat)
    radial = np.hypot(local[:, 0], local[:, 1])
    a12 = max(0.5 * float(np.median(radial)), 1e-6)
    if cfg.a3_init is not None:
        a3 = cfg.a3_init
    else:
        a3 = max(0.5 * float(local[:, 2].max() - local[:, 2].min()), 1e-6)
    a4 = min(max(2.0, cfg.a4_min), cfg.a4_max)
    return SupertoroidModel(
        intrinsics=Intrinsics(a12, a12, a3, a4, 1.0, 1.0),
        pose=Pose(centroid, quat),
    )


def _stage1_residual_parts(x, pts, eps2_fixed, free_exponent):
    t = x[0:3]
    q = x[3:7]
    a1, a2, a4 = x[7], x[8], x[9]
    eps2 = x[10] if free_exponent == "eps2" else eps2_fixed
    local = (pts - t) @ quat_to_matrix(q)
    lx, ly, lz = local[:, 0], local[:, 1], local[:, 2]
    rho = np.hypot(lx, ly)
    on_axis = rho <= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (np.abs(lx / a1) ** (2.0 / eps2)
             + np.abs(ly / a2) ** (2.0 / eps2)) ** (eps2 / 2.0)
        ring = np.where(on_axis, a1 * a4, a4 * rho / w)
    radial = rho - ring
    return radial, lz


def stage1_fit(cloud: PointCloud, init: SupertoroidModel, cfg: FitConfig):
    """Coarse hole-axis fit against the mean superellipse.

    Optimizes the extrinsics plus (a1, a2, a4) and one exponent; a3 and the
    other exponent pass through from ``init``.  On optimizer failure the
    initial model is returned with infinite cost.
    """
    pts = cloud.points
    scale = _cloud_scale(pts)
    i0 = init.intrinsics
    eps_free = cfg.stage1_exponent
    eps0 = i0.eps2 if eps_free == "eps2" else i0.eps1
    eps_bounds = cfg.eps2_bounds if eps_free == "eps2" else cfg.eps1_bounds

    x0 = np.concatenate([
        init.pose.translation, init.pose.quaternion,
        [i0.a1, i0.a2, i0.a4, eps0],
    ])
    lb = np.array([-np.inf] * 3 + [-np.inf] * 4
                  + [1e-4 * scale, 1e-4 * scale, max(cfg.a4_min, 1e-2),
                     eps_bounds[0]])
    ub = np.array([np.inf] * 3 + [np.inf] * 4
                  + [1e4 * scale, 1e4 * scale, cfg.a4_max, eps_bounds[1]])
    x0 = _clip_into_bounds(x0, lb, ub)
    x_scale = np.array([scale] * 3 + [1.0] * 4 + [scale, scale, 1.0, 1.0])

    def fun(x):
        qn = x[3:7] / np.linalg.norm(x[3:7])
        xx = x.copy()
        xx[3:7] = qn
        radial, lz = _stage1_residual_parts(xx, pts, i0.eps2, eps_free)
        gauge = scale * (x[3:7] @ x[3:7] - 1.0)
        res = np.concatenate([radial, lz, [gauge]])
        return np.nan_to_num(res, nan=1e6 * scale, posinf=1e6 * scale,
                             neginf=-1e6 * scale)

    try:
        sol = least_squares(
            fun, x0, bounds=(lb, ub), method="trf", x_scale=x_scale,
            diff_step=cfg.diff_step, max_nfev=cfg.stage1_max_nfev,
            ftol=cfg.convergence_tol, xtol=cfg.convergence_tol,
            gtol=cfg.convergence_tol)
    except Exception:
        return init, float("inf"), 0

    x = sol.x.copy()
    x[3:7] /= np.linalg.norm(x[3:7])
    radial, lz = _stage1_residual_parts(x, pts, i0.eps2, eps_free)
    cost = float(radial @ radial + lz @ lz)
    if not np.isfinite(cost):
        return init, float("inf"), int(sol.nfev)

    eps1 = x[10] if eps_free == "eps1" else i0.eps1
    eps2 = x[10] if eps_free == "eps2" else i0.eps2
    model = SupertoroidModel(
        intrinsics=Intrinsics(x[7], x[8], i0.a3, x[9], eps1, eps2),
        pose=Pose(x[0:3], x[3:7]),
    )
    return model, cost, int(sol.nfev)


def stage1_multistart(cloud: PointCloud, cfg: FitConfig) -> Stage1Result:
    """Run stage 1 from each configured axis; return the lowest cost.

    Ties break in axis order.  Raises AllStartsFailed when no start
    produces a finite cost.
    """
    results = []
    nfev = 0
    for axis in cfg.axis_starts:
        init = initial_guess(cloud, cfg, axis)
        model, cost, evals = stage1_fit(cloud, init, cfg)
        results.append((model, cost))
        nfev += evals
    costs = tuple(cost for _, cost in results)
    best = int(np.argmin([c if np.isfinite(c) else np.inf for c in costs]))
    if not np.isfinite(costs[best]):
        raise AllStartsFailed("no stage-1 start produced a finite cost")
    return Stage1Result(model=results[best][0], cost=costs[best],
                        start_costs=costs, nfev=nfev)


def _reanchor_after_stage1(model: SupertoroidModel, cloud: PointCloud,
                           cfg: FitConfig) -> SupertoroidModel:
    """Resolve the a1*a4 scale gauge of the stage-1 cost.

    The mean-superellipse residual only pins the products a1*a4 and a2*a4,
    so the tube half-width is re-estimated from the radial residual spread
    and a4 rebalanced to keep the ring radii; a3 is reset to the half
    z-extent in the stage-1 frame unless explicitly configured.
    """
    i = model.intrinsics
    ring_x, ring_y = i.a1 * i.a4, i.a2 * i.a4
    local = model.pose.to_canonical(cloud.points)
    x13 = np.concatenate([model.pose.translation, model.pose.quaternion,
                          [i.a1, i.a2, i.a4, i.eps2]])
    radial, lz = _stage1_residual_parts(x13, cloud.points, i.eps2, "eps2")
    w = math.sqrt(2.0) * float(np.sqrt(np.mean(radial ** 2)))
    w = min(max(w, 0.05 * min(ring_x, ring_y)), 0.95 * min(ring_x, ring_y))
    a4 = min(max(ring_x / w, cfg.a4_min), cfg.a4_max)
    a1 = ring_x / a4
    a2 = ring_y / a4
    if cfg.a3_init is not None:
        a3 = cfg.a3_init
    else:
        a3 = max(0.5 * float(local[:, 2].max() - local[:, 2].min()), 1e-6)
    return SupertoroidModel(
        intrinsics=Intrinsics(a1, a2, a3, a4, i.eps1, i.eps2),
        pose=model.pose,
    )


def stage2_fit(cloud: PointCloud, init: SupertoroidModel,
               cfg: FitConfig) -> FitReport:
    """Full 12-parameter refinement minimizing squared meridian distance.

    Adds -a4_lambda * a4 to the cost when configured (encoded as the
    residual sqrt(lambda * (C - a4)) with C above the a4 upper bound).
    """
    pts = cloud.points
    scale = _cloud_scale(pts)
    x0 = init.as_array()
    lb = np.array([-np.inf] * 3 + [-np.inf] * 4
                  + [1e-4 * scale, 1e-4 * scale, 1e-4 * scale, cfg.a4_min,
                     cfg.eps1_bounds[0], cfg.eps2_bounds[0]])
    ub = np.array([np.inf] * 3 + [np.inf] * 4
                  + [1e4 * scale, 1e4 * scale, 1e4 * scale, cfg.a4_max,
                     cfg.eps1_bounds[1], cfg.eps2_bounds[1]])
    x0 = _clip_into_bounds(x0, lb, ub)
    x_scale = np.array([scale] * 3 + [1.0] * 4
                       + [scale, scale, scale, 1.0, 1.0, 1.0])

    def point_residuals(x):
        qn = x[3:7] / np.linalg.norm(x[3:7])
        rot = quat_to_matrix(qn)
        local = (pts - x[0:3]) @ rot
        intr = Intrinsics(x[7], x[8], x[9], x[10], x[11], x[12])
        res, _ = signed_residuals(intr, local)
        return res

    lam = cfg.a4_lambda
    if cfg.a4_lambda_auto:
        r0 = point_residuals(x0)
        cost0 = float(r0 @ r0)
        lam = 0.01 * cost0 / max(x0[10], 0.1)
    c_a4 = cfg.a4_max + 1.0

    def fun(x):
        res = point_residuals(x)
        extra = [scale * (x[3:7] @ x[3:7] - 1.0)]
        if lam > 0:
            extra.append(math.sqrt(lam * (c_a4 - x[10])))
        res = np.concatenate([res, extra])
        return np.nan_to_num(res, nan=1e6 * scale, posinf=1e6 * scale,
                             neginf=-1e6 * scale)

    t0 = time.perf_counter()
    try:
        sol = least_squares(
            fun, x0, bounds=(lb, ub), method="trf", x_scale=x_scale,
            diff_step=cfg.diff_step, max_nfev=cfg.stage2_max_nfev,
            ftol=cfg.convergence_tol, xtol=cfg.convergence_tol,
            gtol=cfg.convergence_tol)
    except Exception as exc:
        raise OptimizerFailure(f"stage-2 solver failed: {exc}") from exc
    elapsed = time.perf_counter() - t0
    if sol.status < 0 or not np.all(np.isfinite(sol.x)):
        raise OptimizerFailure(f"stage-2 solver failed: {sol.message}")

    x = sol.x.copy()
    x[3:7] /= np.linalg.norm(x[3:7])
    model = SupertoroidModel.from_array(x)
    res, deg = signed_residuals(model.intrinsics,
                                model.pose.to_canonical(pts))
    cost = float(res @ res)
    rms = float(np.sqrt(np.mean(res ** 2)))
    tau = cfg.inlier_tau if cfg.inlier_tau is not None \
        else 0.02 * model.intrinsics.a1
    return FitReport(
        model=model,
        stage1_cost=float("nan"),
        stage2_cost=cost,
        rms_residual=rms,
        inlier_fraction=float(np.mean(np.abs(res) < tau)),
        inlier_tau=float(tau),
        iterations=(0, int(sol.nfev)),
        wall_time=(0.0, elapsed, elapsed),
        degenerate_point_count=int(np.sum(deg)),
        converged=bool(sol.status >= 1),
        quality=_quality_label(rms, model.intrinsics.a1),
    )


def _quality_label(rms: float, scale: float) -> str:
    if rms < 0.02 * scale:
        return "good"
    if rms < 0.05 * scale:
        return "decent"
    return "bad"


def fit(cloud: PointCloud, cfg: FitConfig | None = None,
        prior: SupertoroidModel | None = None,
        seed: int | None = None) -> FitReport:
    """Full pipeline: downsample, stage-1 multistart, downsample, stage 2.

    A supplied ``prior`` model skips stage 1 entirely.  Residual statistics
    in the report are computed over the full input cloud.
    """
    cfg = cfg or FitConfig()
    if len(cloud) < 12:
        raise TooFewPoints("need at least 12 points to fit")
    if seed is None:
        seed = cfg.seeds[0] if cfg.seeds else 0

    t_start = time.perf_counter()
    if prior is None:
        sub1 = downsample_random(cloud, cfg.stage1_points, seed)
        s1 = stage1_multistart(sub1, cfg)
        base = _reanchor_after_stage1(s1.model, sub1, cfg)
        stage1_cost = s1.cost
        start_costs = s1.start_costs
        s1_nfev = s1.nfev
        t_s1 = time.perf_counter() - t_start
    else:
        base = prior
        stage1_cost = float("nan")
        start_costs = ()
        s1_nfev = 0
        t_s1 = 0.0

    sub2 = downsample_random(cloud, cfg.stage2_points, seed)
    report = stage2_fit(sub2, base, cfg)

    res, deg = signed_residuals(report.model.intrinsics,
                                report.model.pose.to_canonical(cloud.points))
    rms = float(np.sqrt(np.mean(res ** 2)))
    t_total = time.perf_counter() - t_start
    return replace(
        report,
        stage1_cost=stage1_cost,
        rms_residual=rms,
        inlier_fraction=float(np.mean(np.abs(res) < report.inlier_tau)),
        iterations=(s1_nfev, report.iterations[1]),
        wall_time=(t_s1, report.wall_time[1], t_total),
        degenerate_point_count=int(np.sum(deg)),
        stage1_start_costs=start_costs,
        quality=_quality_label(rms, report.model.intrinsics.a1),
    )


# Body-frame symmetry rotations of the canonical supertoroid: identity and
# the three 180-degree axis flips.  Swapping a1/a2 with a 90-degree
# z-rotation is also shape-preserving.
_FLIPS = (
    np.array([1.0, 0.0, 0.0, 0.0]),
    np.array([0.0, 1.0, 0.0, 0.0]),
    np.array([0.0, 0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 0.0, 1.0]),
)
_Q_Z90 = np.array([math.cos(math.pi / 4.0), 0.0, 0.0, math.sin(math.pi / 4.0)])


def _fix_quaternion_sign(q: np.ndarray) -> np.ndarray:
    for value in q:
        if abs(value) > 1e-12:
            return q if value > 0 else -q
    return q


def _swap_variant(m: SupertoroidModel) -> SupertoroidModel:
    i = m.intrinsics
    return SupertoroidModel(
        intrinsics=replace(i, a1=i.a2, a2=i.a1),
        pose=Pose(m.pose.translation,
                  quat_multiply(m.pose.quaternion, _Q_Z90)),
    )


def canonicalize(m: SupertoroidModel) -> SupertoroidModel:
    """Map a model to a canonical representative of its symmetry class.

    Enforces a1 >= a2 (folding the swap into a 90-degree body rotation),
    folds out the 180-degree body flips, and fixes the quaternion sign;
    equivalent models map to identical representatives.
    """
    if m.intrinsics.a1 < m.intrinsics.a2:
        m = _swap_variant(m)
    best = None
    for flip in _FLIPS:
        q = _fix_quaternion_sign(quat_multiply(m.pose.quaternion, flip))
        key = tuple(np.round(q, 12))
        if best is None or key > best[0]:
            best = (key, q)
    return SupertoroidModel(
        intrinsics=m.intrinsics,
        pose=Pose(m.pose.translation, best[1]),
    )


@dataclass(frozen=True)
class ModelDifference:
    """Error between two models, minimized over the symmetry orbit."""

    intrinsic_rel: tuple         # per-parameter |est - true| / |true|
    max_intrinsic_rel: float
    rotation_error_deg: float
    translation_error: float


def model_difference(truth: SupertoroidModel,
                     estimate: SupertoroidModel) -> ModelDifference:
    """Parameter errors of ``estimate`` against ``truth`` after resolving
    the supertoroid symmetries (axis flips, a1/a2 swap, quaternion sign)."""
    qt = truth.pose.quaternion
    it = truth.intrinsics.as_array()
    best = None
    for candidate in (estimate, _swap_variant(estimate)):
        ic = candidate.intrinsics.as_array()
        rel = np.abs(ic - it) / np.maximum(np.abs(it), 1e-12)
        for flip in _FLIPS:
            qc = quat_multiply(candidate.pose.quaternion, flip)
            ang = rotation_angle_between(qc, qt)
            score = ang + float(np.sum(rel))
            if best is None or score < best[0]:
                best = (score, rel, ang)
    _, rel, ang = best
    return ModelDifference(
        intrinsic_rel=tuple(float(v) for v in rel),
        max_intrinsic_rel=float(np.max(rel)),
        rotation_error_deg=math.degrees(ang),
        translation_error=float(np.linalg.norm(
            estimate.pose.translation - truth.pose.translation)),
    )
