"""Command-line interface.

Subcommands:
  generate   synthesize a supertoroid cloud (full or partial view, noise)
  fit        recover a 12-parameter model from a cloud file
  eval       query distances / normals / curvatures against a model
  benchmark  repeat a fit N times with different downsampling seeds

Exit codes: 0 success, 1 usage error, 2 data error, 3 optimizer failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as stio
from .cloud import CameraView, add_noise, partial_view, sample_surface
from .diffgeo import (fundamental_forms, normal as surface_normal,
                      normal_curvatures, principal_and_mean_curvature,
                      unit_tangents)
from .errors import (OptimizerFailure, ParseError, SupertoroidError,
                     UnsupportedFormat)
from .fitting import FitConfig, fit
from .geometry import (Intrinsics, Pose, SupertoroidModel, classify,
                       implicit_value, signed_pow, surface_point)
from .meridian import meridian_distance


class _UsageError(Exception):
    pass


def _floats(text: str, n: int, flag: str) -> list:
    parts = text.split(",")
    if len(parts) != n:
        raise _UsageError(f"{flag} expects {n} comma-separated values")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"{flag} expects numbers") from None


def _grid(text: str) -> tuple:
    try:
        ne, no = text.lower().split("x")
        return int(ne), int(no)
    except ValueError:
        raise _UsageError("--n expects a grid like 64x64") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supertoroid",
        description="Model, sample, and fit supertoroids to point clouds.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="synthesize a surface cloud")
    gen.add_argument("--a", default="1,1,1", help="a1,a2,a3 half-axes (m)")
    gen.add_argument("--a4", type=float, default=2.0)
    gen.add_argument("--eps", default="1,1", help="eps1,eps2 exponents")
    gen.add_argument("--pose", default=None,
                     help="tx,ty,tz,q0,q1,q2,q3 (default identity)")
    gen.add_argument("--n", default="64x64", help="eta x omega sample grid")
    gen.add_argument("--mode", default="uniform_angle",
                     choices=["uniform_angle", "arclength_adaptive"])
    gen.add_argument("--camera", default=None,
                     help="x,y,z camera position for a partial view")
    gen.add_argument("--look-at", default="0,0,0")
    gen.add_argument("--noise", type=float, default=0.0,
                     help="Gaussian sigma per coordinate (m)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", default=None, choices=["xyz", "ply"])

    fit_p = sub.add_parser("fit", help="fit a model to a cloud file")
    fit_p.add_argument("cloud")
    _add_fit_flags(fit_p)
    fit_p.add_argument("--seed", type=int, default=0)
    fit_p.add_argument("--prior", default=None,
                       help="a1,..,eps2,tx,ty,tz,q0,..,q3 (13 values); "
                            "skips stage 1")
    fit_p.add_argument("--overlay", default=None,
                       help="write cloud+surface PLY overlay here")
    fit_p.add_argument("--out", default=None,
                       help="report JSON path (default stdout)")

    ev = sub.add_parser("eval", help="query a model")
    ev.add_argument("--model", default=None,
                    help="fit-report JSON carrying the model")
    ev.add_argument("--params", default=None,
                    help="a1,a2,a3,a4,eps1,eps2,tx,ty,tz,q0,q1,q2,q3")
    ev.add_argument("--point", default=None, help="world point x,y,z")
    ev.add_argument("--cloud", default=None, help="cloud file to evaluate")
    ev.add_argument("--surface", default=None,
                    help="surface parameters eta,omega")
    ev.add_argument("--out", default=None)

    bench = sub.add_parser("benchmark",
                           help="repeat a fit with different seeds")
    bench.add_argument("cloud")
    _add_fit_flags(bench)
    bench.add_argument("--runs", type=int, default=10)
    bench.add_argument("--seed-base", type=int, default=0)
    bench.add_argument("--out", default=None, help="JSON document path")
    return parser


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stage1-points", type=int, default=150)
    p.add_argument("--stage2-points", type=int, default=1000)
    p.add_argument("--a4-min", type=float, default=1.05)
    p.add_argument("--a4-max", type=float, default=20.0)
    p.add_argument("--eps1-bounds", default=None, help="lo,hi")
    p.add_argument("--eps2-bounds", default=None, help="lo,hi")
    p.add_argument("--a4-lambda", default="0",
                   help="weight of the hole-opening term, or 'auto'")
    p.add_argument("--a3-init", type=float, default=None)
    p.add_argument("--stage1-exponent", default="eps2",
                   choices=["eps1", "eps2"])


def _config_from_args(args) -> FitConfig:
    kwargs = dict(
        stage1_points=args.stage1_points,
        stage2_points=args.stage2_points,
        a4_min=args.a4_min,
        a4_max=args.a4_max,
        a3_init=args.a3_init,
        stage1_exponent=args.stage1_exponent,
    )
    if args.eps1_bounds:
        kwargs["eps1_bounds"] = tuple(_floats(args.eps1_bounds, 2,
                                              "--eps1-bounds"))
    if args.eps2_bounds:
        kwargs["eps2_bounds"] = tuple(_floats(args.eps2_bounds, 2,
                                              "--eps2-bounds"))
    if args.a4_lambda == "auto":
        kwargs["a4_lambda_auto"] = True
    else:
        try:
            kwargs["a4_lambda"] = float(args.a4_lambda)
        except ValueError:
            raise _UsageError("--a4-lambda expects a number or 'auto'") \
                from None
    try:
        return FitConfig(**kwargs)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _model_from_args(args) -> SupertoroidModel:
    if (args.model is None) == (args.params is None):
        raise _UsageError("pass exactly one of --model / --params")
    if args.params is not None:
        v = _floats(args.params, 13, "--params")
        try:
            return SupertoroidModel(
                intrinsics=Intrinsics(*v[0:6]),
                pose=Pose(np.array(v[6:9]), np.array(v[9:13])),
            )
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
    with open(args.model, "r", encoding="utf-8") as fh:
        doc = stio.document_loads(fh.read())
    node = doc.get("result", doc).get("model", doc.get("model"))
    if node is None:
        raise ParseError(1, "document carries no model")
    return stio.model_from_dict(node)


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_generate(args) -> int:
    a = _floats(args.a, 3, "--a")
    eps = _floats(args.eps, 2, "--eps")
    n_eta, n_omega = _grid(args.n)
    try:
        intr = Intrinsics(a[0], a[1], a[2], args.a4, eps[0], eps[1])
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    if args.pose:
        p = _floats(args.pose, 7, "--pose")
        pose = Pose(np.array(p[:3]), np.array(p[3:]))
    else:
        pose = Pose.identity()
    model = SupertoroidModel(intrinsics=intr, pose=pose)

    cloud = sample_surface(model, n_eta, n_omega, mode=args.mode)
    if args.camera:
        cam = CameraView(position=np.array(_floats(args.camera, 3,
                                                   "--camera")),
                         look_at=np.array(_floats(args.look_at, 3,
                                                  "--look-at")))
        cloud = partial_view(cloud, cam)
    if args.noise > 0:
        cloud = add_noise(cloud, args.noise, args.seed)
    stio.write_cloud(cloud, args.out, fmt=args.format)
    sys.stderr.write(f"wrote {len(cloud)} points to {args.out}\n")
    return 0


def _cmd_fit(args) -> int:
    cfg = _config_from_args(args)
    prior = None
    if args.prior:
        v = _floats(args.prior, 13, "--prior")
        try:
            prior = SupertoroidModel(
                intrinsics=Intrinsics(*v[0:6]),
                pose=Pose(np.array(v[6:9]), np.array(v[9:13])))
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
    cloud = stio.read_cloud(args.cloud)
    report = fit(cloud, cfg, prior=prior, seed=args.seed)
    doc = stio.fit_document(report, cfg, args.cloud, len(cloud))
    _write_output(stio.document_dumps(doc), args.out)
    if args.overlay:
        stio.export_fit_overlay(report.model, cloud, args.overlay)
    return 0


def _point_record(model: SupertoroidModel, p_world) -> dict:
    i = model.intrinsics
    local = model.pose.to_canonical(np.asarray(p_world, float))
    d, dec = meridian_distance(i, local)
    record = {
        "point": [float(v) for v in np.asarray(p_world, float)],
        "distance": d,
        "signed_distance": dec.signed,
        "region": classify(i, local, tol=1e-7).value,
        "degenerate": dec.degenerate,
        "foot_point": [float(v)
                       for v in model.pose.to_world(dec.p_s)],
    }
    try:
        eta, omega = _surface_params_of_foot(i, dec)
        record.update(_surface_record(model, eta, omega))
    except (SupertoroidError, ValueError):
        record["normal"] = None
    return record


def _surface_params_of_foot(i: Intrinsics, dec) -> tuple:
    omega = dec.omega_s
    rho_s = float(np.hypot(dec.p_s[0], dec.p_s[1]))
    ring = float(np.hypot(dec.r_pi[0], dec.r_pi[1]))
    a_ws = max(ring / i.a4, 1e-300) if i.a4 > 0 else 1e-300
    c_part = (rho_s - ring) / a_ws
    s_part = dec.p_s[2] / i.a3
    eta = float(np.arctan2(signed_pow(s_part, 1.0 / i.eps1),
                           signed_pow(c_part, 1.0 / i.eps1)))
    return eta, omega


def _surface_record(model: SupertoroidModel, eta: float,
                    omega: float) -> dict:
    i = model.intrinsics
    rot = model.pose.rotation_matrix()
    record: dict = {
        "surface_params": {"eta": eta, "omega": omega},
        "normal": [float(v) for v in rot @ surface_normal(i, eta, omega)],
    }
    t_o, t_e = unit_tangents(i, eta, omega)
    record["tangent_omega"] = [float(v) for v in rot @ t_o]
    record["tangent_eta"] = [float(v) for v in rot @ t_e]
    try:
        k_o, k_e = normal_curvatures(i, eta, omega)
        record["curve_curvatures"] = {"k_omega": k_o, "k_eta": k_e}
    except SeamSingularity:
        record["curve_curvatures"] = None
    try:
        info = principal_and_mean_curvature(fundamental_forms(i, eta, omega))
        record["principal_curvatures"] = {"k1": info.k1, "k2": info.k2,
                                          "mean_H": info.mean_H}
    except SupertoroidError:
        record["principal_curvatures"] = None
    return record


def _cmd_eval(args) -> int:
    model = _model_from_args(args)
    chosen = [x is not None for x in (args.point, args.cloud, args.surface)]
    if sum(chosen) != 1:
        raise _UsageError("pass exactly one of --point / --cloud / --surface")
    doc: dict = {"schema_version": stio.SCHEMA_VERSION, "kind": "evaluation",
                 "model": stio.model_to_dict(model)}
    if args.surface is not None:
        eta, omega = _floats(args.surface, 2, "--surface")
        rec = _surface_record(model, eta, omega)
        rec["point"] = [float(v) for v in model.pose.to_world(
            surface_point(model.intrinsics, eta, omega))]
        rec["implicit_value"] = float(implicit_value(
            model.intrinsics, surface_point(model.intrinsics, eta, omega)))
        doc["surface"] = rec
    elif args.point is not None:
        doc["points"] = [_point_record(model,
                                       _floats(args.point, 3, "--point"))]
    else:
        cloud = stio.read_cloud(args.cloud)
        doc["points"] = [_point_record(model, p) for p in cloud.points]
    _write_output(stio.document_dumps(doc), args.out)
    return 0


def _cmd_benchmark(args) -> int:
    cfg = _config_from_args(args)
    if args.runs < 1:
        raise _UsageError("--runs must be at least 1")
    cloud = stio.read_cloud(args.cloud)
    rows = []
    for run in range(args.runs):
        seed = args.seed_base + run
        report = fit(cloud, cfg, seed=seed)
        rows.append({
            "run": run,
            "seed": seed,
            "rms_residual": report.rms_residual,
            "quality": report.quality,
            "converged": report.converged,
            "t_s1": report.wall_time[0],
            "t_s2": report.wall_time[1],
            "t_total": report.wall_time[2],
        })
    doc = stio.benchmark_document(cfg, args.cloud, len(cloud), rows)
    agg = doc["aggregates"]
    header = (f"{'run':>4} {'seed':>5} {'rms':>12} {'quality':>8} "
              f"{'t_S1[s]':>9} {'t_S2[s]':>9} {'t_total[s]':>10}")
    lines = [header]
    for r in rows:
        lines.append(f"{r['run']:>4} {r['seed']:>5} "
                     f"{r['rms_residual']:>12.6g} {r['quality']:>8} "
                     f"{r['t_s1']:>9.3f} {r['t_s2']:>9.3f} "
                     f"{r['t_total']:>10.3f}")
    lines.append(
        f"G={agg['good']} D={agg['decent']} B={agg['bad']}  "
        f"t_S1={agg['t_s1_mean']:.3f}s t_S2={agg['t_s2_mean']:.3f}s "
        f"t_total={agg['t_total_mean']:.3f}s s_total={agg['s_total']:.3f}s")
    sys.stderr.write("\n".join(lines) + "\n")
    if args.out is not None:
        _write_output(stio.document_dumps(doc), args.out)
    else:
        sys.stdout.write(stio.document_dumps(doc))
    return 0


_DISPATCH = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "benchmark": _cmd_benchmark,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _DISPATCH[args.command](args)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OptimizerFailure as exc:
        sys.stderr.write(f"optimizer failure: {exc}\n")
        return 3
    except (ParseError, UnsupportedFormat, OSError) as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2
    except SupertoroidError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
