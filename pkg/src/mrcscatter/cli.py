"""Command-line front end.

Subcommands: solve (direct problem), synthesize (near-field data generation),
invert (shape reconstruction), oracle (exact sphere reference), fieldmap
(field samples along a ray to CSV).  All outputs are deterministic given the
configuration and seed; set MRC_LOG=DEBUG|INFO|WARNING for verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import fields, inverse_solver, serialize, sphere_oracle
from .direct_solver import WaveContext, mrc_solve
from .geometry import (
    Direction,
    SurfaceError,
    fibonacci_directions,
    make_quadrature,
    surface_from_descriptor,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNCONVERGED = 2


class CliError(Exception):
    """Fatal configuration or input error (exit code 1)."""


def _setup_logging() -> None:
    level = os.environ.get("MRC_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _load_config(path: str, schema: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}") from exc
    try:
        serialize.validate(cfg, schema)
    except serialize.SchemaError as exc:
        raise CliError(str(exc)) from exc
    return cfg


def _surface(cfg: dict):
    try:
        return surface_from_descriptor(cfg["surface"])
    except SurfaceError as exc:
        raise CliError(f"invalid surface: {exc}") from exc


def _context(k: float, alpha_pair) -> WaveContext:
    theta, phi = alpha_pair
    return WaveContext(float(k), Direction(float(theta), float(phi)))


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args) -> int:
    cfg = _load_config(args.config, "config_solve")
    surface = _surface(cfg)
    ctx = _context(cfg["k"], cfg["alpha"])
    sol = mrc_solve(
        surface,
        ctx,
        bc=cfg["bc"],
        eps_target=cfg["eps_target"],
        L_start=cfg.get("L_start", 0),
        L_max=cfg.get("L_max", 30),
        quad_degree_factor=cfg.get("quad_degree_factor", 2.5),
        svd_cutoff=cfg.get("svd_cutoff", 1e-12),
    )
    out = _out_dir(args.out)
    doc = serialize.solution_to_jsonable(sol, ctx, surface.descriptor(), cfg["eps_target"])
    serialize.validate(doc, "direct_solution")
    serialize.dump_file(out / "solution.json", doc)
    logger.info(
        "solve: L=%d residual=%.3e converged=%s", sol.coefficients.L, sol.residual, sol.converged
    )
    return EXIT_OK if sol.converged else EXIT_UNCONVERGED


def _forward_solutions(cfg: dict, surface):
    fw = cfg.get("forward", {})
    bc = cfg.get("bc", "dirichlet")
    sols = []
    for e in cfg["entries"]:
        ctx = _context(e["k"], e["alpha"])
        sol = mrc_solve(
            surface,
            ctx,
            bc=bc,
            eps_target=fw.get("eps_target", 1e-8),
            L_start=fw.get("L_start", 0),
            L_max=fw.get("L_max", 30),
            quad_degree_factor=fw.get("quad_degree_factor", 2.5),
            svd_cutoff=fw.get("svd_cutoff", 1e-12),
        )
        sols.append((ctx, sol))
    return sols


def cmd_synthesize(args) -> int:
    cfg = _load_config(args.config, "config_synthesize")
    surface = _surface(cfg)
    R = float(cfg["R"])
    if R <= surface.max_radius():
        raise CliError(
            f"measurement radius {R} must enclose the obstacle "
            f"(max radius {surface.max_radius()})"
        )
    qcfg = cfg.get("quadrature", {"n_theta": 24, "n_phi": 48})
    quad = make_quadrature(qcfg["n_theta"], qcfg["n_phi"])
    sols = _forward_solutions(cfg, surface)
    entries = []
    all_converged = True
    for ctx, sol in sols:
        all_converged &= sol.converged
        samples = fields.field_on_sphere(sol.coefficients, ctx, R, quad)
        entries.append(inverse_solver.NearFieldEntry(ctx=ctx, samples=samples, delta=0.0))
    data = inverse_solver.NearFieldData(R=R, quadrature=quad, entries=tuple(entries))
    delta = float(cfg.get("delta", 0.0))
    data = inverse_solver.add_noise(data, delta, seed=args.seed)
    provenance = {
        "surface": surface.descriptor(),
        "bc": cfg.get("bc", "dirichlet"),
        "forward_eps": cfg.get("forward", {}).get("eps_target", 1e-8),
        "forward_L": [sol.coefficients.L for _, sol in sols],
        "forward_residual": [sol.residual for _, sol in sols],
        "delta": delta,
        "seed": args.seed,
    }
    out = _out_dir(args.out)
    doc = serialize.near_field_to_jsonable(data, provenance)
    serialize.validate(doc, "near_field_data")
    serialize.dump_file(out / "near_field.json", doc)
    logger.info("synthesize: %d entries on %d nodes", len(entries), len(quad))
    return EXIT_OK if all_converged else EXIT_UNCONVERGED


def cmd_invert(args) -> int:
    cfg = _load_config(args.config, "config_invert")
    data_path = Path(args.data)
    if not data_path.is_file():
        raise CliError(f"data file not found: {args.data}")
    doc = json.loads(data_path.read_text(encoding="utf-8"))
    try:
        serialize.validate(doc, "near_field_data")
    except serialize.SchemaError as exc:
        raise CliError(str(exc)) from exc
    data = serialize.near_field_from_jsonable(doc)
    dcfg = cfg["directions"]
    if dcfg["type"] == "fibonacci":
        dirs = fibonacci_directions(dcfg["count"])
    else:
        dirs = [Direction(float(t), float(p)) for t, p in dcfg["items"]]
    bracket = tuple(cfg["bracket"]) if "bracket" in cfg else None
    rec = inverse_solver.stable_reconstruct(
        data,
        dirs,
        bracket=bracket,
        L_schedule=tuple(cfg.get("L_schedule", inverse_solver.DEFAULT_L_SCHEDULE)),
        stability_tol=cfg.get("stability_tol", 0.05),
        residual_threshold=cfg.get("residual_threshold", 0.5),
        quorum=cfg.get("quorum", 0.95),
        grid_n=cfg.get("grid_n", 64),
        harmonic_degree=cfg.get("harmonic_degree", 4),
    )
    out = _out_dir(args.out)
    rdoc = serialize.reconstruction_to_jsonable(rec)
    serialize.validate(rdoc, "reconstruction")
    serialize.dump_file(out / "reconstruction.json", rdoc)
    with open(out / "reconstruction.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "phi", "r"])
        for d, r in zip(rec.directions, rec.radii):
            writer.writerow(
                [format(d.theta, ".17g"), format(d.phi, ".17g"), format(float(r), ".17g")]
            )
    logger.info(
        "invert: L=%d resolved %.0f%% converged=%s",
        rec.L_selected, 100 * rec.resolution_fraction, rec.converged,
    )
    return EXIT_OK if rec.converged else EXIT_UNCONVERGED


def cmd_oracle(args) -> int:
    cfg = _load_config(args.config, "config_oracle")
    ctx = _context(cfg["k"], cfg["alpha"])
    coeffs = sphere_oracle.sphere_scattering_coeffs(
        float(cfg["radius"]), ctx, int(cfg["L"]), cfg["bc"]
    )
    out = _out_dir(args.out)
    doc = serialize.oracle_to_jsonable(coeffs, ctx, float(cfg["radius"]), cfg["bc"])
    serialize.validate(doc, "oracle_reference")
    serialize.dump_file(out / "oracle.json", doc)
    return EXIT_OK


def cmd_fieldmap(args) -> int:
    cfg = _load_config(args.config, "config_fieldmap")
    sol_path = Path(cfg["solution"])
    if not sol_path.is_absolute():
        sol_path = Path(args.config).parent / sol_path
    if not sol_path.is_file():
        raise CliError(f"solution file not found: {sol_path}")
    sdoc = json.loads(sol_path.read_text(encoding="utf-8"))
    coeffs, ctx = serialize.solution_from_jsonable(sdoc)
    ray = cfg["ray"]
    d = Direction(float(ray["direction"][0]), float(ray["direction"][1]))
    radii = np.linspace(float(ray["r_start"]), float(ray["r_stop"]), int(ray["n"]))
    points = radii[:, None] * d.vector[None, :]
    v = fields.scattered_field(coeffs, ctx, points)
    u = fields.total_field(coeffs, ctx, points)
    out = _out_dir(args.out)
    with open(out / "fieldmap.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "re_scattered", "im_scattered", "re_total", "im_total"])
        for p, vs, us in zip(points, v, u):
            writer.writerow(
                [format(c, ".17g") for c in (*p, vs.real, vs.imag, us.real, us.imag)]
            )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrcscatter",
        description="Obstacle scattering: direct solves, data synthesis, shape reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (synthesize)")
        p.add_argument("--threads", type=int, default=None, help="reserved thread cap")

    for name, fn in [
        ("solve", cmd_solve),
        ("synthesize", cmd_synthesize),
        ("oracle", cmd_oracle),
        ("fieldmap", cmd_fieldmap),
    ]:
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("invert")
    p.add_argument("data", help="near-field data JSON file")
    common(p)
    p.set_defaults(func=cmd_invert)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        logger.info("thread cap %d noted; computations are deterministic regardless", args.threads)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
