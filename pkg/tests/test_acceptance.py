"""Acceptance suite: each numbered criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  The whole module finishes in about two minutes.
"""

import cmath
import hashlib
import json
import math
import time

import numpy as np
import pytest

from mrcscatter import fields, specfun as sf
from mrcscatter.cli import EXIT_OK, main as cli_main
from mrcscatter.direct_solver import WaveContext, mrc_solve
from mrcscatter.geometry import (
    Direction,
    PerturbedSphere,
    Sphere,
    fibonacci_directions,
    make_quadrature,
    quadrature_for_degree,
)
from mrcscatter.inverse_solver import (
    NearFieldData,
    NearFieldEntry,
    add_noise,
    stable_reconstruct,
)
from mrcscatter.sphere_oracle import sphere_scattering_coeffs

Z_HAT = Direction(0.0, 0.0)
X_HAT = Direction(math.pi / 2, 0.0)


def report(number: int, name: str, ok: bool, details: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number} ({name}): {status} — {details} [{time.time() - t0:.1f}s]")


@pytest.fixture(scope="module")
def sphere_near_field():
    """Synthesized near-field data for the unit sphere: forward solves at
    relative residual 1e-9 sampled on the R = 3 measurement sphere."""
    quad = make_quadrature(24, 48)
    entries = []
    for k, alpha in [(1.0, Z_HAT), (1.5, X_HAT)]:
        ctx = WaveContext(k, alpha)
        sol = mrc_solve(Sphere(1.0), ctx, "dirichlet", eps_target=1e-9, L_max=16)
        assert sol.converged
        entries.append(
            NearFieldEntry(ctx=ctx, samples=fields.field_on_sphere(sol.coefficients, ctx, 3.0, quad))
        )
    return NearFieldData(R=3.0, quadrature=quad, entries=tuple(entries))


def test_criterion_1_special_functions():
    t0 = time.time()
    # cross-product identity to relative 1e-10
    wronskian_ok = True
    for x in (0.5, 1.0, 5.0, 20.0, 50.0):
        j = sf.spherical_bessel_j_table(21, x)
        y = sf._yn_table(21, np.atleast_1d(x))[:, 0]
        for ell in range(21):
            jp = j[ell - 1] - (ell + 1) / x * j[ell] if ell > 0 else -j[1]
            yp = y[ell - 1] - (ell + 1) / x * y[ell] if ell > 0 else -y[1]
            wronskian_ok &= abs(j[ell] * yp - jp * y[ell] - 1 / x**2) * x**2 < 1e-10
    # orthonormality of the harmonics through degree 8
    quad = quadrature_for_degree(16)
    Y = sf.sph_harm_table(8, quad.theta, quad.phi)
    gram_err = float(np.max(np.abs((Y.conj().T * quad.weights) @ Y - np.eye(81))))
    # outgoing normalization: h_ell(r) ~ exp(ikr)/r for every degree
    r = 1e5
    asym_err = max(
        abs(sf.hankel_out(ell, 1.0, r) * r * cmath.exp(-1j * r) - 1.0) for ell in range(11)
    )
    ok = wronskian_ok and gram_err < 1e-10 and asym_err < 1e-3
    report(
        1, "special functions", ok,
        f"wronskian ok={wronskian_ok}, gram err={gram_err:.1e}, asymptotic dev={asym_err:.1e}",
        t0,
    )
    assert ok


def test_criterion_2_oracle_self_test():
    t0 = time.time()
    rng = np.random.default_rng(31)
    pts = rng.standard_normal((20, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    worst = 0.0
    for k in (1.0, 2.0):
        ctx = WaveContext(k, Direction(0.7, 1.3))
        c = sphere_scattering_coeffs(1.0, ctx, 25, "dirichlet")
        worst = max(worst, float(np.max(np.abs(fields.total_field(c, ctx, pts)))))
        c = sphere_scattering_coeffs(1.0, ctx, 25, "neumann")
        du0 = 1j * k * (pts @ ctx.alpha.vector) * np.exp(1j * k * pts @ ctx.alpha.vector)
        dv = fields.scattered_field_dr(c, ctx, pts)
        worst = max(worst, float(np.max(np.abs(du0 + dv))))
    ok = worst < 1e-10
    report(2, "sphere oracle", ok, f"worst boundary violation {worst:.2e} (soft+hard, k=1,2)", t0)
    assert ok


def test_criterion_3_mrc_matches_oracle():
    t0 = time.time()
    ctx = WaveContext(1.0, Z_HAT)
    details = []
    ok = True
    for bc, coeff_tol in (("dirichlet", 1e-6), ("neumann", 1e-5)):
        sol = mrc_solve(Sphere(1.0), ctx, bc, eps_target=1e-8, L_max=10)
        oracle = sphere_scattering_coeffs(1.0, ctx, sol.coefficients.L, bc)
        n5 = sf.n_modes(5)
        nz = np.abs(oracle.coeffs[:n5]) > 1e-20
        rel = float(
            np.max(
                np.abs(sol.coefficients.coeffs[:n5][nz] - oracle.coeffs[:n5][nz])
                / np.abs(oracle.coeffs[:n5][nz])
            )
        )
        ok &= sol.converged and sol.residual <= 1e-8 and sol.coefficients.L <= 10
        ok &= rel <= coeff_tol
        details.append(f"{bc}: L={sol.coefficients.L} res={sol.residual:.1e} coeff err={rel:.1e}")
    report(3, "direct solver vs oracle", ok, "; ".join(details), t0)
    assert ok


def test_criterion_4_residual_to_field_propagation():
    t0 = time.time()
    surface = PerturbedSphere(1.0, [(2, 0, 0.2)])
    ctx = WaveContext(1.0, Z_HAT)
    ref = mrc_solve(surface, ctx, "dirichlet", eps_target=1e-9, L_max=30)
    quad = make_quadrature(20, 40)
    R = 2.0
    vref = fields.field_on_sphere(ref.coefficients, ctx, R, quad)
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4, 1e-5):
        sol = mrc_solve(surface, ctx, "dirichlet", eps_target=eps, L_max=30)
        v = fields.field_on_sphere(sol.coefficients, ctx, R, quad)
        diff = R * math.sqrt(float(np.sum(quad.weights * np.abs(v - vref) ** 2)))
        ratios.append(diff / eps)
    spread = max(ratios) / min(ratios)
    ok = ref.converged and spread < 20.0
    report(
        4, "O(eps) field error", ok,
        f"ratios {['%.3f' % r for r in ratios]}, spread x{spread:.1f} (< 20)",
        t0,
    )
    assert ok


def test_criterion_5_inverse_clean(sphere_near_field):
    t0 = time.time()
    dirs = fibonacci_directions(50)
    rec = stable_reconstruct(
        sphere_near_field, dirs, bracket=(0.3, 2.5), stability_tol=1e-4
    )
    err = float(np.max(np.abs(rec.radii - 1.0)))
    ok = rec.converged and err <= 1e-3 and rec.L_selected <= 6
    report(
        5, "inverse, clean", ok,
        f"max |r-1| = {err:.2e} (<= 1e-3), stopped at L={rec.L_selected} (<= 6)",
        t0,
    )
    assert ok


def test_criterion_6_inverse_noisy(sphere_near_field):
    t0 = time.time()
    dirs = fibonacci_directions(50)
    max_dir_err = {}
    median_dir_err = {}
    for delta in (0.0, 0.005, 0.01, 0.02):
        maxs, meds = [], []
        for seed in range(20) if delta > 0 else range(1):
            noisy = add_noise(sphere_near_field, delta, seed=seed)
            rec = stable_reconstruct(noisy, dirs, bracket=(0.3, 2.5), stability_tol=0.05)
            err = np.abs(rec.radii - 1.0)
            maxs.append(float(np.max(err)))
            meds.append(float(np.median(err)))
        max_dir_err[delta] = float(np.median(maxs))
        median_dir_err[delta] = float(np.median(meds))
    deltas = (0.0, 0.005, 0.01, 0.02)
    monotone = all(
        median_dir_err[deltas[i + 1]] >= median_dir_err[deltas[i]] for i in range(3)
    )
    ok = max_dir_err[0.01] <= 0.02 and monotone
    report(
        6, "inverse, noisy", ok,
        f"median max-dir err at delta=0.01: {100 * max_dir_err[0.01]:.2f}% (<= 2%); "
        f"median-dir err by delta: {[f'{100 * median_dir_err[d]:.2f}%' for d in deltas]} monotone={monotone}",
        t0,
    )
    assert ok


def test_criterion_7_inverse_nonspherical():
    t0 = time.time()
    surface = PerturbedSphere(1.0, [(2, 0, 0.2)])
    quad = make_quadrature(24, 48)
    entries = []
    for k, alpha in [(1.0, Z_HAT), (1.5, X_HAT)]:
        ctx = WaveContext(k, alpha)
        sol = mrc_solve(surface, ctx, "dirichlet", eps_target=1e-7, L_max=30)
        assert sol.converged
        entries.append(
            NearFieldEntry(ctx=ctx, samples=fields.field_on_sphere(sol.coefficients, ctx, 3.0, quad))
        )
    data = NearFieldData(R=3.0, quadrature=quad, entries=tuple(entries))
    dirs = fibonacci_directions(50)
    truth = np.array(
        [float(surface.radius(np.array([d.theta]), np.array([d.phi]))[0]) for d in dirs]
    )
    rec = stable_reconstruct(
        data, dirs, bracket=(0.3, 2.5), L_schedule=(3, 4, 5, 6, 8, 10), stability_tol=0.02
    )
    rel = np.abs(rec.radii - truth) / truth
    med = float(np.median(rel[rec.resolved]))
    ok = rec.resolution_fraction >= 0.95 and med <= 0.01
    report(
        7, "inverse, non-spherical", ok,
        f"resolved {100 * rec.resolution_fraction:.0f}% (>= 95%), "
        f"median rel err {100 * med:.3f}% (<= 1%), L={rec.L_selected}",
        t0,
    )
    assert ok


def test_criterion_8_determinism(tmp_path):
    """Re-running the clean, noisy, and non-spherical reconstruction pipelines
    end to end (synthesize then invert, through the CLI) with fixed seeds
    produces hash-identical output files.  Configurations are scaled-down
    versions of criteria 5-7; determinism does not depend on problem size."""
    t0 = time.time()

    def synth_cfg(surface, delta, eps):
        return {
            "schema_version": 1,
            "surface": surface,
            "R": 3.0,
            "quadrature": {"n_theta": 16, "n_phi": 32},
            "entries": [
                {"k": 1.0, "alpha": [0.0, 0.0]},
                {"k": 1.5, "alpha": [1.5707963267948966, 0.0]},
            ],
            "delta": delta,
            "forward": {"eps_target": eps, "L_max": 24},
        }

    invert_cfg = {
        "schema_version": 1,
        "directions": {"type": "fibonacci", "count": 20},
        "bracket": [0.3, 2.5],
        "L_schedule": [3, 4, 5, 6],
        "stability_tol": 0.05,
    }
    sphere = {"type": "sphere", "radius": 1.0}
    bumpy = {"type": "perturbed_sphere", "radius": 1.0, "bumps": [[2, 0, 0.2]]}
    pipelines = {
        "clean": synth_cfg(sphere, 0.0, 1e-9),
        "noisy": synth_cfg(sphere, 0.01, 1e-9),
        "bumpy": synth_cfg(bumpy, 0.0, 1e-5),
    }
    ok = True
    for name, scfg in pipelines.items():
        hashes = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}_{rep}"
            out.mkdir()
            (out / "synth.json").write_text(json.dumps(scfg))
            (out / "invert.json").write_text(json.dumps(invert_cfg))
            assert cli_main([
                "synthesize", "--config", str(out / "synth.json"),
                "--out", str(out), "--seed", "11",
            ]) == EXIT_OK
            code = cli_main([
                "invert", str(out / "near_field.json"),
                "--config", str(out / "invert.json"), "--out", str(out),
            ])
            assert code in (0, 2)
            digest = hashlib.sha256()
            for fname in ("near_field.json", "reconstruction.json", "reconstruction.csv"):
                digest.update((out / fname).read_bytes())
            hashes.append(digest.hexdigest())
        ok &= hashes[0] == hashes[1]
    report(8, "determinism", ok, "clean/noisy/non-spherical pipelines hash-identical", t0)
    assert ok
