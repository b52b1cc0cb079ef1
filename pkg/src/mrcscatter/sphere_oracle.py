"""Exact separated-variables scattering by a sphere.

Ground truth for everything else in the package: the coefficients returned
here are verified by substitution into the boundary condition, never trusted
from transcription.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .direct_solver import CoefficientSet, WaveContext
from . import specfun

logger = logging.getLogger(__name__)


def plane_wave_coeffs(ctx: WaveContext, L: int) -> CoefficientSet:
    """Expansion of exp(i k alpha.x) in regular spherical waves.

    The incident field equals sum over modes of
    b[ell, m] * j_ell(k|x|) * Y[ell, m](x/|x|) with
    b[ell, m] = 4*pi * i**ell * conj(Y[ell, m](alpha)).
    """
    alpha = ctx.alpha
    Y = specfun.sph_harm_table(L, alpha.theta, alpha.phi)[0]
    phases = np.array(
        [4.0 * math.pi * specfun._i_pow(ell) for ell in range(L + 1)]
    )
    b = np.conj(Y)
    for ell in range(L + 1):
        base = ell * ell + ell
        b[base - ell : base + ell + 1] *= phases[ell]
    return CoefficientSet(L, b)


def incident_partial_sum(ctx: WaveContext, L: int, points: np.ndarray) -> np.ndarray:
    """Evaluate the truncated plane-wave expansion at Cartesian points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=-1)
    theta = np.arccos(np.clip(pts[:, 2] / r, -1.0, 1.0))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    b = plane_wave_coeffs(ctx, L)
    Y = specfun.sph_harm_table(L, theta, phi)
    j = specfun.spherical_bessel_j_table(L, ctx.k * r)
    out = np.zeros(len(pts), dtype=complex)
    for ell in range(L + 1):
        base = ell * ell + ell
        block = Y[:, base - ell : base + ell + 1] @ b.coeffs[base - ell : base + ell + 1]
        out += j[ell] * block
    return out


def sphere_scattering_coeffs(a: float, ctx: WaveContext, L: int, bc: str) -> CoefficientSet:
    """Exact outgoing-wave coefficients for a soft or hard sphere of radius a.

    Soft (Dirichlet): c[ell,m] = -b[ell,m] * j_ell(k a) / hankel_out(ell, k, a),
    so the total field vanishes on r = a mode by mode.  Hard (Neumann): same
    with radial derivatives.
    """
    if a <= 0:
        raise ValueError(f"sphere radius must be > 0, got {a}")
    b = plane_wave_coeffs(ctx, L)
    k = ctx.k
    if bc == "dirichlet":
        num = specfun.spherical_bessel_j_table(L, k * a)
        den = specfun.hankel_out_table(L, k, a)
    elif bc == "neumann":
        jt = specfun.spherical_bessel_j_table(L + 1, k * a)
        num = np.empty(L + 1)
        num[0] = -k * jt[1]
        for ell in range(1, L + 1):
            num[ell] = k * (jt[ell - 1] - (ell + 1) / (k * a) * jt[ell])
        den = specfun.hankel_out_dr_table(L, k, a)
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    tiny = 1e-280
    if np.any(np.abs(den) < tiny):
        logger.warning("near-zero radial denominator in sphere coefficients")
    ratio = num / den
    c = b.coeffs.copy()
    for ell in range(L + 1):
        base = ell * ell + ell
        c[base - ell : base + ell + 1] *= -ratio[ell]
    return CoefficientSet(L, c)
