"""Field evaluation from outgoing-wave coefficients.

The expansion is guaranteed to represent the scattered field outside any
ball containing the obstacle; evaluating it closer to (or on) the boundary
is permitted and is exactly what the residual-minimization construction
justifies to O(residual), but there is no guarantee inside the obstacle's
circumscribed sphere for coefficient sets obtained otherwise.
"""

from __future__ import annotations

import numpy as np

from . import specfun
from .direct_solver import CoefficientSet, WaveContext
from .geometry import SphereQuadrature


def _angles_of(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0.0):
        raise specfun.DomainError("field evaluation at the origin")
    theta = np.arccos(np.clip(pts[:, 2] / r, -1.0, 1.0))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return r, theta, phi


def _radial_sum(coeffs: CoefficientSet, radial: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """sum over modes of c[ell,m] * radial[ell] * Y[:, (ell,m)]."""
    out = np.zeros(Y.shape[0], dtype=complex)
    for ell in range(coeffs.L + 1):
        sl = slice(ell * ell, (ell + 1) * (ell + 1))
        out += radial[ell] * (Y[:, sl] @ coeffs.coeffs[sl])
    return out


def scattered_field(coeffs: CoefficientSet, ctx: WaveContext, points) -> np.ndarray:
    """Outgoing expansion sum(c[ell,m] Y[ell,m](x/|x|) hankel_out(ell,k,|x|))
    at Cartesian points; shape (n,) (scalars accepted)."""
    single = np.ndim(points) == 1
    r, theta, phi = _angles_of(points)
    Y = specfun.sph_harm_table(coeffs.L, theta, phi)
    H = specfun.hankel_out_table(coeffs.L, ctx.k, r)
    out = _radial_sum(coeffs, H, Y)
    return out[0] if single else out


def scattered_field_dr(coeffs: CoefficientSet, ctx: WaveContext, points) -> np.ndarray:
    """Radial derivative of the outgoing expansion at Cartesian points."""
    single = np.ndim(points) == 1
    r, theta, phi = _angles_of(points)
    Y = specfun.sph_harm_table(coeffs.L, theta, phi)
    Hd = specfun.hankel_out_dr_table(coeffs.L, ctx.k, r)
    out = _radial_sum(coeffs, Hd, Y)
    return out[0] if single else out


def total_field(coeffs: CoefficientSet, ctx: WaveContext, points) -> np.ndarray:
    """Incident plane wave plus the scattered expansion."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u0 = np.exp(1j * ctx.k * pts @ ctx.alpha.vector)
    out = u0 + scattered_field(coeffs, ctx, pts)
    return out[0] if np.ndim(points) == 1 else out


def far_field_amplitude(coeffs: CoefficientSet, theta, phi) -> np.ndarray:
    """Far-field scattering amplitude: because the radial functions tend to
    exp(ikr)/r exactly, it is sum(c[ell,m] Y[ell,m]) pointwise."""
    single = np.ndim(theta) == 0
    Y = specfun.sph_harm_table(coeffs.L, theta, phi)
    out = Y @ coeffs.coeffs
    return complex(out[0]) if single else out


def project_far_field(samples: np.ndarray, quad: SphereQuadrature, L: int) -> CoefficientSet:
    """Recover mode coefficients from far-field samples on quadrature nodes
    by orthonormal projection (the inverse of far_field_amplitude)."""
    if quad.degree < 2 * L:
        raise ValueError(
            f"quadrature degree {quad.degree} insufficient for L={L} (needs >= {2 * L})"
        )
    Y = specfun.sph_harm_table(L, quad.theta, quad.phi)
    return CoefficientSet(L, (Y.conj() * quad.weights[:, None]).T @ samples)


def field_on_sphere(
    coeffs: CoefficientSet, ctx: WaveContext, R: float, quad: SphereQuadrature
) -> np.ndarray:
    """Scattered field sampled at R times the quadrature directions."""
    if R <= 0:
        raise ValueError(f"sphere radius must be > 0, got {R}")
    Y = specfun.sph_harm_table(coeffs.L, quad.theta, quad.phi)
    H = specfun.hankel_out_table(coeffs.L, ctx.k, R)
    return _radial_sum(coeffs, H, Y)
