"""Generalized Dirac monopole gauge field on R^{2k+1} minus a half-axis.

The configuration space is R^n with n = 2k+1, punctured along the closed
negative x_n half-axis where the gauge choice blows up.  Writing xt for the
first 2k coordinates and x_n for the last, the so(2k)-valued potential is

    A_n = 0,     A_b = sigma * (1 / (r (r + x_n))) * sum_a xt^a M_{a,b},

and its curvature is

    F_{n,b} = -sigma * (1 / r^3) * sum_a xt^a M_{a,b}
    F_{a,b} = -(1 / r^2) * (-sigma * M_{a,b} + xt^a A_b - xt^b A_a)

with a single global sign ``sigma``.  The default ``SIGMA_POTENTIAL = +1``
is not an arbitrary choice: it is the unique sign for which the
three-dimensional reduction reproduces the classical monopole force
-mu (v x r) / r^3 and the full angular momentum is conserved; the test
suite demonstrates that the opposite sign fails both by many orders of
magnitude.  Likewise ``SIGMA_COMMUTATOR = -1`` is the unique sign making
the finite-difference derivative of F match its algebraic covariant
derivative at second order.

Everything here works on plain float arrays internally; thin wrappers
return :class:`~magkepler.liealg.SkewMatrix` values for the typed surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liealg import SkewMatrix, pairing

__all__ = [
    "SIGMA_POTENTIAL",
    "SIGMA_COMMUTATOR",
    "GaugeSample",
    "LemmaResiduals",
    "dirac_string_margin",
    "potential",
    "curvature",
    "gauge_sample",
    "curvature_pairing",
    "force_field",
    "lemma_residuals",
]

# Global real-form sign of the potential, fixed operationally (see module
# docstring and the sign-convention tests).
SIGMA_POTENTIAL = 1.0

# Sign s in the covariant derivative  D_l F = d_l F + s [A_l, F], fixed by
# requiring second-order agreement with central differences.
SIGMA_COMMUTATOR = -1.0


def dirac_string_margin(r_vec) -> float:
    """Distance indicator (r + x_n) / r from the excluded half-axis.

    Equals 2 on the positive x_n axis, 1 on the equator x_n = 0, and 0 on
    the string.  Not defined at the origin.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError("margin undefined at the origin")
    return (r + float(r_vec[-1])) / r


def _check_point(r_vec, margin_min: float):
    r = float(np.linalg.norm(r_vec))
    if r == 0.0 or dirac_string_margin(r_vec) < margin_min:
        raise ValueError("point too close to the Dirac string half-axis")
    return r


def _potential_arrays(r_vec: np.ndarray, k: int, sigma: float) -> np.ndarray:
    """Stacked potential components, shape (n, 2k, 2k)."""
    n = 2 * k + 1
    xt = r_vec[: n - 1]
    xn = r_vec[n - 1]
    r = np.linalg.norm(r_vec)
    out = np.zeros((n, 2 * k, 2 * k))
    pref = sigma / (r * (r + xn))
    # sum_a xt^a M_{a,b} has matrix  e_b xt^T - xt e_b^T; stacking over b
    # gives out[b, p, q] = pref * (delta_{pb} xt_q - xt_p delta_{qb}).
    eye = np.eye(2 * k)
    out[: n - 1] = pref * (eye[:, :, None] * xt[None, None, :] -
                           xt[None, :, None] * eye[:, None, :])
    return out


def _curvature_arrays(r_vec: np.ndarray, k: int, sigma: float) -> np.ndarray:
    """Stacked curvature components, shape (n, n, 2k, 2k), antisymmetric."""
    n = 2 * k + 1
    xt = r_vec[: n - 1]
    r = np.linalg.norm(r_vec)
    a = _potential_arrays(r_vec, k, sigma)
    out = np.zeros((n, n, 2 * k, 2 * k))
    # basis generators: gen[a, b] = M_{a+1, b+1}
    eye = np.eye(2 * k)
    gen = (eye[:, None, None, :] * eye[None, :, :, None] -
           eye[:, None, :, None] * eye[None, :, None, :])
    # spatial-spatial block
    cross = xt[:, None, None, None] * a[None, : n - 1] - \
        xt[None, :, None, None] * a[: n - 1, None]
    out[: n - 1, : n - 1] = -(1.0 / r**2) * (-sigma * gen + cross)
    # last-row / last-column block
    s_b = (eye[:, :, None] * xt[None, None, :] -
           xt[None, :, None] * eye[:, None, :])
    out[n - 1, : n - 1] = -(sigma / r**3) * s_b
    out[: n - 1, n - 1] = -out[n - 1, : n - 1]
    return out


@dataclass
class GaugeSample:
    """Potential and curvature of the monopole field at one point."""

    point: np.ndarray
    potential: list
    curvature: list


def potential(r_vec, k: int, sigma: float = None, margin_min: float = 1e-6) -> list:
    """Gauge potential components [A_1, ..., A_n] as SkewMatrix values."""
    r_vec = np.asarray(r_vec, dtype=float)
    _validate_dim(r_vec, k)
    _check_point(r_vec, margin_min)
    sigma = SIGMA_POTENTIAL if sigma is None else float(sigma)
    arrays = _potential_arrays(r_vec, k, sigma)
    return [SkewMatrix(k, m) for m in arrays]


def curvature(r_vec, k: int, sigma: float = None, margin_min: float = 1e-6) -> list:
    """Curvature components as an antisymmetric n x n nested list."""
    r_vec = np.asarray(r_vec, dtype=float)
    _validate_dim(r_vec, k)
    _check_point(r_vec, margin_min)
    sigma = SIGMA_POTENTIAL if sigma is None else float(sigma)
    arrays = _curvature_arrays(r_vec, k, sigma)
    return [[SkewMatrix(k, arrays[i, j]) for j in range(2 * k + 1)]
            for i in range(2 * k + 1)]


def gauge_sample(r_vec, k: int) -> GaugeSample:
    r_vec = np.asarray(r_vec, dtype=float)
    return GaugeSample(r_vec, potential(r_vec, k), curvature(r_vec, k))


def _validate_dim(r_vec: np.ndarray, k: int):
    if k < 1:
        raise ValueError("k must be a positive integer")
    if r_vec.shape != (2 * k + 1,):
        raise ValueError(f"expected a point of R^{2 * k + 1}")


def _pair_with_curvature(r_vec: np.ndarray, xi_m: np.ndarray, k: int,
                         sigma: float) -> np.ndarray:
    """Scalar matrix G[j, l] = pairing(xi, F_{j,l}), antisymmetric n x n."""
    n = 2 * k + 1
    xt = r_vec[: n - 1]
    xn = r_vec[n - 1]
    r = np.linalg.norm(r_vec)
    xv = xi_m @ xt
    p = sigma * xv / (r * (r + xn))
    g = np.zeros((n, n))
    g[: n - 1, : n - 1] = -(sigma * xi_m + np.outer(xt, p) - np.outer(p, xt)) / r**2
    g[n - 1, : n - 1] = -sigma * xv / r**3
    g[: n - 1, n - 1] = sigma * xv / r**3
    return g


def curvature_pairing(r_vec, xi: SkewMatrix, sigma: float = None,
                      margin_min: float = 1e-6) -> np.ndarray:
    """Pairing of xi against every curvature component, as an n x n array."""
    r_vec = np.asarray(r_vec, dtype=float)
    _validate_dim(r_vec, xi.k)
    _check_point(r_vec, margin_min)
    sigma = SIGMA_POTENTIAL if sigma is None else float(sigma)
    return _pair_with_curvature(r_vec, xi.matrix, xi.k, sigma)


def force_field(r_vec, v, xi: SkewMatrix, sigma: float = None,
                margin_min: float = 1e-6) -> np.ndarray:
    """Magnetic force w with w_j = pairing(xi, sum_i v^i F_{i,j}).

    This is the velocity contraction of the xi-paired curvature two-form;
    it is linear in v and xi and everywhere orthogonal to both r and w.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    v = np.asarray(v, dtype=float)
    _validate_dim(r_vec, xi.k)
    _validate_dim(v, xi.k)
    _check_point(r_vec, margin_min)
    sigma = SIGMA_POTENTIAL if sigma is None else float(sigma)
    g = _pair_with_curvature(r_vec, xi.matrix, xi.k, sigma)
    return g.T @ v


@dataclass
class LemmaResiduals:
    """Max-abs residuals of the structural identities of the gauge field.

    ``covariant`` maps finite-difference step size to the residual of the
    covariant-derivative identity; ``covariant_order`` is the observed
    convergence order across the two smallest steps.
    """

    radial_potential: float
    radial_curvature: float
    covariant: dict
    covariant_order: float
    quadratic: float
    pairing_normsq: float
    force_normsq: float


def lemma_residuals(r_vec, xi: SkewMatrix, v, mu: float,
                    h_values=(1e-4, 1e-5), sigma: float = None,
                    sigma_comm: float = None,
                    margin_min: float = 1e-6) -> LemmaResiduals:
    """Evaluate the gauge-field identities at one point.

    Checks, with xi on the magnetic orbit of charge mu:
      * sum_l x^l A_l = 0 and sum_j x^j F_{j,l} = 0 (exact radial identities),
      * central differences of F match the algebraic covariant derivative
        at second order,
      * r^4 G^T G = (mu^2/k)(I - rhat rhat^T) for G[j,l] = pairing(xi, F_{j,l}),
      * the squared coefficient norm of the paired curvature r^2 G is mu^2,
      * |r^2 w|^2 = (mu^2/k) |r ^ v|^2 / r^2 for the force w.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    v = np.asarray(v, dtype=float)
    k = xi.k
    n = 2 * k + 1
    _validate_dim(r_vec, k)
    _check_point(r_vec, margin_min)
    sigma = SIGMA_POTENTIAL if sigma is None else float(sigma)
    sigma_comm = SIGMA_COMMUTATOR if sigma_comm is None else float(sigma_comm)
    r = np.linalg.norm(r_vec)

    a = _potential_arrays(r_vec, k, sigma)
    f = _curvature_arrays(r_vec, k, sigma)
    scale_f = max(1.0, np.max(np.abs(f)))

    radial_potential = float(np.max(np.abs(np.tensordot(r_vec, a, axes=1))))
    radial_curvature = float(np.max(np.abs(np.tensordot(r_vec, f, axes=(0, 0)))))

    covariant = {}
    for h in h_values:
        worst = 0.0
        for l in range(n):
            shift = np.zeros(n)
            shift[l] = h
            fp = _curvature_arrays(r_vec + shift, k, sigma)
            fm = _curvature_arrays(r_vec - shift, k, sigma)
            diff = (fp - fm) / (2.0 * h)
            comm = np.einsum("pq,ijqs->ijps", a[l], f) - \
                np.einsum("ijpq,qs->ijps", f, a[l])
            lhs = diff + sigma_comm * comm
            worst = max(worst, float(np.max(np.abs(lhs - _cov_rhs(r_vec, f, l, r)))))
        covariant[h] = worst / scale_f
    hs = sorted(covariant)
    if len(hs) >= 2 and covariant[hs[0]] > 0:
        covariant_order = float(np.log(covariant[hs[1]] / covariant[hs[0]]) /
                                np.log(hs[1] / hs[0]))
    else:
        covariant_order = float("nan")

    g = _pair_with_curvature(r_vec, xi.matrix, k, sigma)
    rhat = r_vec / r
    target = (mu * mu / k) * (np.eye(n) - np.outer(rhat, rhat))
    quadratic = float(np.max(np.abs(r**4 * (g.T @ g) - target)))
    quadratic /= max(1.0, mu * mu / k)

    pair_normsq = 0.5 * float(np.sum((r * r * g) ** 2))
    pairing_normsq = abs(pair_normsq - mu * mu) / max(1.0, mu * mu)

    w = g.T @ v
    rv_sq = float(np.dot(r_vec, r_vec) * np.dot(v, v) - np.dot(r_vec, v) ** 2)
    force_normsq = abs(float(np.dot(w, w)) * r**4 - (mu * mu / k) * rv_sq / r**2)
    force_normsq /= max(1.0, (mu * mu / k) * max(rv_sq, 1.0))

    return LemmaResiduals(radial_potential, radial_curvature, covariant,
                          covariant_order, quadratic, pairing_normsq,
                          force_normsq)


def _cov_rhs(r_vec: np.ndarray, f: np.ndarray, l: int, r: float) -> np.ndarray:
    """Right side (1/r^2)(-x^i F_{l,j} - x^j F_{i,l} - 2 x^l F_{i,j})."""
    term1 = r_vec[:, None, None, None] * f[l][None, :, :, :]
    term2 = r_vec[None, :, None, None] * f[:, l][:, None, :, :]
    return (-term1 - term2 - 2.0 * r_vec[l] * f) / r**2
