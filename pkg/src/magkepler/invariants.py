"""Conserved quantities of the magnetized Kepler flow and their relations.

For a state (r, v, xi) in dimension n = 2k+1 with magnetic charge mu the
conserved quantities are

    E    = |v|^2 / 2 - 1/r + (mu^2/k) / (2 r^2)              (energy)
    L    = r ^ v + xi-paired curvature two-vector            (angular momentum)
    A    = v _| L + r / |r|                                  (Lenz vector)
    V    = r ^ v ^ (r^3 w)                                   (orbit 3-vector)
    Lbar = (r - (r^4/|r^v|^2) w) ^ (v - (rdot/r) r)          (effective ang. mom.)

where w is the magnetic force and rdot = (r.v)/|r|.  Lbar is also the
orthogonal projection of L onto the exterior square of span(V); both
characterizations are computed and cross-checked in the tests.

The divisor |L|^2 - mu^2 is always evaluated as |r ^ v|^2, which is the
same number by the norm relation but immune to cancellation when mu is
large.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gauge import curvature_pairing
from .multivector import (
    Metric,
    Multivector,
    inner,
    project_onto_plane_square,
    wedge,
)

__all__ = [
    "InvariantRecord",
    "CollidingStateError",
    "compute_invariants",
    "relation_residuals",
    "two_vector_from_matrix",
]

# |r ^ v|^2 below this fraction of (|r||v|)^2 counts as a colliding
# (radial) state; Lbar and V are then reported absent.
COLLINEAR_REL_TOL = 1e-20


class CollidingStateError(ValueError):
    """Raised when an operation needs |r ^ v| > 0 but the state is radial."""


def two_vector_from_matrix(metric: Metric, mat: np.ndarray) -> Multivector:
    """Grade-2 multivector with coefficients from an antisymmetric matrix."""
    n = metric.dim
    terms = {}
    idx = metric.indices
    for i in range(n):
        for j in range(i + 1, n):
            c = mat[i, j]
            if c != 0.0:
                terms[(idx[i], idx[j])] = float(c)
    return Multivector(metric, 2, terms)


@dataclass
class InvariantRecord:
    """Snapshot of every conserved quantity at one state."""

    E: float
    L: Multivector
    A: np.ndarray
    V: Optional[Multivector]
    Lbar: Optional[Multivector]
    mu: float
    k: int

    @property
    def A_mv(self) -> Multivector:
        return Multivector.vector(self.L.metric, self.A)

    @property
    def colliding(self) -> bool:
        return self.Lbar is None

    def to_dict(self) -> dict:
        return {
            "E": self.E,
            "L": self.L.to_dict(),
            "A": [float(a) for a in self.A],
            "V": None if self.V is None else self.V.to_dict(),
            "Lbar": None if self.Lbar is None else self.Lbar.to_dict(),
            "mu": self.mu,
            "k": self.k,
        }


def compute_invariants(s, mu: float, k: int) -> InvariantRecord:
    """Evaluate E, L, A, V, Lbar at a state with fields r_vec, v, xi.

    For radial states (r ^ v = 0) the plane quantities V and Lbar are
    reported as None; the remaining quantities are still meaningful.
    """
    r_vec = np.asarray(s.r_vec, dtype=float)
    v = np.asarray(s.v, dtype=float)
    xi = s.xi
    n = 2 * k + 1
    metric = Metric.euclidean(n)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError("invariants undefined at the origin")

    E = 0.5 * float(np.dot(v, v)) - 1.0 / r + (mu * mu / k) / (2.0 * r * r)

    g = curvature_pairing(r_vec, xi)
    l_mat = np.outer(r_vec, v) - np.outer(v, r_vec) + (r * r) * g
    L = two_vector_from_matrix(metric, l_mat)
    # (v _| L)_j = sum_i v_i L_ij
    A = l_mat.T @ v + r_vec / r

    w = g.T @ v
    rv_sq = float(np.dot(r_vec, r_vec) * np.dot(v, v) - np.dot(r_vec, v) ** 2)
    scale = float(np.dot(r_vec, r_vec) * np.dot(v, v))
    if rv_sq <= COLLINEAR_REL_TOL * max(scale, 1e-300):
        return InvariantRecord(E, L, A, None, None, mu, k)

    r_mv = Multivector.vector(metric, r_vec)
    v_mv = Multivector.vector(metric, v)
    w_mv = Multivector.vector(metric, r**3 * w)
    V = wedge(wedge(r_mv, v_mv), w_mv)

    rdot = float(np.dot(r_vec, v)) / r
    left = Multivector.vector(metric, r_vec - (r**4 / rv_sq) * w)
    right = Multivector.vector(metric, v - (rdot / r) * r_vec)
    Lbar = wedge(left, right)

    return InvariantRecord(E, L, A, V, Lbar, mu, k)


def relation_residuals(rec: InvariantRecord, s) -> dict:
    """Relative residuals of the algebraic identities among the invariants.

    Checks the norm relation |L|^2 = |r^v|^2 + mu^2, the V norm
    |V|^2 = (mu^2/k)(|L|^2-mu^2)^2, the wedge relation
    Lbar ^ A = V / (|L|^2-mu^2), the chain
    |Lbar|^2 - |Lbar^A|^2 = |Lbar|^2 - mu^2/k = |L|^2 - mu^2, the energy
    formula E = -(1-|A|^2)/(2(|L|^2-mu^2)), decomposability of Lbar,
    and (mu != 0) agreement of the closed-form Lbar with the projection of
    L onto the exterior square of span(V); for mu = 0 it checks Lbar = L.
    """
    if rec.colliding:
        raise CollidingStateError("identity residuals need a non-radial state")
    r_vec = np.asarray(s.r_vec, dtype=float)
    v = np.asarray(s.v, dtype=float)
    mu, k = rec.mu, rec.k
    metric = rec.L.metric

    rv_sq = float(np.dot(r_vec, r_vec) * np.dot(v, v) - np.dot(r_vec, v) ** 2)
    l_sq = inner(rec.L, rec.L)
    lbar_sq = inner(rec.Lbar, rec.Lbar)
    v_sq = inner(rec.V, rec.V)
    a_sq = float(np.dot(rec.A, rec.A))
    lbar_wedge_a = wedge(rec.Lbar, rec.A_mv)
    lwa_sq = inner(lbar_wedge_a, lbar_wedge_a)

    out = {}
    out["l_norm"] = abs(l_sq - rv_sq - mu * mu) / max(1.0, l_sq)
    out["v_norm"] = abs(v_sq - (mu * mu / k) * rv_sq**2) / max(1.0, v_sq, rv_sq**2)
    diff = lbar_wedge_a - (1.0 / rv_sq) * rec.V
    out["lbar_wedge_a"] = diff.coeff_norm() / max(1.0, rec.V.coeff_norm() / rv_sq)
    out["lbar_norm_chain"] = max(
        abs((lbar_sq - lwa_sq) - rv_sq), abs((lbar_sq - mu * mu / k) - rv_sq)
    ) / max(1.0, rv_sq)
    out["energy"] = abs(rec.E + (1.0 - a_sq) / (2.0 * rv_sq)) / max(1.0, abs(rec.E))
    out["lbar_a_charge"] = abs(lwa_sq - mu * mu / k) / max(1.0, mu * mu / k)
    out["lbar_decomposable"] = wedge(rec.Lbar, rec.Lbar).coeff_norm() / max(
        1.0, lbar_sq
    )
    if mu == 0.0:
        out["lbar_equals_l"] = (rec.Lbar - rec.L).coeff_norm() / max(
            1.0, rec.L.coeff_norm()
        )
    elif not rec.V.is_zero():
        proj = project_onto_plane_square(rec.L, rec.V)
        out["lbar_projection"] = (rec.Lbar - proj).coeff_norm() / max(
            1.0, rec.L.coeff_norm()
        )
    return out
