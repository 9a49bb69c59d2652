"""Orbit-space geometry: elements, conics, and the constructive inverse map.

An oriented non-colliding orbit in dimension n = 2k+1 is classified by the
pair (A, Lbar): the Lenz vector and the effective angular-momentum
two-vector, subject to Lbar being decomposable and |Lbar|^2 > |Lbar ^ A|^2.
This module evaluates the closed-form eccentricity, energy, class, and
implied magnetic charge of such a pair, the conic equations

    r - A.r = |Lbar|^2 - mu^2/k,      Lbar ^ (r - r A) = 0,

and the constructive map producing initial data (q, v, eta) whose
invariants reproduce the pair.  The construction follows the geometric
recipe: find the unit vector n with Lbar ^ n = Lbar ^ A on the
anti-parallel side, then

    v = (1/|Lbar|^2) (n - A) _| Lbar
    q = ((1 - A.n)/|v|^2) n
    u = v _| Lbar + (1 - A.n) n

and a rotation R taking n -> e_n and v -> |v| e_{2k} so that q sits on the
positive x_n axis where the gauge formulas hold.  The charge eta is block
diagonal; its last block is forced by the requirement

    |q|^2 * force(q, v, eta) = u

(the magnitude |u|/|v| always equals |Lbar ^ A|, so eta lands on the
magnetic orbit of charge sqrt(k)|Lbar ^ A|), and the remaining blocks are
fixed to match the Pfaffian of the orbit representative.  In dimension 3
there are no free blocks and the geometry itself decides the Pfaffian
sign, i.e. the sign of the magnetic charge: ``implied_mu`` is therefore
signed, with ``abs(implied_mu) == implied_magnetic_charge(el)`` always.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .gauge import SIGMA_POTENTIAL, force_field
from .invariants import compute_invariants
from .liealg import SkewMatrix
from .multivector import (
    Metric,
    Multivector,
    apply_linear,
    inner,
    interior,
    wedge,
)

__all__ = [
    "OrbitClass",
    "OrbitElements",
    "InitialData",
    "MembershipError",
    "eccentricity",
    "energy_from_elements",
    "classify",
    "implied_magnetic_charge",
    "conic_residuals",
    "construct_initial_data",
    "reconstruction_residuals",
    "elements_from_invariants",
    "conic_fit",
]

PARABOLA_TOL = 1e-10


class MembershipError(ValueError):
    """Pair (A, Lbar) fails an orbit-element invariant; names the failure."""


class OrbitClass(enum.Enum):
    ELLIPSE = "ellipse"
    PARABOLA = "parabola"
    HYPERBOLA_BRANCH = "hyperbola_branch"


@dataclass
class OrbitElements:
    """Lenz vector and effective angular momentum of an oriented orbit."""

    A: np.ndarray
    Lbar: Multivector
    k: int

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        n = 2 * self.k + 1
        if self.A.shape != (n,):
            raise ValueError(f"Lenz vector must have dimension {n}")
        if self.Lbar.grade != 2 or self.Lbar.metric != Metric.euclidean(n):
            raise ValueError(f"Lbar must be a Euclidean 2-vector in dimension {n}")

    @property
    def metric(self) -> Metric:
        return self.Lbar.metric

    @property
    def A_mv(self) -> Multivector:
        return Multivector.vector(self.metric, self.A)

    def validate(self, tol: float = 1e-9):
        """Raise MembershipError naming the first violated invariant."""
        lsq = inner(self.Lbar, self.Lbar)
        scale = max(1.0, self.Lbar.coeff_norm() ** 2)
        if wedge(self.Lbar, self.Lbar).coeff_norm() > tol * scale:
            raise MembershipError("Lbar is not decomposable")
        la = wedge(self.Lbar, self.A_mv)
        if lsq <= inner(la, la) * (1.0 + 1e-12) + tol * scale:
            raise MembershipError("|Lbar|^2 does not exceed |Lbar ^ A|^2")

    def to_dict(self) -> dict:
        return {"k": self.k, "A": [float(a) for a in self.A],
                "Lbar": self.Lbar.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "OrbitElements":
        return cls(np.array(data["A"], dtype=float),
                   Multivector.from_dict(data["Lbar"]), int(data["k"]))


@dataclass
class InitialData:
    """Initial conditions produced by the constructive map.

    ``q``, ``v``, ``eta`` live in the construction frame (q on the
    positive x_n axis); ``rotation`` maps the construction frame back to
    the caller's frame.  ``implied_mu`` is the signed magnetic charge of
    the orbit eta lies on.
    """

    q: np.ndarray
    v: np.ndarray
    eta: SkewMatrix
    rotation: np.ndarray
    implied_mu: float

    def to_dict(self) -> dict:
        return {
            "q": [float(x) for x in self.q],
            "v": [float(x) for x in self.v],
            "eta": self.eta.to_dict(),
            "rotation": [float(x) for x in self.rotation.ravel()],
            "implied_mu": float(self.implied_mu),
        }


def _check_membership(el: OrbitElements):
    el.validate()


def _invariant_scalars(el: OrbitElements):
    """(|Lbar|^2, |Lbar ^ A|^2, |A|^2, |Lbar - A _| (A ^ Lbar)|^2)."""
    lsq = inner(el.Lbar, el.Lbar)
    a_mv = el.A_mv
    la = wedge(el.Lbar, a_mv)
    lasq = inner(la, la)
    asq = float(np.dot(el.A, el.A))
    shifted = el.Lbar - interior(a_mv, wedge(a_mv, el.Lbar))
    ssq = inner(shifted, shifted)
    return lsq, lasq, asq, ssq


def eccentricity(el: OrbitElements) -> float:
    """Conic eccentricity: 1 - e^2 = (|Lbar|^2-|Lbar^A|^2)(1-|A|^2)/|...|^2."""
    _check_membership(el)
    lsq, lasq, asq, ssq = _invariant_scalars(el)
    one_minus_e2 = (lsq - lasq) * (1.0 - asq) / ssq
    return float(np.sqrt(max(0.0, 1.0 - one_minus_e2)))


def energy_from_elements(el: OrbitElements) -> float:
    """Total energy -(1-|A|^2) / (2(|Lbar|^2-|Lbar^A|^2))."""
    _check_membership(el)
    lsq, lasq, asq, _ = _invariant_scalars(el)
    return -(1.0 - asq) / (2.0 * (lsq - lasq))


def classify(el: OrbitElements) -> OrbitClass:
    """Ellipse, parabola, or hyperbola branch by the sign of the energy."""
    E = energy_from_elements(el)
    asq = float(np.dot(el.A, el.A))
    if abs(E) <= PARABOLA_TOL * (1.0 + asq):
        return OrbitClass.PARABOLA
    return OrbitClass.ELLIPSE if E < 0 else OrbitClass.HYPERBOLA_BRANCH


def implied_magnetic_charge(el: OrbitElements) -> float:
    """Non-negative magnetic charge sqrt(k) |Lbar ^ A| of the pair."""
    la = wedge(el.Lbar, el.A_mv)
    return float(np.sqrt(el.k * inner(la, la)))


def conic_residuals(r_vec, el: OrbitElements):
    """Residuals of the two conic equations at a point.

    Returns (r - A.r - (|Lbar|^2 - mu^2/k), |Lbar ^ (r - r A)|); both are
    zero exactly on the orbit with elements el.
    """
    _check_membership(el)
    r_vec = np.asarray(r_vec, dtype=float)
    lsq, lasq, _, _ = _invariant_scalars(el)
    r = float(np.linalg.norm(r_vec))
    scalar = r - float(np.dot(el.A, r_vec)) - (lsq - lasq)
    shifted = Multivector.vector(el.metric, r_vec - r * el.A)
    plane = wedge(el.Lbar, shifted)
    return scalar, plane.coeff_norm()


def _projector(lbar: Multivector):
    """Function projecting vectors onto the plane of a decomposable 2-vector."""
    lsq = inner(lbar, lbar)

    def proj(x: np.ndarray) -> np.ndarray:
        x_mv = Multivector.vector(lbar.metric, x)
        return -(1.0 / lsq) * interior(interior(x_mv, lbar), lbar).to_array()

    return proj


def _plane_unit(lbar: Multivector) -> np.ndarray:
    """First unit vector of the plane of Lbar from deterministic projection.

    Projects the coordinate basis vectors in index order and returns the
    first projection of non-negligible size, normalized; used only to
    break the tie when the Lenz vector has no in-plane component.
    """
    proj = _projector(lbar)
    n = lbar.metric.dim
    # the projections of the basis vectors have squared norms summing to 2,
    # so at least one exceeds sqrt(2/n) and the loop always returns
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        p = proj(e)
        norm = float(np.linalg.norm(p))
        if norm > 1e-6:
            return p / norm
    raise MembershipError("Lbar has no identifiable plane")


def _complete_rotation(columns: list, n: int) -> np.ndarray:
    """SO(n) matrix whose LAST columns are the given orthonormal vectors.

    The leading columns are a deterministic orthonormal basis of the
    complement (from the SVD of the constraint rows); the overall
    determinant is fixed to +1 by flipping the first completion column.
    Returns the matrix B with B e_j = column_j; the frame change taking
    column_j to e_j is B.T.
    """
    fixed = np.array(columns)          # rows = constraint vectors
    _, _, vt = np.linalg.svd(fixed, full_matrices=True)
    comp = vt[len(columns):]           # orthonormal complement rows
    b = np.zeros((n, n))
    for j, w in enumerate(comp):
        b[:, j] = w
    for j, c in enumerate(columns):
        b[:, n - len(columns) + j] = c
    if np.linalg.det(b) < 0:
        if len(comp) > 0:
            b[:, 0] = -b[:, 0]
        else:
            raise ValueError("cannot orient an over-constrained frame")
    return b


def construct_initial_data(el: OrbitElements) -> InitialData:
    """Initial data (q, v, eta) whose motion realizes the given elements.

    The returned position and velocity are exactly axis-aligned in the
    construction frame: q = |q| e_n, v = |v| e_{2k}.  The stored rotation
    maps the construction frame to the caller's frame, so
    ``rotation @ data.q`` recovers the position in caller coordinates.
    """
    _check_membership(el)
    k = el.k
    n = 2 * k + 1
    lbar = el.Lbar
    A = el.A
    lsq = inner(lbar, lbar)
    proj = _projector(lbar)

    a_par = proj(A)
    a_perp = A - a_par
    perp_sq = float(np.dot(a_perp, a_perp))
    in_plane = np.sqrt(max(0.0, 1.0 - perp_sq))
    norm_par = float(np.linalg.norm(a_par))
    if norm_par <= 1e-12 * (1.0 + float(np.linalg.norm(A))):
        n_par = in_plane * _plane_unit(lbar)
    else:
        n_par = -in_plane * a_par / norm_par
    n_vec = n_par + a_perp

    diff = Multivector.vector(el.metric, n_vec - A)
    v_vec = (1.0 / lsq) * interior(diff, lbar).to_array()
    a_dot_n = float(np.dot(A, n_vec))
    v_sq = float(np.dot(v_vec, v_vec))
    q_scale = (1.0 - a_dot_n) / v_sq
    u_vec = interior(Multivector.vector(el.metric, v_vec), lbar).to_array() \
        + (1.0 - a_dot_n) * n_vec

    v_norm = np.sqrt(v_sq)
    v_hat = v_vec / v_norm
    u_norm = float(np.linalg.norm(u_vec))
    mu_pos = implied_magnetic_charge(el)

    charge_free = mu_pos <= 1e-13 * np.sqrt(k) * (
        1.0 + float(np.linalg.norm(A)) * lbar.coeff_norm())
    if charge_free:
        b = _complete_rotation([v_hat, n_vec], n)
        eta = SkewMatrix.zero(k)
        implied = 0.0
    else:
        u_hat = u_vec / u_norm
        if k == 1:
            det = float(np.linalg.det(np.column_stack([u_hat, v_hat, n_vec])))
            s_u = 1.0 if det >= 0 else -1.0
            b = np.column_stack([s_u * u_hat, v_hat, n_vec])
        else:
            s_u = 1.0
            b = _complete_rotation([u_hat, v_hat, n_vec], n)
        # block entries of eta: the last block is forced by the check
        # identity |q|^2 force(q, v, eta) = u, the first by the Pfaffian
        # of the representative of the +mu orbit, the rest are +mu/sqrt(k)
        beta = SIGMA_POTENTIAL * (u_norm / v_norm) * s_u
        m = np.zeros((2 * k, 2 * k))
        blocks = [mu_pos / np.sqrt(k)] * k
        blocks[0] *= (-1.0) ** k
        blocks[-1] = beta
        for i, bi in enumerate(blocks):
            m[2 * i, 2 * i + 1] = bi
            m[2 * i + 1, 2 * i] = -bi
        eta = SkewMatrix(k, m)
        implied = mu_pos if k >= 2 else -s_u * mu_pos

    rotation = b  # construction frame -> caller frame
    q_c = np.zeros(n)
    q_c[-1] = q_scale
    v_c = np.zeros(n)
    v_c[2 * k - 1] = v_norm
    return InitialData(q_c, v_c, eta, rotation, implied)


def reconstruction_residuals(el: OrbitElements, data: InitialData) -> dict:
    """Residuals of the defining checks of the constructive map.

    ``elements``: invariants of the constructed state reproduce the pair
    (A, Lbar) mapped into the construction frame.  ``force``: the charge
    satisfies |q|^2 force(q, v, eta) = u.  ``orthogonality``: the stored
    rotation is orthogonal.  All normalized by the natural scales.
    """
    k = el.k
    r_to_caller = data.rotation
    r_to_constr = r_to_caller.T
    state = _PlainState(data.q, data.v, data.eta)
    rec = compute_invariants(state, abs(data.implied_mu), k)

    a_target = r_to_constr @ el.A
    lbar_target = apply_linear(r_to_constr, el.Lbar)
    out = {}
    out["lenz"] = float(np.linalg.norm(rec.A - a_target)) / max(
        1.0, float(np.linalg.norm(el.A)))
    out["lbar"] = (rec.Lbar - lbar_target).coeff_norm() / max(
        1.0, el.Lbar.coeff_norm())
    # u in the construction frame, rebuilt from the targets
    n_c = data.q / np.linalg.norm(data.q)
    u_c = (a_target - float(np.dot(a_target, n_c)) * n_c)
    qsq = float(np.dot(data.q, data.q))
    w = force_field(data.q, data.v, data.eta)
    out["force"] = float(np.linalg.norm(qsq * w - u_c)) / max(
        1.0, float(np.linalg.norm(u_c)))
    out["rotation_orthogonality"] = float(
        np.max(np.abs(r_to_caller.T @ r_to_caller - np.eye(2 * k + 1))))
    out["rotation_det"] = abs(float(np.linalg.det(r_to_caller)) - 1.0)
    return out


class _PlainState:
    """Minimal state carrier for invariant evaluation."""

    def __init__(self, r_vec, v, xi):
        self.r_vec = r_vec
        self.v = v
        self.xi = xi


def elements_from_invariants(rec) -> OrbitElements:
    """Orbit elements read off an invariant record (non-colliding)."""
    if rec.Lbar is None:
        raise ValueError("colliding state has no orbit elements")
    return OrbitElements(rec.A.copy(), rec.Lbar, rec.k)


def conic_fit(points):
    """Least-squares conic through points sharing a focal relation.

    Fits the affine plane of the points by centered second-moment
    spectral analysis, then fits the focal-form relation
    |r| = p - alpha s1 - beta s2 in the in-plane coordinates (s1, s2)
    about the foot of the origin.  Returns (eccentricity, oriented plane
    2-vector, relative rms residual).  Needs at least 8 non-collinear
    points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 8:
        raise ValueError("need at least 8 points to fit a conic")
    npts, n = pts.shape
    center = pts.mean(axis=0)
    centered = pts - center
    moments = centered.T @ centered
    evals, evecs = np.linalg.eigh(moments)
    # ascending order; plane directions are the two largest
    if evals[-2] <= 1e-12 * max(evals[-1], 1e-300):
        raise ValueError("points are collinear; no conic plane")
    w1 = evecs[:, -1]
    w2 = evecs[:, -2]
    s1 = centered @ w1
    s2 = centered @ w2
    radii = np.linalg.norm(pts, axis=1)
    design = np.column_stack([np.ones(npts), -s1, -s2])
    coef, _, _, _ = np.linalg.lstsq(design, radii, rcond=None)
    _, alpha, betac = coef
    ecc = float(np.hypot(alpha, betac))
    resid = radii - design @ coef
    rel_resid = float(np.sqrt(np.mean(resid**2)) / max(1.0, np.mean(radii)))
    # orient the plane blade by the traversal direction of the samples
    area = 0.0
    for i in range(npts - 1):
        area += s1[i] * s2[i + 1] - s1[i + 1] * s2[i]
    orient = 1.0 if area >= 0 else -1.0
    metric = Metric.euclidean(n)
    blade = orient * wedge(Multivector.vector(metric, w1),
                           Multivector.vector(metric, w2))
    return ecc, blade, rel_resid
