"""Light-cone encoding of oriented orbits and Lorentz-group transitivity.

An oriented orbit pair (A, Lbar) in dimension n = 2k+1 is encoded in the
Lorentz space R^{1,n} (metric +,-,...,-) as

    m = (Lbar ^ A) / |Lbar ^ A|,      a = A / |Lbar ^ A|^2,

where A = e0 + (spatial Lenz vector) and the Lorentz square of Lbar ^ A is
|Lbar|^2 - |Lbar ^ A-spatial|^2 > 0 by orbit membership.  m is then a unit
decomposable 3-vector (an oriented 3D Lorentz subspace), a a marked vector
in it with a0 > 0, and the energy is E = -a^2/(2 a0).  The inverse map
reads (A, Lbar) = (a_spatial/a0, spatial(e0 _| m)/sqrt(a0)).

The group SO+(1, n) x R_+ acts by (Lambda, lam).(a, m) = (lam Lambda a,
Lambda m), preserving the sign of a^2: elliptic orbits (a^2 > 0) and
parabolic ones (a^2 = 0) each form one transitive class, and
``transitivity_witness`` returns an explicit group element mapping any
same-class pair onto each other by composing adapted-frame reductions to
the canonical representatives (e0, e0^e1^e2) and (e0+e1, e0^e1^e2).  For
the parabolic class the scaling can be folded into a null boost, giving a
witness with lam = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multivector import (
    Metric,
    Multivector,
    apply_linear,
    embed_spatial,
    inner,
    interior,
    is_decomposable,
    spatial_part,
    wedge,
)
from .orbits import OrbitElements

__all__ = [
    "LightConeOrbit",
    "LorentzTransform",
    "OrbitClassSign",
    "ClassMismatchError",
    "to_lightcone",
    "from_lightcone",
    "energy_lightcone",
    "lift_point",
    "group_apply",
    "orbit_class",
    "transitivity_witness",
]

CLASS_TOL = 1e-9


class ClassMismatchError(ValueError):
    """The two light-cone points lie in different orbit classes."""


def _metric_matrix(dim: int) -> np.ndarray:
    eta = -np.eye(dim)
    eta[0, 0] = 1.0
    return eta


@dataclass
class LightConeOrbit:
    """Marked vector and oriented unit 3-vector encoding an orbit."""

    a: Multivector
    m: Multivector

    def __post_init__(self):
        if self.a.grade != 1 or self.m.grade != 3:
            raise ValueError("expected a vector and a 3-vector")
        if self.a.metric != self.m.metric or self.a.metric.kind != "lorentz":
            raise ValueError("expected matching Lorentz multivectors")

    @property
    def metric(self) -> Metric:
        return self.a.metric

    @property
    def a_array(self) -> np.ndarray:
        return self.a.to_array()

    @property
    def a0(self) -> float:
        return self.a.coeff((0,))

    def a_squared(self) -> float:
        return inner(self.a, self.a)

    def validate(self, tol: float = 1e-9):
        if not is_decomposable(self.m, tol=tol):
            raise ValueError("m is not decomposable")
        msq = inner(self.m, self.m)
        if abs(msq - 1.0) > tol * max(1.0, self.m.coeff_norm() ** 2):
            raise ValueError("m is not a unit 3-vector")
        if not self.a0 > 0:
            raise ValueError("marked vector must have positive time component")
        scale = max(1.0, self.a.coeff_norm() * self.m.coeff_norm())
        if wedge(self.a, self.m).coeff_norm() > tol * scale:
            raise ValueError("marked vector does not lie in the subspace of m")
        if interior(self.a, self.m).coeff_norm() <= tol * scale:
            raise ValueError("marked vector contracts trivially with m")

    def to_dict(self) -> dict:
        return {"a": [float(x) for x in self.a_array], "m": self.m.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "LightConeOrbit":
        m = Multivector.from_dict(data["m"])
        a = Multivector.vector(m.metric, np.array(data["a"], dtype=float))
        return cls(a, m)


@dataclass
class LorentzTransform:
    """Metric-preserving linear map of R^{1,2k+1}."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("expected a square matrix")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def metric_residual(self) -> float:
        eta = _metric_matrix(self.dim)
        return float(np.max(np.abs(self.matrix.T @ eta @ self.matrix - eta)))

    def is_orthochronous(self) -> bool:
        return self.matrix[0, 0] > 0

    def is_proper(self, tol: float = 1e-9) -> bool:
        return abs(float(np.linalg.det(self.matrix)) - 1.0) <= tol

    def validate(self, tol: float = 1e-10, allow_improper: bool = False):
        res = self.metric_residual()
        if res > tol:
            raise ValueError(f"matrix does not preserve the metric ({res:.3e})")
        if not self.is_orthochronous():
            raise ValueError("transform reverses time orientation")
        det = float(np.linalg.det(self.matrix))
        if not allow_improper and abs(det - 1.0) > 1e-9:
            raise ValueError("transform is not proper (det != +1)")
        if allow_improper and abs(abs(det) - 1.0) > 1e-9:
            raise ValueError("transform determinant is not +-1")

    @classmethod
    def identity(cls, dim: int) -> "LorentzTransform":
        return cls(np.eye(dim))

    def inverse(self) -> "LorentzTransform":
        eta = _metric_matrix(self.dim)
        return LorentzTransform(eta @ self.matrix.T @ eta)

    def compose(self, other: "LorentzTransform") -> "LorentzTransform":
        """self after other."""
        return LorentzTransform(self.matrix @ other.matrix)

    def to_dict(self) -> dict:
        return {
            "matrix": [float(x) for x in self.matrix.ravel()],
            "proper": bool(self.is_proper()),
            "orthochronous": bool(self.is_orthochronous()),
        }


class OrbitClassSign:
    POSITIVE = "positive"   # a^2 > 0, elliptic orbits
    NULL = "null"           # a^2 = 0, parabolic orbits
    NEGATIVE = "negative"   # a^2 < 0, hyperbolic orbits


def to_lightcone(el: OrbitElements) -> LightConeOrbit:
    """Encode orbit elements on the light cone.

    The Lorentz square of Lbar ^ (e0 + A) equals |Lbar|^2 - |Lbar ^ A|^2
    (Euclidean norms), positive by membership.
    """
    el.validate()
    lorentz = Metric.lorentz(2 * el.k + 1)
    e0 = Multivector.basis_vector(lorentz, 0)
    a_full = e0 + embed_spatial(el.A_mv)
    lbar_l = embed_spatial(el.Lbar)
    la = wedge(lbar_l, a_full)
    lasq = inner(la, la)
    if lasq <= 0:
        raise ValueError("degenerate encoding: (Lbar ^ A)^2 must be positive")
    m = (1.0 / np.sqrt(lasq)) * la
    a = (1.0 / lasq) * a_full
    return LightConeOrbit(a, m)


def from_lightcone(lc: LightConeOrbit) -> OrbitElements:
    """Decode orbit elements: (A, Lbar) = (a/a0, spatial(e0 _| m)/sqrt(a0))."""
    lc.validate()
    a0 = lc.a0
    a_arr = lc.a_array
    e0 = Multivector.basis_vector(lc.metric, 0)
    lbar = spatial_part((1.0 / np.sqrt(a0)) * interior(e0, lc.m))
    k = (lc.metric.n - 1) // 2
    return OrbitElements(a_arr[1:] / a0, lbar, k)


def energy_lightcone(lc: LightConeOrbit) -> float:
    """Total energy -a^2 / (2 a0) of the encoded orbit."""
    return -lc.a_squared() / (2.0 * lc.a0)


def lift_point(r_vec) -> Multivector:
    """Light-cone lift x = (|r|, r) of a configuration point."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError("cannot lift the origin")
    lorentz = Metric.lorentz(r_vec.shape[0])
    return Multivector.vector(lorentz, np.concatenate([[r], r_vec]))


def orbit_class(lc: LightConeOrbit, tol: float = CLASS_TOL) -> str:
    """Class by the sign of a^2 with a scale-aware tolerance."""
    asq = lc.a_squared()
    scale = float(np.dot(lc.a_array, lc.a_array))
    if abs(asq) <= tol * scale:
        return OrbitClassSign.NULL
    return OrbitClassSign.POSITIVE if asq > 0 else OrbitClassSign.NEGATIVE


def group_apply(transform: LorentzTransform, lam: float,
                lc: LightConeOrbit) -> LightConeOrbit:
    """Action (Lambda, lam).(a, m) = (lam Lambda a, Lambda m)."""
    if not lam > 0:
        raise ValueError("scaling factor must be positive")
    transform.validate(tol=1e-9, allow_improper=True)
    a_new = lam * apply_linear(transform.matrix, lc.a)
    m_new = apply_linear(transform.matrix, lc.m)
    out = LightConeOrbit(a_new, m_new)
    out.validate(tol=1e-6)
    return out


def _lorentz_dot(eta: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    return float(x @ eta @ y)


def _span_rows(m: Multivector) -> np.ndarray:
    """Euclidean-orthonormal coefficient basis (rows) of the span of m."""
    metric = m.metric
    dim = metric.dim
    idx = metric.indices
    rows = []
    for p in range(dim):
        for q in range(p + 1, dim):
            blade = Multivector.blade(metric, (idx[p], idx[q]))
            w = interior(blade, m)
            rows.append(w.to_array())
    _, svals, vt = np.linalg.svd(np.array(rows))
    if svals[2] <= 1e-10 * svals[0]:
        raise ValueError("3-vector span is numerically degenerate")
    return vt[:3]


def _adapted_frame(m: Multivector) -> np.ndarray:
    """Full Lorentz matrix whose first three columns frame [m] as +m.

    Columns (t, s1, s2, c_1, ..., c_{dim-3}): t future timelike, s_i
    spacelike, t ^ s1 ^ s2 = +m, the c_j a Lorentz-orthonormal spacelike
    basis of the orthogonal complement; proper and orthochronous.
    """
    metric = m.metric
    dim = metric.dim
    eta = _metric_matrix(dim)
    span = _span_rows(m)                      # rows, Euclidean-orthonormal
    gram = span @ eta @ span.T
    evals, evecs = np.linalg.eigh(gram)       # ascending: two negative, one positive
    if not (evals[0] < 0 < evals[2] and evals[1] < 0):
        raise ValueError("subspace of m does not have Lorentz signature (1,2)")
    t = span.T @ evecs[:, 2] / np.sqrt(evals[2])
    s1 = span.T @ evecs[:, 0] / np.sqrt(-evals[0])
    s2 = span.T @ evecs[:, 1] / np.sqrt(-evals[1])
    if t[0] < 0:
        t = -t
    frame_blade = wedge(wedge(_vec(metric, t), _vec(metric, s1)),
                        _vec(metric, s2))
    if inner(frame_blade, m) < 0:
        s1, s2 = s2, s1
    # Lorentz-orthogonal complement: null space of the rows (eta z_i)
    _, _, vt = np.linalg.svd(span @ eta, full_matrices=True)
    comp = vt[3:]                             # Euclidean-orthonormal rows
    cgram = comp @ eta @ comp.T               # negative definite
    cevals, cevecs = np.linalg.eigh(cgram)
    if cevals.size and cevals[-1] >= 0:
        raise ValueError("complement of [m] is not spacelike")
    cols = [t, s1, s2]
    for j in range(comp.shape[0]):
        cols.append(comp.T @ cevecs[:, j] / np.sqrt(-cevals[j]))
    lam = np.column_stack(cols)
    if np.linalg.det(lam) < 0:
        lam[:, -1] = -lam[:, -1]
    return lam


def _vec(metric: Metric, arr: np.ndarray) -> Multivector:
    return Multivector.vector(metric, arr)


def _block3(dim: int, block: np.ndarray) -> np.ndarray:
    out = np.eye(dim)
    out[:3, :3] = block
    return out


def _boost_to_rest(u: np.ndarray) -> np.ndarray:
    """3x3 Lorentz matrix (1+2 block) sending the unit timelike u to e0."""
    eta3 = np.diag([1.0, -1.0, -1.0])
    cols = [u]
    for e in (np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])):
        w = e.copy()
        for c in cols:
            csq = float(c @ eta3 @ c)
            w = w - (float(e @ eta3 @ c) / csq) * c
        w = w / np.sqrt(-float(w @ eta3 @ w))
        cols.append(w)
    frame = np.column_stack(cols)
    if np.linalg.det(frame) < 0:
        frame[:, 2] = -frame[:, 2]
    return eta3 @ frame.T @ eta3              # the inverse: u -> e0


def _null_boost(chi: float) -> np.ndarray:
    """3x3 boost along e1 scaling e0+e1 by exp(chi)."""
    c, s = np.cosh(chi), np.sinh(chi)
    return np.array([[c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _canonicalize(lc: LightConeOrbit, cls: str, fold_scaling: bool):
    """(Lambda, lam) with group_apply(Lambda, lam, lc) = canonical rep."""
    dim = lc.metric.dim
    frame = _adapted_frame(lc.m)
    eta = _metric_matrix(dim)
    reduce_m = eta @ frame.T @ eta            # frame inverse: [m] -> span(e0,e1,e2)
    a_std = reduce_m @ lc.a_array
    a3 = a_std[:3]
    if cls == OrbitClassSign.POSITIVE:
        norm = np.sqrt(float(a3 @ np.diag([1.0, -1.0, -1.0]) @ a3))
        block = _boost_to_rest(a3 / norm)
        lam_mat = _block3(dim, block) @ reduce_m
        lam_scale = 1.0 / norm
    else:
        spat = a3[1:]
        sn = float(np.linalg.norm(spat))
        nhat = spat / sn
        rot = np.array([[1.0, 0.0, 0.0],
                        [0.0, nhat[0], nhat[1]],
                        [0.0, -nhat[1], nhat[0]]])
        a0_hat = 0.5 * (a3[0] + sn)
        if fold_scaling:
            block = _null_boost(-np.log(a0_hat)) @ rot
            lam_scale = 1.0
        else:
            block = rot
            lam_scale = 1.0 / a0_hat
        lam_mat = _block3(dim, block) @ reduce_m
    return LorentzTransform(lam_mat), lam_scale


def transitivity_witness(p1: LightConeOrbit, p2: LightConeOrbit,
                         unit_scaling: bool = False):
    """Proper orthochronous (Lambda, lam) with (Lambda, lam).p1 = p2.

    Both points must lie in the same class, either elliptic (a^2 > 0) or
    parabolic (a^2 = 0); hyperbolic points are out of scope.  With
    ``unit_scaling`` (parabolic class only) the scaling is folded into a
    null boost and lam = 1 is returned.
    """
    c1 = orbit_class(p1)
    c2 = orbit_class(p2)
    if c1 != c2:
        raise ClassMismatchError(f"points lie in different classes: {c1} vs {c2}")
    if c1 == OrbitClassSign.NEGATIVE:
        raise ValueError("no transitivity witness for the hyperbolic class")
    if unit_scaling and c1 != OrbitClassSign.NULL:
        raise ValueError("unit-scaling witnesses exist only for the null class")
    if p1.a.terms == p2.a.terms and p1.m.terms == p2.m.terms:
        return LorentzTransform.identity(p1.metric.dim), 1.0
    t1, s1 = _canonicalize(p1, c1, unit_scaling)
    t2, s2 = _canonicalize(p2, c1, unit_scaling)
    lam_mat = t2.inverse().compose(t1)
    return lam_mat, s1 / s2
