"""Exterior algebra over Euclidean R^n and Lorentz R^{1,n}.

Multivectors are stored sparsely as a map from strictly increasing index
tuples to real coefficients.  Euclidean basis vectors carry indices 1..n;
the Lorentz space adds a temporal index 0 with square +1 while every
spatial basis vector squares to -1.  The inner product of two decomposable
multivectors is the Gram determinant of the pairwise vector products, which
makes the basis blades orthogonal with signs given by the product of the
metric signs of their indices.

Tolerance checks throughout this module use the coefficient 2-norm (the
Euclidean norm of the stored coefficients), which stays meaningful for
Lorentz multivectors whose metric square can vanish or go negative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EUCLIDEAN = "euclidean"
LORENTZ = "lorentz"

__all__ = [
    "EUCLIDEAN",
    "LORENTZ",
    "Metric",
    "Multivector",
    "wedge",
    "inner",
    "interior",
    "is_decomposable",
    "project_onto_plane_square",
    "embed_spatial",
    "spatial_part",
    "apply_linear",
]


@dataclass(frozen=True)
class Metric:
    """Diagonal metric of the ambient space.

    ``kind`` is either ``"euclidean"`` (R^n, indices 1..n, all squares +1)
    or ``"lorentz"`` (R^{1,n}, indices 0..n, index 0 squares to +1 and the
    rest to -1).  ``n`` is the spatial dimension in both cases.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in (EUCLIDEAN, LORENTZ):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("spatial dimension must be at least 2")

    @classmethod
    def euclidean(cls, n: int) -> "Metric":
        return cls(EUCLIDEAN, n)

    @classmethod
    def lorentz(cls, n: int) -> "Metric":
        return cls(LORENTZ, n)

    @property
    def dim(self) -> int:
        """Ambient dimension: n for Euclidean, 1+n for Lorentz."""
        return self.n + 1 if self.kind == LORENTZ else self.n

    @property
    def indices(self) -> tuple:
        start = 0 if self.kind == LORENTZ else 1
        return tuple(range(start, self.n + 1))

    def sign(self, i: int) -> float:
        """Square of the basis vector e_i under this metric."""
        if i not in self.indices:
            raise ValueError(f"index {i} outside metric range")
        if self.kind == EUCLIDEAN:
            return 1.0
        return 1.0 if i == 0 else -1.0

    def blade_sign(self, idx: tuple) -> float:
        s = 1.0
        for i in idx:
            s *= self.sign(i)
        return s


def _merge_sign(lhs: tuple, rhs: tuple):
    """Merge two increasing index tuples, tracking the permutation sign.

    Returns (sign, merged) or (None, ()) when an index repeats.
    """
    sign = 1
    out = []
    i = j = 0
    while i < len(lhs) and j < len(rhs):
        a, b = lhs[i], rhs[j]
        if a == b:
            return None, ()
        if a < b:
            out.append(a)
            i += 1
        else:
            out.append(b)
            j += 1
            if (len(lhs) - i) % 2:
                sign = -sign
    out.extend(lhs[i:])
    out.extend(rhs[j:])
    return sign, tuple(out)


@lru_cache(maxsize=None)
def _combos(indices: tuple, grade: int) -> tuple:
    return tuple(itertools.combinations(indices, grade))


@lru_cache(maxsize=None)
def _combo_pos(indices: tuple, grade: int) -> dict:
    return {c: p for p, c in enumerate(_combos(indices, grade))}


class Multivector:
    """Homogeneous multivector of a fixed grade over a :class:`Metric`."""

    __slots__ = ("metric", "grade", "terms")

    def __init__(self, metric: Metric, grade: int, terms=None):
        if grade < 0:
            raise ValueError("grade must be non-negative")
        self.metric = metric
        self.grade = grade
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != grade:
                raise ValueError(f"term {idx} does not have grade {grade}")
            if any(i not in metric.indices for i in idx):
                raise ValueError(f"term {idx} outside metric index range")
            if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                raise ValueError(f"term indices {idx} must strictly increase")
            c = float(c)
            if c != 0.0:
                clean[idx] = c
        if grade > metric.dim and clean:
            raise ValueError("grade exceeds ambient dimension")
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, metric: Metric, grade: int) -> "Multivector":
        return cls(metric, grade, {})

    @classmethod
    def blade(cls, metric: Metric, idx, coeff: float = 1.0) -> "Multivector":
        idx = tuple(idx)
        return cls(metric, len(idx), {idx: coeff})

    @classmethod
    def basis_vector(cls, metric: Metric, i: int) -> "Multivector":
        return cls(metric, 1, {(i,): 1.0})

    @classmethod
    def vector(cls, metric: Metric, comps) -> "Multivector":
        """Grade-1 multivector from components listed in metric index order."""
        comps = np.asarray(comps, dtype=float)
        if comps.shape != (metric.dim,):
            raise ValueError(
                f"expected {metric.dim} components, got shape {comps.shape}"
            )
        return cls(metric, 1, {(i,): c for i, c in zip(metric.indices, comps)})

    # -- basics ------------------------------------------------------------

    def coeff(self, idx) -> float:
        return self.terms.get(tuple(idx), 0.0)

    def coeff_norm(self) -> float:
        """Euclidean norm of the stored coefficients (metric independent)."""
        return float(np.sqrt(sum(c * c for c in self.terms.values())))

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.coeff_norm() <= tol

    def to_array(self) -> np.ndarray:
        """Components of a grade-1 multivector in metric index order."""
        if self.grade != 1:
            raise ValueError("to_array is defined for grade-1 multivectors")
        return np.array([self.terms.get((i,), 0.0) for i in self.metric.indices])

    def dense(self) -> np.ndarray:
        """Coefficient vector over the sorted basis blades of this grade."""
        pos = _combo_pos(self.metric.indices, self.grade)
        out = np.zeros(len(pos))
        for idx, c in self.terms.items():
            out[pos[idx]] = c
        return out

    @classmethod
    def from_dense(cls, metric: Metric, grade: int, vec) -> "Multivector":
        combos = _combos(metric.indices, grade)
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(combos),):
            raise ValueError("dense coefficient vector has wrong length")
        return cls(metric, grade, {c: v for c, v in zip(combos, vec) if v != 0.0})

    # -- arithmetic --------------------------------------------------------

    def _check_compatible(self, other: "Multivector"):
        if self.metric != other.metric:
            raise ValueError("metric mismatch")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check_compatible(other)
        if self.grade != other.grade:
            raise ValueError("cannot add multivectors of different grades")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, 0.0) + c
        return Multivector(self.metric, self.grade, terms)

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "Multivector":
        s = float(scalar)
        return Multivector(
            self.metric, self.grade, {i: s * c for i, c in self.terms.items()}
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Multivector":
        return (-1.0) * self

    def __xor__(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    def __repr__(self):
        body = " + ".join(
            f"{c:g}*e{''.join(map(str, idx))}" for idx, c in sorted(self.terms.items())
        )
        return f"<{self.metric.kind} grade-{self.grade}: {body or '0'}>"

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.kind,
            "dim": self.metric.n,
            "grade": self.grade,
            "terms": [
                {"idx": list(idx), "c": c} for idx, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Multivector":
        metric = Metric(data["metric"], int(data["dim"]))
        terms = {tuple(t["idx"]): float(t["c"]) for t in data["terms"]}
        return cls(metric, int(data["grade"]), terms)


# -- core operations -------------------------------------------------------


def wedge(x: Multivector, y: Multivector) -> Multivector:
    """Exterior product x ^ y of grade g(x) + g(y)."""
    x._check_compatible(y)
    grade = x.grade + y.grade
    terms = {}
    for ix, cx in x.terms.items():
        for iy, cy in y.terms.items():
            sign, merged = _merge_sign(ix, iy)
            if sign is None:
                continue
            terms[merged] = terms.get(merged, 0.0) + sign * cx * cy
    return Multivector(x.metric, grade, terms)


def inner(x: Multivector, y: Multivector) -> float:
    """Gram-determinant inner product; zero across different grades."""
    x._check_compatible(y)
    if x.grade != y.grade:
        return 0.0
    metric = x.metric
    total = 0.0
    small, large = (x, y) if len(x.terms) <= len(y.terms) else (y, x)
    for idx, c in small.terms.items():
        d = large.terms.get(idx)
        if d is not None:
            total += c * d * metric.blade_sign(idx)
    return total


def interior(x: Multivector, v: Multivector) -> Multivector:
    """Interior product x _| v, the metric adjoint of wedging by x.

    Defined by <x ^ u, v> = <u, x _| v> for every test multivector u of
    grade g(v) - g(x).
    """
    x._check_compatible(v)
    if x.grade > v.grade:
        raise ValueError("interior product needs g(x) <= g(v)")
    metric = x.metric
    out_grade = v.grade - x.grade
    terms = {}
    for k_idx in _combos(metric.indices, out_grade):
        c = inner(wedge(x, Multivector.blade(metric, k_idx)), v)
        if c != 0.0:
            terms[k_idx] = c * metric.blade_sign(k_idx)
    return Multivector(metric, out_grade, terms)


def is_decomposable(x: Multivector, tol: float = 1e-10) -> bool:
    """Whether x is a wedge of vectors, within tolerance.

    Grade 2 uses the x ^ x = 0 criterion; grade 3 contracts with every
    basis vector and requires (e_i _| x) ^ x = 0.  Other grades are not
    supported.  The zero multivector counts as decomposable.
    """
    if x.grade not in (2, 3):
        raise ValueError("decomposability test supports grades 2 and 3 only")
    scale = x.coeff_norm() ** 2
    if scale == 0.0:
        return True
    if x.grade == 2:
        return wedge(x, x).coeff_norm() <= tol * scale
    for i in x.metric.indices:
        contraction = interior(Multivector.basis_vector(x.metric, i), x)
        if wedge(contraction, x).coeff_norm() > tol * scale:
            return False
    return True


def plane_basis(v: Multivector, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (rows) of the span of a decomposable 3-vector."""
    if v.grade != 3:
        raise ValueError("expected a 3-vector")
    if v.metric.kind != EUCLIDEAN:
        raise ValueError("span extraction implemented for Euclidean metric")
    if v.is_zero():
        raise ValueError("zero 3-vector has no 3-dimensional span")
    if not is_decomposable(v, tol=max(tol, 1e-10)):
        raise ValueError("3-vector is not decomposable")
    metric = v.metric
    rows = []
    for i, j in _combos(metric.indices, 2):
        w = interior(Multivector.blade(metric, (i, j)), v)
        rows.append(w.to_array())
    mat = np.array(rows)
    _, svals, vt = np.linalg.svd(mat)
    if svals[2] <= 1e-12 * svals[0]:
        raise ValueError("3-vector span is numerically degenerate")
    return vt[:3]


def project_onto_plane_square(l2: Multivector, v3: Multivector) -> Multivector:
    """Orthogonal projection of a 2-vector onto Lambda^2 of span(v3).

    ``v3`` must be a nonzero decomposable Euclidean 3-vector; the result is
    the component of ``l2`` lying in the exterior square of its 3-space.
    """
    if l2.grade != 2:
        raise ValueError("expected a 2-vector to project")
    l2._check_compatible(v3)
    basis = plane_basis(v3)
    metric = l2.metric
    vecs = [Multivector.vector(metric, b) for b in basis]
    out = Multivector.zero(metric, 2)
    for p in range(3):
        for q in range(p + 1, 3):
            blade = wedge(vecs[p], vecs[q])
            out = out + inner(l2, blade) * blade
    return out


def embed_spatial(x: Multivector) -> Multivector:
    """Reinterpret a Euclidean multivector inside the Lorentz space.

    Indices are unchanged (spatial index i keeps the label i); the metric
    square picks up a factor (-1)^grade.
    """
    if x.metric.kind != EUCLIDEAN:
        raise ValueError("embed_spatial expects a Euclidean multivector")
    return Multivector(Metric.lorentz(x.metric.n), x.grade, dict(x.terms))


def spatial_part(x: Multivector, tol: float = 1e-9) -> Multivector:
    """Euclidean multivector carrying the purely spatial terms of x.

    Raises if x has temporal components larger than tol relative to its
    coefficient norm; this keeps accidental information loss loud.
    """
    if x.metric.kind != LORENTZ:
        raise ValueError("spatial_part expects a Lorentz multivector")
    spatial = {}
    temporal_sq = 0.0
    for idx, c in x.terms.items():
        if 0 in idx:
            temporal_sq += c * c
        else:
            spatial[idx] = c
    if temporal_sq > (tol * max(x.coeff_norm(), 1.0)) ** 2:
        raise ValueError("multivector has non-negligible temporal components")
    return Multivector(Metric.euclidean(x.metric.n), x.grade, spatial)


@lru_cache(maxsize=None)
def _compound_index_arrays(indices: tuple, grade: int):
    combos = _combos(indices, grade)
    pos = {i: p for p, i in enumerate(indices)}
    arr = np.array([[pos[i] for i in c] for c in combos], dtype=np.intp)
    return arr


def apply_linear(matrix: np.ndarray, x: Multivector) -> Multivector:
    """Push x forward along the linear map with the given matrix.

    The matrix acts on vector components in metric index order; on grade-g
    multivectors it acts through g x g minors (the compound matrix).
    """
    metric = x.metric
    d = metric.dim
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix")
    if x.grade == 0:
        return x
    if x.grade == 1:
        return Multivector.vector(metric, matrix @ x.to_array())
    rows = _compound_index_arrays(metric.indices, x.grade)
    sub = matrix[rows[:, None, :, None], rows[None, :, None, :]]
    compound = np.linalg.det(sub)
    return Multivector.from_dense(metric, x.grade, compound @ x.dense())
