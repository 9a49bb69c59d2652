"""Real skew-symmetric matrices, the invariant pairing, and magnetic orbits.

The Lie algebra so(2k) is realized as real skew-symmetric 2k x 2k matrices.
``generator(a, b, k)`` returns the elementary rotation generator M_{a,b}
whose (a,b) entry is -1 and (b,a) entry is +1 (1-based indices); these form
an orthonormal basis under the pairing (S, T) = tr(S^T T) / 2.

A magnetic charge mu and block count k single out the adjoint orbit through

    (1/sqrt(k)) * (|mu| M_{1,2} + ... + |mu| M_{2k-3,2k-2} + mu M_{2k-1,2k}),

whose members xi satisfy xi xi^T = (mu^2/k) I.  The sign of mu is carried
by the Pfaffian, which conjugation by SO(2k) preserves, so membership is
decided by the spectral condition together with a Pfaffian match.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "SkewMatrix",
    "generator",
    "pairing",
    "orbit_representative",
    "pfaffian",
    "on_orbit_residual",
    "OnOrbitResult",
    "conjugate",
    "commutator",
    "random_special_orthogonal",
    "random_on_orbit",
]


class SkewMatrix:
    """Exactly skew-symmetric real matrix of shape (2k, 2k).

    Only the strict upper triangle of the input is kept; the stored matrix
    is rebuilt as U - U^T so that S^T = -S holds bit for bit.  Input whose
    symmetric part is non-negligible is rejected.
    """

    __slots__ = ("k", "_m")

    def __init__(self, k: int, matrix):
        if k < 1:
            raise ValueError("k must be a positive integer")
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2 * k, 2 * k):
            raise ValueError(f"expected shape {(2 * k, 2 * k)}, got {m.shape}")
        sym = np.max(np.abs(m + m.T))
        if sym > 1e-9 * (1.0 + np.max(np.abs(m))):
            raise ValueError("input matrix is not skew-symmetric")
        upper = np.triu(m, 1)
        self.k = k
        self._m = upper - upper.T

    @classmethod
    def zero(cls, k: int) -> "SkewMatrix":
        return cls(k, np.zeros((2 * k, 2 * k)))

    @classmethod
    def from_upper(cls, k: int, triples) -> "SkewMatrix":
        """Build from 1-based strict-upper entries [(i, j, value), ...]."""
        m = np.zeros((2 * k, 2 * k))
        for i, j, value in triples:
            if not (1 <= i < j <= 2 * k):
                raise ValueError(f"entry ({i}, {j}) is not strictly upper")
            m[i - 1, j - 1] = value
        return cls(k, m - m.T)

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def upper_triples(self) -> list:
        out = []
        for i in range(2 * self.k):
            for j in range(i + 1, 2 * self.k):
                v = self._m[i, j]
                if v != 0.0:
                    out.append((i + 1, j + 1, float(v)))
        return out

    def __add__(self, other: "SkewMatrix") -> "SkewMatrix":
        return SkewMatrix(self.k, self._m + other._m)

    def __sub__(self, other: "SkewMatrix") -> "SkewMatrix":
        return SkewMatrix(self.k, self._m - other._m)

    def __mul__(self, scalar) -> "SkewMatrix":
        return SkewMatrix(self.k, float(scalar) * self._m)

    __rmul__ = __mul__

    def __neg__(self) -> "SkewMatrix":
        return SkewMatrix(self.k, -self._m)

    def __repr__(self):
        return f"SkewMatrix(k={self.k})"

    def to_dict(self) -> dict:
        return {"k": self.k, "upper": [list(t) for t in self.upper_triples()]}

    @classmethod
    def from_dict(cls, data: dict) -> "SkewMatrix":
        return cls.from_upper(int(data["k"]), data["upper"])


def generator(a: int, b: int, k: int) -> SkewMatrix:
    """Elementary generator M_{a,b} of so(2k), 1-based with a < b."""
    if not (1 <= a < b <= 2 * k):
        raise ValueError(f"need 1 <= a < b <= 2k, got a={a}, b={b}, k={k}")
    m = np.zeros((2 * k, 2 * k))
    m[a - 1, b - 1] = -1.0
    m[b - 1, a - 1] = 1.0
    return SkewMatrix(k, m)


def pairing(s: SkewMatrix, t: SkewMatrix) -> float:
    """Invariant pairing (S, T) = tr(S^T T) / 2; generators are orthonormal."""
    if s.k != t.k:
        raise ValueError("pairing needs matching k")
    return 0.5 * float(np.sum(s.matrix * t.matrix))


def orbit_representative(mu: float, k: int) -> SkewMatrix:
    """Base point of the magnetic adjoint orbit of charge mu in so(2k)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    m = np.zeros((2 * k, 2 * k))
    c = 1.0 / np.sqrt(k)
    for block in range(k):
        coeff = mu if block == k - 1 else abs(mu)
        i = 2 * block
        m[i, i + 1] = -c * coeff
        m[i + 1, i] = c * coeff
    return SkewMatrix(k, m)


def pfaffian(matrix) -> float:
    """Pfaffian of an even skew matrix via recursive first-row expansion."""
    a = matrix.matrix if isinstance(matrix, SkewMatrix) else np.asarray(matrix, float)
    n = a.shape[0]
    if a.shape != (n, n) or n % 2:
        raise ValueError("pfaffian needs an even square matrix")
    return _pf(a)


def _pf(a: np.ndarray) -> float:
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 2:
        return a[0, 1]
    total = 0.0
    for j in range(1, n):
        c = a[0, j]
        if c == 0.0:
            continue
        keep = [i for i in range(1, n) if i != j]
        sign = 1.0 if j % 2 == 1 else -1.0
        total += sign * c * _pf(a[np.ix_(keep, keep)])
    return total


class OnOrbitResult(NamedTuple):
    ok: bool
    spectral_residual: float
    pfaffian_residual: float


def on_orbit_residual(xi: SkewMatrix, mu: float, tol: float = 1e-8) -> OnOrbitResult:
    """Test membership of xi in the magnetic orbit of charge mu.

    The spectral residual is the max-abs deviation of xi xi^T from
    (mu^2/k) I; the Pfaffian residual compares Pf(xi) against the orbit
    representative, which separates charge mu from charge -mu.
    """
    k = xi.k
    target = mu * mu / k
    spectral = float(np.max(np.abs(xi.matrix @ xi.matrix.T - target * np.eye(2 * k))))
    pf_ref = pfaffian(orbit_representative(mu, k))
    pf_res = abs(pfaffian(xi) - pf_ref)
    ok = spectral <= tol * max(1.0, target) and pf_res <= tol * max(1.0, abs(pf_ref))
    return OnOrbitResult(ok, spectral, pf_res)


def conjugate(g: np.ndarray, xi: SkewMatrix) -> SkewMatrix:
    """Adjoint action g xi g^T for orthogonal g."""
    g = np.asarray(g, dtype=float)
    if g.shape != xi.matrix.shape:
        raise ValueError("conjugating matrix has wrong shape")
    if np.max(np.abs(g.T @ g - np.eye(g.shape[0]))) > 1e-10:
        raise ValueError("conjugating matrix is not orthogonal")
    return SkewMatrix(xi.k, g @ xi.matrix @ g.T)


def commutator(s: SkewMatrix, t: SkewMatrix) -> SkewMatrix:
    if s.k != t.k:
        raise ValueError("commutator needs matching k")
    return SkewMatrix(s.k, s.matrix @ t.matrix - t.matrix @ s.matrix)


def random_special_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random element of SO(n) from a QR decomposition."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_on_orbit(mu: float, k: int, rng: np.random.Generator) -> SkewMatrix:
    """Random point of the magnetic orbit: a conjugated representative."""
    g = random_special_orthogonal(2 * k, rng)
    return conjugate(g, orbit_representative(mu, k))
