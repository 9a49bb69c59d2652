"""Equation of motion, charge transport, and an adaptive 5(4) integrator.

The flow on the chart excluding the negative x_n half-axis is

    r'' = -r/r^3 + (mu^2/k) r/r^4 + w(r, v, xi)
    xi' = SIGMA_TRANSPORT * [A(v), xi]

with w the magnetic force of the monopole field and A(v) the potential
contracted with the velocity.  The transport equation is conjugation by a
path in SO(2k), so the spectrum of xi (hence its adjoint orbit) is
preserved exactly by the flow and only numerically by the integrator; the
drift is a correctness signal and is never projected away.

``SIGMA_TRANSPORT = +1`` is fixed operationally: it is the unique sign for
which the full angular momentum two-vector is conserved along mu != 0
trajectories (the wrong sign breaks conservation at leading order; see the
sign-convention tests).

The integrator is the classic Dormand-Prince embedded 5(4) pair with
first-same-as-last reuse and a PI (Lund-stabilized) step-size controller.
Requested output times are hit by clamping the step, so samples are exact
solution states rather than interpolants; the controller's own step memory
is kept separately so clamping does not pollute step-size selection.  The
hot path (right-hand side and stage arithmetic) is compiled with numba.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .gauge import SIGMA_POTENTIAL, dirac_string_margin
from .invariants import InvariantRecord, compute_invariants
from .liealg import SkewMatrix, on_orbit_residual
from .multivector import inner

__all__ = [
    "SIGMA_TRANSPORT",
    "State",
    "Trajectory",
    "TrajectorySample",
    "IntegrationError",
    "DiracStringProximityError",
    "CollisionError",
    "StepSizeUnderflowError",
    "state_derivative",
    "micz_rhs_dim3",
    "integrate",
    "radial_period",
    "drift_report",
    "trajectory_to_csv",
    "trajectory_to_json_dict",
]

# Transport sign in xi' = sign * [A(v), xi]; see module docstring.
SIGMA_TRANSPORT = 1.0


class IntegrationError(RuntimeError):
    """Base class for integration aborts."""


class DiracStringProximityError(IntegrationError):
    """Trajectory approached the excluded half-axis of the chart."""


class CollisionError(IntegrationError):
    """Trajectory approached the force center."""


class StepSizeUnderflowError(IntegrationError):
    """Step control drove the step below the resolvable scale."""


@dataclass
class State:
    """Point of the extended phase space: position, velocity, charge."""

    r_vec: np.ndarray
    v: np.ndarray
    xi: SkewMatrix

    def __post_init__(self):
        self.r_vec = np.asarray(self.r_vec, dtype=float)
        self.v = np.asarray(self.v, dtype=float)

    def validate(self, mu: float, k: int, margin_min: float = 1e-4,
                 orbit_tol: float = 1e-6):
        n = 2 * k + 1
        if self.r_vec.shape != (n,) or self.v.shape != (n,):
            raise ValueError(f"state vectors must have dimension {n}")
        if self.xi.k != k:
            raise ValueError("charge matrix size does not match k")
        r = float(np.linalg.norm(self.r_vec))
        if r == 0.0:
            raise ValueError("state at the origin")
        if mu == 0.0:
            # zero charge decouples the gauge field entirely; only the
            # exact half-axis, where the kernel forms 0/0, stays excluded
            margin_min = min(margin_min, 1e-12)
        if dirac_string_margin(self.r_vec) < margin_min:
            raise DiracStringProximityError(
                "initial position too close to the excluded half-axis")
        chk = on_orbit_residual(self.xi, mu, tol=orbit_tol)
        if not chk.ok:
            raise ValueError(
                f"charge is not on the magnetic orbit of mu={mu}: "
                f"spectral residual {chk.spectral_residual:.3e}, "
                f"pfaffian residual {chk.pfaffian_residual:.3e}")

    def copy(self) -> "State":
        return State(self.r_vec.copy(), self.v.copy(),
                     SkewMatrix(self.xi.k, self.xi.matrix.copy()))

    def flat(self) -> np.ndarray:
        return np.concatenate(
            [self.r_vec, self.v, self.xi.matrix.ravel()])

    @classmethod
    def from_flat(cls, y: np.ndarray, k: int) -> "State":
        n = 2 * k + 1
        m = y[2 * n:].reshape(2 * k, 2 * k)
        # the integrator does not preserve antisymmetry exactly; resymmetrize
        m = 0.5 * (m - m.T)
        return cls(y[:n].copy(), y[n:2 * n].copy(), SkewMatrix(k, m))


@njit(cache=True)
def _rhs_flat(y, k, mu2_over_k, sigma_a, sigma_d):
    """Time derivative of the flat state [r, v, xi.ravel()]."""
    n = 2 * k + 1
    m = 2 * k
    out = np.empty_like(y)
    r2 = 0.0
    for i in range(n):
        r2 += y[i] * y[i]
    r = np.sqrt(r2)
    r3 = r2 * r
    xn = y[n - 1]
    vn = y[2 * n - 1]
    # xv = xi @ xt, xiv = xi @ vt, and the inner products we need
    xv = np.zeros(m)
    xiv = np.zeros(m)
    vt_dot_xt = 0.0
    vt_dot_xv = 0.0
    for a in range(m):
        acc_x = 0.0
        acc_v = 0.0
        base = 2 * n + a * m
        for b in range(m):
            acc_x += y[base + b] * y[b]
            acc_v += y[base + b] * y[n + b]
        xv[a] = acc_x
        xiv[a] = acc_v
        vt_dot_xt += y[n + a] * y[a]
        vt_dot_xv += y[n + a] * acc_x
    pref = 1.0 / (r * (r + xn))
    # dr = v
    for i in range(n):
        out[i] = y[n + i]
    # dv = -r/r^3 + (mu^2/k) r/r^4 + w
    c0 = -1.0 / r3 + mu2_over_k / (r2 * r2)
    vt_dot_p = sigma_a * pref * vt_dot_xv
    for b in range(m):
        p_b = sigma_a * pref * xv[b]
        w_b = (sigma_a * xiv[b] - vt_dot_xt * p_b + vt_dot_p * y[b]) / r2 \
            - sigma_a * vn * xv[b] / r3
        out[n + b] = c0 * y[b] + w_b
    out[2 * n - 1] = c0 * xn + sigma_a * vt_dot_xv / r3
    # dxi = sigma_d [A(v), xi],  A(v) = sigma_a pref (vt xt^T - xt vt^T)
    cd = sigma_d * sigma_a * pref
    for p in range(m):
        base = 2 * n + p * m
        for q in range(m):
            out[base + q] = cd * (xv[p] * y[n + q] - y[n + p] * xv[q]
                                  + y[p] * xiv[q] - xiv[p] * y[q])
    return out


# Dormand-Prince 5(4) tableau.
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_A71, _A73, _A74, _A75, _A76 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                                -2187.0 / 6784.0, 11.0 / 84.0)
# error coefficients: 5th-order weights minus 4th-order weights
_E1 = 35.0 / 384.0 - 5179.0 / 57600.0
_E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
_E4 = 125.0 / 192.0 - 393.0 / 640.0
_E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
_E6 = 11.0 / 84.0 - 187.0 / 2100.0
_E7 = -1.0 / 40.0

_STATUS_OK = 0
_STATUS_STRING = 1
_STATUS_COLLISION = 2
_STATUS_UNDERFLOW = 3
_STATUS_MAXSTEPS = 4


@njit(cache=True)
def _advance(y, f0, t, t_target, h, facold, k, mu2_over_k, sigma_a, sigma_d,
             rtol, atol, r_min, margin_min, max_steps):
    """Integrate y in place from t to t_target; returns control state.

    Returns (status, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max).
    ``h`` is the controller's free-running step, kept separate from the
    clamped step actually taken when an output time is near.
    """
    safe = 0.9
    beta = 0.04
    expo1 = 0.2 - 0.75 * beta
    facc1 = 5.0      # max shrink factor per step
    facc2 = 0.1      # 1 / max growth factor per step
    n = 2 * k + 1
    n_accept = 0
    n_reject = 0
    n_rhs = 0
    h_min = np.inf
    h_max = 0.0
    reject = False
    tiny = 1e-14 * max(1.0, abs(t_target))
    while t < t_target - tiny:
        if n_accept + n_reject >= max_steps:
            return _STATUS_MAXSTEPS, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max
        if h < tiny:
            return _STATUS_UNDERFLOW, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max
        clamped = t + h >= t_target
        ht = t_target - t if clamped else h

        y2 = y + ht * (_A21 * f0)
        k2 = _rhs_flat(y2, k, mu2_over_k, sigma_a, sigma_d)
        y3 = y + ht * (_A31 * f0 + _A32 * k2)
        k3 = _rhs_flat(y3, k, mu2_over_k, sigma_a, sigma_d)
        y4 = y + ht * (_A41 * f0 + _A42 * k2 + _A43 * k3)
        k4 = _rhs_flat(y4, k, mu2_over_k, sigma_a, sigma_d)
        y5 = y + ht * (_A51 * f0 + _A52 * k2 + _A53 * k3 + _A54 * k4)
        k5 = _rhs_flat(y5, k, mu2_over_k, sigma_a, sigma_d)
        y6 = y + ht * (_A61 * f0 + _A62 * k2 + _A63 * k3 + _A64 * k4
                       + _A65 * k5)
        k6 = _rhs_flat(y6, k, mu2_over_k, sigma_a, sigma_d)
        ynew = y + ht * (_A71 * f0 + _A73 * k3 + _A74 * k4 + _A75 * k5
                         + _A76 * k6)
        k7 = _rhs_flat(ynew, k, mu2_over_k, sigma_a, sigma_d)
        n_rhs += 6

        err_acc = 0.0
        for i in range(y.shape[0]):
            ei = ht * (_E1 * f0[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                       + _E6 * k6[i] + _E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err_acc += (ei / sc) * (ei / sc)
        err = np.sqrt(err_acc / y.shape[0])

        if not np.isfinite(err):
            # a stage left the domain (inf/nan force); retry much smaller
            h = ht * 0.1
            reject = True
            n_reject += 1
            continue

        fac11 = err ** expo1
        fac = fac11 / facold ** beta
        fac = max(facc2, min(facc1, fac / safe))
        hnew = ht / fac

        if err <= 1.0:
            facold = max(err, 1e-4)
            n_accept += 1
            if ht < h_min:
                h_min = ht
            if ht > h_max:
                h_max = ht
            t = t_target if clamped else t + ht
            y[:] = ynew
            f0[:] = k7
            # domain guards at the accepted state
            r2 = 0.0
            for i in range(n):
                r2 += y[i] * y[i]
            r = np.sqrt(r2)
            if r < r_min:
                return _STATUS_COLLISION, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max
            if (r + y[n - 1]) / r < margin_min:
                return _STATUS_STRING, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max
            if reject:
                hnew = min(hnew, ht)
            reject = False
            h = max(hnew, h) if clamped else hnew
        else:
            n_reject += 1
            reject = True
            h = ht / min(facc1, fac11 / safe)
    return _STATUS_OK, t, h, facold, n_accept, n_reject, n_rhs, h_min, h_max


def _initial_step(y0, f0, rhs: Callable, rtol: float, atol: float,
                  t_span: float) -> float:
    """Starting step size from the standard two-evaluation heuristic."""
    sc = atol + rtol * np.abs(y0)
    dnf = float(np.mean((f0 / sc) ** 2))
    dny = float(np.mean((y0 / sc) ** 2))
    if dnf <= 1e-10 or dny <= 1e-10:
        h0 = 1e-6
    else:
        h0 = 0.01 * math.sqrt(dny / dnf)
    h0 = min(h0, t_span)
    f1 = rhs(y0 + h0 * f0)
    der2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    der12 = max(der2, math.sqrt(dnf))
    if der12 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / der12) ** 0.2
    return min(100.0 * h0, h1, t_span)


@dataclass
class TrajectorySample:
    t: float
    state: State
    invariants: Optional[InvariantRecord]


@dataclass
class Trajectory:
    """Output samples of one integration plus run metadata."""

    samples: list
    metadata: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.metadata["k"]

    @property
    def mu(self) -> float:
        return self.metadata["mu"]

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def positions(self) -> np.ndarray:
        return np.vstack([s.state.r_vec for s in self.samples])

    def velocities(self) -> np.ndarray:
        return np.vstack([s.state.v for s in self.samples])

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.positions(), axis=1)


def state_derivative(s: State, mu: float, k: int):
    """Time derivative (dr, dv, dxi) of a state."""
    s.validate(mu, k)
    y = s.flat()
    out = _rhs_flat(y, k, mu * mu / k, SIGMA_POTENTIAL, SIGMA_TRANSPORT)
    n = 2 * k + 1
    dxi_m = out[2 * n:].reshape(2 * k, 2 * k)
    return out[:n], out[n:2 * n], SkewMatrix(k, 0.5 * (dxi_m - dxi_m.T))


def micz_rhs_dim3(r_vec, v, mu: float) -> np.ndarray:
    """Three-dimensional magnetized Kepler acceleration, used as an oracle.

    Literal evaluation of  -r/r^3 + mu^2 r/r^4 - mu (v x r)/r^3.
    """
    r_vec = np.asarray(r_vec, dtype=float)
    v = np.asarray(v, dtype=float)
    if r_vec.shape != (3,) or v.shape != (3,):
        raise ValueError("dimension-3 oracle needs 3-vectors")
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError("acceleration undefined at the origin")
    return (-r_vec / r**3 + mu * mu * r_vec / r**4
            - mu * np.cross(v, r_vec) / r**3)


def integrate(s0: State, mu: float, k: int, t_end: float,
              rel_tol: float = 1e-10, abs_tol: float = 1e-10,
              t_eval=None, r_min: float = 1e-6, margin_min: float = 1e-4,
              max_steps: int = 10_000_000, with_invariants: bool = True,
              sigma_transport: float = None) -> Trajectory:
    """Integrate the flow from s0 for time t_end, sampling at t_eval.

    Samples are exact accepted states (steps are clamped to the requested
    times).  When t_eval is omitted, 201 uniform samples over [0, t_end]
    are used; when given, it must be strictly increasing within
    [0, t_end], and the final state at t_end is always included.

    The half-axis exclusion of radius margin_min applies to charged
    runs; with mu = 0 the gauge field decouples and trajectories may
    pass the half-axis freely (an exact-axis floor remains).
    """
    if not (t_end > 0.0):
        raise ValueError("t_end must be positive")
    for tol in (rel_tol, abs_tol):
        if not (0.0 < tol <= 1e-3):
            raise ValueError("tolerances must lie in (0, 1e-3]")
    if mu == 0.0:
        # with the gauge field decoupled the half-axis is harmless; keep
        # only an exact-axis floor against the 0/0 in the kernel
        margin_min = min(margin_min, 1e-12)
    s0.validate(mu, k, margin_min=margin_min)
    sigma_d = SIGMA_TRANSPORT if sigma_transport is None else float(sigma_transport)

    if t_eval is None:
        targets = list(np.linspace(0.0, t_end, 201))
    else:
        targets = [float(t) for t in np.atleast_1d(np.asarray(t_eval, dtype=float))]
        if any(b - a <= 0 for a, b in zip(targets, targets[1:])):
            raise ValueError("t_eval must be strictly increasing")
        if targets and (targets[0] < 0.0 or targets[-1] > t_end * (1 + 1e-12)):
            raise ValueError("t_eval must lie within [0, t_end]")
        if not targets or targets[-1] < t_end * (1 - 1e-12):
            targets.append(t_end)

    mu2k = mu * mu / k
    y = s0.flat()
    f0 = _rhs_flat(y, k, mu2k, SIGMA_POTENTIAL, sigma_d)

    def rhs(z):
        return _rhs_flat(z, k, mu2k, SIGMA_POTENTIAL, sigma_d)

    h = _initial_step(y, f0, rhs, rel_tol, abs_tol, t_end)
    facold = 1e-4
    t = 0.0
    stats = {"n_accept": 0, "n_reject": 0, "n_rhs": 2,
             "h_min": np.inf, "h_max": 0.0}
    samples = []

    def record(tcur):
        state = State.from_flat(y, k)
        inv = compute_invariants(state, mu, k) if with_invariants else None
        samples.append(TrajectorySample(tcur, state, inv))

    if targets and targets[0] <= 1e-14 * max(1.0, t_end):
        record(0.0)
        targets = targets[1:]

    for target in targets:
        status, t, h, facold, na, nr, nf, hmin, hmax = _advance(
            y, f0, t, target, h, facold, k, mu2k, SIGMA_POTENTIAL, sigma_d,
            rel_tol, abs_tol, r_min, margin_min, max_steps)
        stats["n_accept"] += na
        stats["n_reject"] += nr
        stats["n_rhs"] += nf
        stats["h_min"] = min(stats["h_min"], hmin)
        stats["h_max"] = max(stats["h_max"], hmax)
        if status == _STATUS_STRING:
            raise DiracStringProximityError(
                f"trajectory reached the excluded half-axis region at t={t:.6g}")
        if status == _STATUS_COLLISION:
            raise CollisionError(f"trajectory reached r < {r_min:g} at t={t:.6g}")
        if status == _STATUS_UNDERFLOW:
            raise StepSizeUnderflowError(
                f"step size underflow at t={t:.6g} (h={h:.3e})")
        if status == _STATUS_MAXSTEPS:
            raise IntegrationError(f"exceeded {max_steps} steps at t={t:.6g}")
        record(t)

    metadata = {"k": k, "mu": mu, "rel_tol": rel_tol, "abs_tol": abs_tol,
                "r_min": r_min, "margin_min": margin_min,
                "sigma_potential": SIGMA_POTENTIAL, "sigma_transport": sigma_d,
                "stats": stats}
    return Trajectory(samples, metadata)


def radial_period(traj: Trajectory) -> float:
    """Radial period estimated from successive minima of r(t).

    Locates interior samples that are local minima of the radius and
    refines each minimum with a parabola through its three nearest
    samples; returns the mean spacing between consecutive refined minima.
    Needs at least two minima, hence a trajectory covering more than one
    radial cycle with reasonably dense sampling.
    """
    t = traj.times()
    r = traj.radii()
    minima = []
    for i in range(1, len(r) - 1):
        if r[i] <= r[i - 1] and r[i] < r[i + 1]:
            t0, t1, t2 = t[i - 1], t[i], t[i + 1]
            r0, r1, r2 = r[i - 1], r[i], r[i + 1]
            denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
            a = (t2 * (r1 - r0) + t1 * (r0 - r2) + t0 * (r2 - r1)) / denom
            b = (t2 * t2 * (r0 - r1) + t1 * t1 * (r2 - r0)
                 + t0 * t0 * (r1 - r2)) / denom
            minima.append(-b / (2 * a) if a > 0 else t1)
    if len(minima) < 2:
        raise ValueError("need at least two radial minima to estimate a period")
    gaps = np.diff(minima)
    return float(np.mean(gaps))


def drift_report(traj: Trajectory) -> dict:
    """Max relative drift of each conserved quantity over the samples.

    Every sample is compared against the first one.  Vector and
    multivector quantities drift in the Euclidean norm of their
    coefficients, normalized by max(1, initial norm).  Also reports the
    worst charge-orbit residuals along the trajectory.
    """
    recs = [s.invariants for s in traj.samples]
    if any(rec is None for rec in recs):
        raise ValueError("trajectory was integrated without invariant records")
    first = recs[0]
    mu, k = traj.mu, traj.k

    def rel(x, scale):
        return x / max(1.0, scale)

    out = {"E": 0.0, "L": 0.0, "A": 0.0, "V": 0.0, "Lbar": 0.0,
           "xi_pairing": 0.0, "xi_spectral": 0.0, "xi_pfaffian": 0.0}
    l0 = first.L.coeff_norm()
    a0 = float(np.linalg.norm(first.A))
    v0 = first.V.coeff_norm() if first.V is not None else 0.0
    lb0 = first.Lbar.coeff_norm() if first.Lbar is not None else 0.0
    pair0 = 0.5 * float(np.sum(traj.samples[0].state.xi.matrix ** 2))
    for sample, rec in zip(traj.samples, recs):
        out["E"] = max(out["E"], rel(abs(rec.E - first.E), abs(first.E)))
        out["L"] = max(out["L"], rel((rec.L - first.L).coeff_norm(), l0))
        out["A"] = max(out["A"],
                       rel(float(np.linalg.norm(rec.A - first.A)), a0))
        if first.V is not None and rec.V is not None:
            out["V"] = max(out["V"], rel((rec.V - first.V).coeff_norm(), v0))
            out["Lbar"] = max(out["Lbar"],
                              rel((rec.Lbar - first.Lbar).coeff_norm(), lb0))
        pair = 0.5 * float(np.sum(sample.state.xi.matrix ** 2))
        out["xi_pairing"] = max(out["xi_pairing"], rel(abs(pair - pair0), pair0))
        chk = on_orbit_residual(sample.state.xi, mu, tol=np.inf)
        out["xi_spectral"] = max(out["xi_spectral"], chk.spectral_residual)
        out["xi_pfaffian"] = max(out["xi_pfaffian"], chk.pfaffian_residual)
    return out


def _csv_header(k: int) -> list:
    n = 2 * k + 1
    cols = ["t"]
    cols += [f"r{i}" for i in range(1, n + 1)]
    cols += [f"v{i}" for i in range(1, n + 1)]
    cols += [f"xi_{a}_{b}" for a in range(1, 2 * k + 1)
             for b in range(a + 1, 2 * k + 1)]
    cols += ["E"]
    cols += [f"A{i}" for i in range(1, n + 1)]
    cols += ["L_normsq", "Lbar_normsq", "conic_residual"]
    return cols


def _sample_row(sample: TrajectorySample, a_ref: np.ndarray,
                latus: float) -> list:
    s = sample.state
    rec = sample.invariants
    r = float(np.linalg.norm(s.r_vec))
    m = s.xi.matrix
    row = [sample.t]
    row += list(s.r_vec)
    row += list(s.v)
    row += [m[a, b] for a in range(m.shape[0])
            for b in range(a + 1, m.shape[0])]
    row += [rec.E]
    row += list(rec.A)
    row += [inner(rec.L, rec.L),
            inner(rec.Lbar, rec.Lbar) if rec.Lbar is not None else float("nan")]
    row += [r - float(np.dot(a_ref, s.r_vec)) - latus]
    return row


def _export_refs(traj: Trajectory):
    """Reference Lenz vector and conic latus rectum |Lbar|^2 - mu^2/k."""
    first = traj.samples[0]
    rec = first.invariants
    if rec is None:
        raise ValueError("trajectory was integrated without invariant records")
    s = first.state
    rv_sq = float(np.dot(s.r_vec, s.r_vec) * np.dot(s.v, s.v)
                  - np.dot(s.r_vec, s.v) ** 2)
    return rec.A, rv_sq


def trajectory_to_csv(traj: Trajectory, path):
    a_ref, latus = _export_refs(traj)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_csv_header(traj.k))
        for sample in traj.samples:
            writer.writerow([repr(float(x)) for x in
                             _sample_row(sample, a_ref, latus)])


def trajectory_to_json_dict(traj: Trajectory) -> dict:
    a_ref, latus = _export_refs(traj)
    header = _csv_header(traj.k)
    samples = []
    for sample in traj.samples:
        row = _sample_row(sample, a_ref, latus)
        rec = sample.invariants
        samples.append({
            "t": sample.t,
            "r": [float(x) for x in sample.state.r_vec],
            "v": [float(x) for x in sample.state.v],
            "xi": sample.state.xi.to_dict(),
            "invariants": rec.to_dict(),
            "conic_residual": float(row[len(header) - 1]),
        })
    meta = dict(traj.metadata)
    meta["stats"] = {k2: (float(v) if math.isfinite(v) else None)
                     for k2, v in traj.metadata["stats"].items()}
    return {"metadata": meta, "samples": samples}
