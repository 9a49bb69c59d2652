"""Seeded generators and small utilities shared by the test modules."""

import numpy as np

from magkepler.dynamics import State, integrate
from magkepler.liealg import random_on_orbit, random_special_orthogonal
from magkepler.multivector import Metric, Multivector, apply_linear, inner, interior, wedge
from magkepler.orbits import OrbitElements, construct_initial_data, energy_from_elements


def margin_of(r_vec) -> float:
    r = np.linalg.norm(r_vec)
    return (r + r_vec[-1]) / r


def random_point(n, rng, margin=0.1, radius=(0.5, 2.0)):
    """Random position with Dirac-string margin above the given floor."""
    while True:
        r_vec = rng.normal(size=n)
        r_vec *= rng.uniform(*radius) / np.linalg.norm(r_vec)
        if margin_of(r_vec) > margin:
            return r_vec


def random_state(k, mu, rng, margin=0.1):
    """Generic non-radial state with charge on the orbit of mu."""
    n = 2 * k + 1
    r_vec = random_point(n, rng, margin=margin)
    while True:
        v = rng.normal(size=n)
        cross = np.outer(r_vec, v) - np.outer(v, r_vec)
        if np.linalg.norm(cross) > 0.1 * np.linalg.norm(r_vec) * np.linalg.norm(v):
            break
    return State(r_vec, v, random_on_orbit(mu, k, rng))


def plane_projector(lbar):
    """Orthogonal projection onto the plane of a decomposable 2-vector."""
    metric = lbar.metric
    lsq = inner(lbar, lbar)

    def proj(x):
        inside = interior(Multivector.vector(metric, x), lbar).to_array()
        return -interior(Multivector.vector(metric, inside), lbar).to_array() / lsq

    return proj


def make_elements(k, mu, rng, a_range=(0.4, 0.65), f_range=(0.55, 0.85),
                  w_range=(0.7, 1.3)):
    """Random orbit elements whose implied magnetic charge is exactly |mu|.

    The Lenz vector splits as a fraction sqrt(1-f^2) inside the plane of
    Lbar and f perpendicular to it; for mu != 0 the norm of Lbar is then
    forced by sqrt(k) * |Lbar ^ A| = |mu|.  a_range larger than one
    produces unbound elements.
    """
    n = 2 * k + 1
    eu = Metric.euclidean(n)
    while True:
        u = rng.normal(size=n)
        w2 = rng.normal(size=n)
        lb = wedge(Multivector.vector(eu, u), Multivector.vector(eu, w2))
        norm = np.sqrt(inner(lb, lb))
        if norm > 0.3:
            break
    lb = (1.0 / norm) * lb
    a = rng.uniform(*a_range)
    if mu == 0.0:
        w, f = rng.uniform(*w_range), 0.0
    else:
        # membership |Lbar|^2 > |Lbar ^ A|^2 needs f*a < 1
        f = rng.uniform(*f_range) * min(1.0, 0.9 / a)
        w = abs(mu) / (np.sqrt(k) * f * a)
    lb = w * lb
    proj = plane_projector(lb)
    x1 = proj(rng.normal(size=n))
    x1 /= np.linalg.norm(x1)
    yp = rng.normal(size=n)
    yp = yp - proj(yp)
    yp /= np.linalg.norm(yp)
    a_vec = a * (np.sqrt(1.0 - f * f) * x1 + f * yp)
    return OrbitElements(a_vec, lb, k)


def radial_period_analytic(energy: float) -> float:
    return 2.0 * np.pi * (-2.0 * energy) ** -1.5


def make_orbit_case(k, mu, rng, min_margin=0.04):
    """Bound orbit initial data placed safely away from the Dirac string.

    Returns a dict with the caller-frame elements, the matching elements
    in the integration frame, the initial state, the signed charge the
    constructed eta lies on, and the analytic radial period.  For mu = 0
    the charge decouples and a random global rotation moves the orbit
    plane off the x_n axis, which it would otherwise contain.
    """
    n = 2 * k + 1
    while True:
        el = make_elements(k, mu, rng)
        energy = energy_from_elements(el)
        period = radial_period_analytic(energy)
        data = construct_initial_data(el)
        q, v = data.q, data.v
        frame_map = data.rotation.T
        if mu == 0.0:
            g = random_special_orthogonal(n, rng)
            q, v = g @ q, g @ v
            frame_map = g @ frame_map
        s0 = State(q, v, data.eta)
        try:
            scan = integrate(s0, data.implied_mu, k, period,
                             rel_tol=1e-8, abs_tol=1e-8,
                             t_eval=np.linspace(0.0, period, 80),
                             margin_min=min(0.5 * min_margin, 0.02),
                             with_invariants=False)
        except Exception:
            continue
        if min(margin_of(s.state.r_vec) for s in scan.samples) < min_margin:
            continue
        el_frame = OrbitElements(frame_map @ el.A,
                                 apply_linear(frame_map, el.Lbar), k)
        return {"el": el, "el_frame": el_frame, "s0": s0,
                "mu_run": data.implied_mu, "T": period, "data": data}


def make_escape_case(k, mu, a_norm, rng, scan_window=60.0, min_margin=0.05):
    """Unbound (parabolic or hyperbolic) orbit with a string-safe window.

    Also integrates far outward -- past one thousand times the starting
    (perihelion) radius -- for escape-geometry checks; the horizon comes
    from the parabolic travel-time bound and is doubled on shortfall.
    """
    while True:
        el = make_elements(k, mu, rng, a_range=(a_norm, a_norm))
        data = construct_initial_data(el)
        s0 = State(data.q, data.v, data.eta)
        r0 = float(np.linalg.norm(data.q))
        target = 1.05e3 * r0
        e_tot = energy_from_elements(el)
        t_far = np.sqrt(2.0) / 3.0 * target**1.5
        if e_tot > 1e-12:
            t_far = min(t_far, target / np.sqrt(2.0 * e_tot)
                        + np.sqrt(2.0) / 3.0 * min(target, 1.5 / e_tot) ** 1.5)
        t_far *= 1.3
        try:
            scan = integrate(s0, data.implied_mu, k, scan_window,
                             rel_tol=1e-8, abs_tol=1e-8,
                             t_eval=np.linspace(0.0, scan_window, 80),
                             margin_min=min(0.5 * min_margin, 0.02),
                             with_invariants=False)
            if min(margin_of(s.state.r_vec) for s in scan.samples) < min_margin:
                continue
            for _ in range(3):
                t_eval = np.concatenate([[0.0], np.geomspace(0.01, t_far, 239)])
                far = integrate(s0, data.implied_mu, k, t_far,
                                rel_tol=1e-9, abs_tol=1e-9, t_eval=t_eval,
                                with_invariants=False)
                if np.linalg.norm(far.samples[-1].state.r_vec) >= target:
                    break
                t_far *= 2.0
            else:
                continue
        except Exception:
            continue
        el_frame = OrbitElements(data.rotation.T @ el.A,
                                 apply_linear(data.rotation.T, el.Lbar), k)
        return {"el": el, "el_frame": el_frame, "s0": s0,
                "mu_run": data.implied_mu, "data": data, "far": far,
                "r_peri": r0}


def mu_reversed(mu: float, k: int) -> float:
    """Charge labeling the orbit of -xi: negation flips the Pfaffian sign
    only when k is odd."""
    return mu if k % 2 == 0 else -mu


def reverse_state(s: State) -> State:
    from magkepler.liealg import SkewMatrix
    return State(s.r_vec.copy(), -s.v, SkewMatrix(s.xi.k, -s.xi.matrix))


def step_state(s: State, mu: float, k: int, dt: float, tol=1e-12) -> State:
    """Advance a state by a signed time offset (backward via reversal)."""
    if dt == 0.0:
        return s.copy()
    if dt > 0:
        traj = integrate(s, mu, k, dt, rel_tol=tol, abs_tol=tol,
                         t_eval=np.array([dt]), with_invariants=False)
        return traj.samples[-1].state
    rev = reverse_state(s)
    traj = integrate(rev, mu_reversed(mu, k), k, -dt, rel_tol=tol,
                     abs_tol=tol, t_eval=np.array([-dt]),
                     with_invariants=False)
    return reverse_state(traj.samples[-1].state)


def multivector_distance(x, y) -> float:
    return (x + (-1.0) * y).coeff_norm()


def lightcone_distance(p, q) -> float:
    return max(float(np.max(np.abs(p.a_array - q.a_array))),
               multivector_distance(p.m, q.m))
