import numpy as np
import pytest

from magkepler.dynamics import integrate

from helpers import make_escape_case, make_orbit_case

DIMS = (3, 5, 7)
CHARGES = (0.0, 0.5, 2.0)
CASES_PER_CELL = 5


@pytest.fixture(scope="session")
def bound_cases():
    """Five bound orbits per (dimension, charge) cell, each integrated for
    ten radial periods at tight tolerance with 120 invariant samples."""
    cases = {}
    for dim in DIMS:
        k = (dim - 1) // 2
        for mu in CHARGES:
            rng = np.random.default_rng([dim, int(10 * mu), 2026])
            cell = []
            for _ in range(CASES_PER_CELL):
                case = make_orbit_case(k, mu, rng)
                t_end = 10.0 * case["T"]
                case["traj"] = integrate(
                    case["s0"], case["mu_run"], k, t_end,
                    rel_tol=1e-12, abs_tol=1e-12,
                    t_eval=np.linspace(0.0, t_end, 120))
                cell.append(case)
            cases[(dim, mu)] = cell
    return cases


@pytest.fixture(scope="session")
def escape_cases():
    """One parabolic and one hyperbolic orbit per dimension."""
    cases = []
    for dim in DIMS:
        k = (dim - 1) // 2
        rng = np.random.default_rng([dim, 77, 2026])
        cases.append(make_escape_case(k, 0.7, 1.0, rng))
        a_norm = float(rng.uniform(1.3, 1.8))
        cases.append(make_escape_case(k, 0.7, a_norm, rng))
        cases.append(make_escape_case(k, 0.0, a_norm, rng))
    return cases
