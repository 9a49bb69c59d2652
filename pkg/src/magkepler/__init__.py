"""Magnetized Kepler problems in odd dimensions.

Tools for the classical Kepler problem coupled to a generalized Dirac
monopole in dimension 2k+1: exterior-algebra kernel, so(2k)-valued gauge
fields and their curvature identities, adaptive integration of the
equations of motion with charge transport, conserved quantities, conic
orbit geometry with a constructive orbit-elements-to-initial-data map,
and the light-cone encoding of oriented orbits with explicit Lorentz
transitivity witnesses.
"""

from .dynamics import State, Trajectory, integrate, state_derivative
from .gauge import gauge_sample, lemma_residuals
from .invariants import compute_invariants, relation_residuals
from .liealg import SkewMatrix, orbit_representative, pairing
from .lorentz import (
    LightConeOrbit,
    LorentzTransform,
    energy_lightcone,
    from_lightcone,
    group_apply,
    lift_point,
    to_lightcone,
    transitivity_witness,
)
from .multivector import Metric, Multivector, inner, interior, wedge
from .orbits import (
    InitialData,
    OrbitClass,
    OrbitElements,
    classify,
    conic_fit,
    construct_initial_data,
    eccentricity,
    elements_from_invariants,
    energy_from_elements,
)

__version__ = "0.1.0"

__all__ = [
    "Metric",
    "Multivector",
    "wedge",
    "inner",
    "interior",
    "SkewMatrix",
    "pairing",
    "orbit_representative",
    "gauge_sample",
    "lemma_residuals",
    "State",
    "Trajectory",
    "integrate",
    "state_derivative",
    "compute_invariants",
    "relation_residuals",
    "OrbitElements",
    "OrbitClass",
    "InitialData",
    "eccentricity",
    "energy_from_elements",
    "classify",
    "construct_initial_data",
    "elements_from_invariants",
    "conic_fit",
    "LightConeOrbit",
    "LorentzTransform",
    "to_lightcone",
    "from_lightcone",
    "energy_lightcone",
    "lift_point",
    "group_apply",
    "transitivity_witness",
    "__version__",
]
