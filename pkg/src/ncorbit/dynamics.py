"""Effective Hamiltonian, its equations of motion, the Hamilton vector, and
the instantaneous precession rate.

All functions are pure and unit-agnostic: they evaluate the formulas in
whatever consistent unit system the inputs carry.  The x^-7 terms amplify
rounding catastrophically near the origin, so every operation rejects
|x| < 1e-9 * a instead of returning huge values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import kernels as _kern
from .core import NCParams, OrbitElements, PhaseState, _readonly
from .errors import DegenerateOrbitError, SingularOriginError

__all__ = [
    "Derivatives",
    "angular_momentum",
    "effective_hamiltonian",
    "equations_of_motion",
    "hamilton_vector",
    "precession_rate",
]

# |x| below this fraction of the semi-major axis counts as singular
RADIUS_GUARD = 1e-9


@dataclass(frozen=True)
class Derivatives:
    """Phase-space velocity (dx/dt, dp/dt) of the effective flow."""

    dx_dt: np.ndarray
    dp_dt: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dx_dt", _readonly(self.dx_dt))
        object.__setattr__(self, "dp_dt", _readonly(self.dp_dt))


def _check_radius(state: PhaseState, elem: OrbitElements) -> float:
    r = float(np.linalg.norm(state.x))
    if r < RADIUS_GUARD * elem.a:
        raise SingularOriginError(
            f"|x| = {r:.3e} is inside the singular guard {RADIUS_GUARD * elem.a:.3e}"
        )
    return r


def angular_momentum(state: PhaseState) -> np.ndarray:
    """L = x cross p."""
    return np.cross(state.x, state.p)


def effective_hamiltonian(state: PhaseState, elem: OrbitElements, nc: NCParams) -> float:
    """Energy of the effective classical Hamiltonian at `state`.

    p^2/2m - mk/x + eta_sq*x^2/(12m) - theta_sq*m*k*L^2/(8x^5)
      + theta_sq*m*k*p^2/(12x^3), with L^2 = x^2 p^2 - (x.p)^2.
    """
    _check_radius(state, elem)
    return float(_kern.hamiltonian_kernel(state.y, elem.m, elem.k, nc.theta_sq, nc.eta_sq))


def equations_of_motion(state: PhaseState, elem: OrbitElements, nc: NCParams) -> Derivatives:
    """dx/dt = dH/dp and dp/dt = -dH/dx, differentiating through L^2(x, p)."""
    _check_radius(state, elem)
    out = np.empty(6)
    _kern.rhs_kernel(state.y, out, elem.m, elem.k, nc.theta_sq, nc.eta_sq)
    return Derivatives(dx_dt=out[:3], dp_dt=out[3:])


def hamilton_vector(state: PhaseState, elem: OrbitElements) -> np.ndarray:
    """u = p/m - m*k*(L cross x)/(|x| L^2).

    Conserved by the unperturbed Kepler flow, with |u| = m*k*e/L; its
    rotation under the noncommutative terms is the perihelion drift.
    """
    r = _check_radius(state, elem)
    L = np.cross(state.x, state.p)
    l2 = float(L @ L)
    l_ref = elem.m * math.sqrt(elem.k * elem.a)
    if l2 <= (1e-12 * l_ref) ** 2:
        raise DegenerateOrbitError("radial orbit: |L| = 0 leaves u undefined")
    return state.p / elem.m - elem.m * elem.k * np.cross(L, state.x) / (r * l2)


def precession_rate(state: PhaseState, elem: OrbitElements, nc: NCParams) -> np.ndarray:
    """Instantaneous rotation rate Omega of the Hamilton vector, along L.

    The e^2 in the denominators is the osculating eccentricity of the
    underlying Kepler orbit (fixed from the initial conditions via
    u^2 = m^2 k^2 e^2 / L^2), not a per-step quantity.
    """
    r = _check_radius(state, elem)
    e = elem.e
    if e <= 0.0:
        raise DegenerateOrbitError("circular orbit: precession rate undefined at e = 0")
    L = np.cross(state.x, state.p)
    l2 = float(L @ L)
    l_ref = elem.m * math.sqrt(elem.k * elem.a)
    if l2 <= (1e-12 * l_ref) ** 2:
        raise DegenerateOrbitError("radial orbit: |L| = 0 leaves Omega undefined")
    m, k = elem.m, elem.k
    psq = float(state.p @ state.p)
    e2 = e * e
    r4 = r**4
    r5 = r4 * r
    r6 = r5 * r
    r7 = r6 * r
    theta_part = (
        5.0 * l2 * l2 / (8.0 * k * m**3 * r7 * e2)
        - psq * l2 / (2.0 * m**3 * r5 * k * e2)
        + psq / (4.0 * m * e2 * r4)
        - 7.0 * l2 / (24.0 * m * r6 * e2)
        - m * k / (12.0 * r5 * e2)
    )
    eta_part = l2 / (6.0 * m**5 * k * k * e2) - r / (6.0 * m**3 * k * e2)
    return (nc.theta_sq * theta_part + nc.eta_sq * eta_part) * L
